#pragma once

#include <array>
#include <cstddef>
#include <cstring>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "progderiv/errors.hpp"

namespace progderiv {

namespace detail {

// One reusable deflate stream. Initializing a stream from scratch costs two
// orders of magnitude more than deflateReset, and analysis runs make
// millions of tiny compressions, so streams are cached per thread and level.
// The parameters match compress2's defaults, byte-for-byte.
class DeflateSizer {
  public:
    explicit DeflateSizer(int level) {
        std::memset(&zs_, 0, sizeof(zs_));
        if (deflateInit2(&zs_, level, Z_DEFLATED, 15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
            throw Error("deflateInit2 failed");
        }
    }
    DeflateSizer(const DeflateSizer&) = delete;
    DeflateSizer& operator=(const DeflateSizer&) = delete;
    ~DeflateSizer() { deflateEnd(&zs_); }

    std::size_t size(std::string_view bytes) {
        if (deflateReset(&zs_) != Z_OK) throw Error("deflateReset failed");
        out_.resize(deflateBound(&zs_, static_cast<uLong>(bytes.size())));
        zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
        zs_.avail_in = static_cast<uInt>(bytes.size());
        zs_.next_out = out_.data();
        zs_.avail_out = static_cast<uInt>(out_.size());
        if (deflate(&zs_, Z_FINISH) != Z_STREAM_END) {
            throw Error("deflate did not finish");
        }
        return static_cast<std::size_t>(zs_.total_out);
    }

  private:
    z_stream zs_;
    std::vector<Bytef> out_;
};

inline std::size_t deflate_size(int level, std::string_view bytes) {
    thread_local std::array<std::unique_ptr<DeflateSizer>, 10> sizers;
    auto& sizer = sizers[static_cast<std::size_t>(level)];
    if (!sizer) sizer = std::make_unique<DeflateSizer>(level);
    return sizer->size(bytes);
}

}  // namespace detail

// Lossless general-purpose compressor used to approximate Kolmogorov
// complexity. Only the compressed *length* matters here. The single shipped
// backend is zlib's deflate; the effort level is fixed at construction and
// echoed into every report so results stay reproducible.
class Compressor {
  public:
    static constexpr int kDefaultLevel = 6;

    static Compressor zlib(int level = kDefaultLevel) { return Compressor("zlib", level); }

    static Compressor from_name(std::string_view name, int level = kDefaultLevel) {
        if (name == "zlib") return zlib(level);
        throw ConfigError("unknown compressor '" + std::string(name) + "' (available: zlib)");
    }

    static std::vector<std::string> available() { return {"zlib"}; }

    const std::string& name() const { return name_; }
    int level() const { return level_; }

    // e.g. "zlib:6"; used in provenance blocks.
    std::string id() const { return name_ + ":" + std::to_string(level_); }

    // Size of the compressed empty input, recorded at construction as a
    // sanity constant (8 bytes for zlib at any level).
    std::size_t empty_input_size() const { return empty_input_size_; }

    // Deterministic; safe to call concurrently (the underlying streams are
    // per-thread).
    std::size_t compressed_size(std::string_view bytes) const {
        return detail::deflate_size(level_, bytes);
    }

  private:
    Compressor(std::string name, int level) : name_(std::move(name)), level_(level) {
        if (level_ < 1 || level_ > 9) {
            throw ConfigError("compressor level must be in [1, 9], got " + std::to_string(level_));
        }
        empty_input_size_ = compressed_size({});
    }

    std::string name_;
    int level_;
    std::size_t empty_input_size_ = 0;
};

}  // namespace progderiv
