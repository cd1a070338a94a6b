#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "progderiv/compress.hpp"
#include "progderiv/errors.hpp"
#include "progderiv/value.hpp"

namespace progderiv {

// Normalized compression distance over canonical bytes:
//
//     ncd(a, b) = (C(ab) - min(C(a), C(b))) / max(C(a), C(b))
//
// with two deviations from the textbook formula that turn approximate
// properties into exact, testable ones:
//   - byte-identical values short-circuit to exactly 0 (real compressors
//     give NCD(x,x) > 0, which would fake a behavioral change);
//   - the concatenation term is min(C(ab), C(ba)), which makes the result
//     exactly symmetric.
// The result is clamped below at 0; values slightly above 1 are reported raw
// since they reflect genuine compressor overhead.
inline double ncd(const Compressor& c, const Value& a, const Value& b) {
    const std::string xa = canonical_bytes(a);
    const std::string xb = canonical_bytes(b);
    if (xa == xb) return 0.0;
    const auto ca = static_cast<double>(c.compressed_size(xa));
    const auto cb = static_cast<double>(c.compressed_size(xb));
    const auto cab = static_cast<double>(c.compressed_size(xa + xb));
    const auto cba = static_cast<double>(c.compressed_size(xb + xa));
    const double joint = std::min(cab, cba);
    const double num = joint - std::min(ca, cb);
    const double den = std::max(ca, cb);
    return std::max(0.0, num / den);
}

// |a - b| for Real/Integer values.
inline double abs_diff(const Value& a, const Value& b) {
    if (!a.is_numeric() || !b.is_numeric()) {
        throw TypeError("abs_diff requires numeric values");
    }
    return std::abs(a.numeric() - b.numeric());
}

// L2 distance between equal-length sequences of Reals.
inline double euclidean(const Value& a, const Value& b) {
    if (a.kind() != ValueKind::Sequence || b.kind() != ValueKind::Sequence) {
        throw TypeError("euclidean requires sequences of reals");
    }
    const auto& xs = a.as_sequence();
    const auto& ys = b.as_sequence();
    if (xs.size() != ys.size()) {
        throw TypeError("euclidean requires equal-length sequences");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].kind() != ValueKind::Real || ys[i].kind() != ValueKind::Real) {
            throw TypeError("euclidean requires sequences of reals");
        }
        const double d = xs[i].as_real() - ys[i].as_real();
        sum += d * d;
    }
    return std::sqrt(sum);
}

enum class DistanceKind { Ncd, AbsDiff, Euclidean };

// A named, pure distance function over Values. Same pair in, same
// non-negative real out.
class DistanceFn {
  public:
    static DistanceFn make_ncd(Compressor c) {
        std::string name = "ncd[" + c.id() + "]";
        return DistanceFn(DistanceKind::Ncd, std::move(name), std::move(c));
    }

    static DistanceFn make_abs_diff() { return DistanceFn(DistanceKind::AbsDiff, "abs_diff", {}); }

    static DistanceFn make_euclidean() {
        return DistanceFn(DistanceKind::Euclidean, "euclidean", {});
    }

    // Lookup by CLI name: "ncd", "absdiff", "euclidean".
    static DistanceFn from_name(std::string_view name, const Compressor& c) {
        if (name == "ncd") return make_ncd(c);
        if (name == "absdiff" || name == "abs_diff") return make_abs_diff();
        if (name == "euclidean") return make_euclidean();
        throw ConfigError("unknown distance '" + std::string(name) +
                          "' (available: ncd, absdiff, euclidean)");
    }

    DistanceKind distance_kind() const { return kind_; }
    const std::string& name() const { return name_; }

    double operator()(const Value& a, const Value& b) const {
        switch (kind_) {
            case DistanceKind::Ncd:
                return ncd(*compressor_, a, b);
            case DistanceKind::AbsDiff:
                return abs_diff(a, b);
            case DistanceKind::Euclidean:
                return euclidean(a, b);
        }
        throw Error("unreachable");
    }

  private:
    DistanceFn(DistanceKind kind, std::string name, std::optional<Compressor> c)
        : kind_(kind), name_(std::move(name)), compressor_(std::move(c)) {}

    DistanceKind kind_;
    std::string name_;
    std::optional<Compressor> compressor_;
};

}  // namespace progderiv
