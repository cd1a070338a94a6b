#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "progderiv/rng.hpp"
#include "progderiv/value.hpp"

namespace testsupport {

using progderiv::Rng;
using progderiv::Value;
using progderiv::ValueKind;

inline std::string random_text(Rng& rng, std::size_t max_len = 20) {
    static constexpr char alphabet[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,:;[]{}";
    const std::size_t len = rng() % (max_len + 1);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        s += alphabet[rng() % (sizeof(alphabet) - 1)];
    }
    return s;
}

inline double random_real(Rng& rng) {
    // Mixed magnitudes, always finite.
    switch (rng() % 4) {
        case 0:
            return progderiv::uniform_in(rng, -10.0, 10.0);
        case 1:
            return progderiv::uniform_in(rng, -1e9, 1e9);
        case 2:
            return static_cast<double>(static_cast<std::int32_t>(rng()));
        default:
            return progderiv::uniform_in(rng, -1.0, 1.0) * 1e-6;
    }
}

inline Value random_value(Rng& rng, int depth = 3) {
    const int n_kinds = depth > 0 ? 7 : 5;  // composites only above the floor
    switch (rng() % n_kinds) {
        case 0:
            return Value::real(random_real(rng));
        case 1:
            return Value::integer(static_cast<std::int64_t>(rng()));
        case 2:
            return Value::text(random_text(rng));
        case 3: {
            Value::Bytes b(rng() % 16);
            for (auto& byte : b) byte = static_cast<std::uint8_t>(rng());
            return Value::bytes(std::move(b));
        }
        case 4:
            return Value::error(random_text(rng, 8), random_text(rng, 16));
        case 5: {
            Value::Sequence xs;
            const std::size_t n = rng() % 4;
            for (std::size_t i = 0; i < n; ++i) xs.push_back(random_value(rng, depth - 1));
            return Value::sequence(std::move(xs));
        }
        default: {
            Value::Record r;
            const std::size_t n = rng() % 4;
            for (std::size_t i = 0; i < n; ++i) {
                r.emplace_back("k" + std::to_string(rng() % 97) + random_text(rng, 4),
                               random_value(rng, depth - 1));
            }
            // Duplicate keys are possible by chance; drop them.
            std::sort(r.begin(), r.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            r.erase(std::unique(r.begin(), r.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    r.end());
            return Value::record(std::move(r));
        }
    }
}

// Independent structural deep-equality; the oracle against which the
// canonical-bytes equality is checked. Reals compare by bit pattern.
inline bool structural_equal(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ValueKind::Real:
            return std::bit_cast<std::uint64_t>(a.as_real()) ==
                   std::bit_cast<std::uint64_t>(b.as_real());
        case ValueKind::Integer:
            return a.as_integer() == b.as_integer();
        case ValueKind::Text:
            return a.as_text() == b.as_text();
        case ValueKind::Bytes:
            return a.as_bytes() == b.as_bytes();
        case ValueKind::Sequence: {
            const auto& xs = a.as_sequence();
            const auto& ys = b.as_sequence();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!structural_equal(xs[i], ys[i])) return false;
            }
            return true;
        }
        case ValueKind::Record: {
            const auto& xs = a.as_record();
            const auto& ys = b.as_record();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (xs[i].first != ys[i].first) return false;
                if (!structural_equal(xs[i].second, ys[i].second)) return false;
            }
            return true;
        }
        case ValueKind::Error:
            return a.as_error().kind == b.as_error().kind &&
                   a.as_error().message == b.as_error().message;
    }
    return false;
}

inline Value point2(double x, double y) {
    return Value::sequence({Value::real(x), Value::real(y)});
}

}  // namespace testsupport
