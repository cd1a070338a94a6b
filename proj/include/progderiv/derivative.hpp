#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "progderiv/compress.hpp"
#include "progderiv/distance.hpp"
#include "progderiv/errors.hpp"
#include "progderiv/rng.hpp"
#include "progderiv/sut.hpp"
#include "progderiv/value.hpp"

namespace progderiv {

// One difference-quotient evaluation. The quotient is the ratio of output
// distance to input distance for a pair of inputs:
//
//     quotient = d_out(P(a), P(b)) / d_in(a, b)
//
// It is defined iff d_in > 0; a zero input distance (in particular a == b)
// yields the undefined flag rather than an epsilon-clamped huge value, since
// clamping would invent boundaries where the distance cannot tell the inputs
// apart. Quotients are magnitudes; directionality is deliberately dropped.
struct QuotientResult {
    Value input_a;
    Value input_b;
    Value output_a;
    Value output_b;
    double d_in = 0.0;
    double d_out = 0.0;
    std::optional<double> quotient;
    std::string d_in_name;
    std::string d_out_name;

    bool defined() const { return quotient.has_value(); }
};

// Sampling scheme for approximating the minimal-distance neighbor: n points
// drawn uniformly from the axis-aligned hypercube of half-width `radius`
// around the anchor, seeded.
struct NeighborhoodSpec {
    int samples = 32;
    double radius = 0.05;
    std::uint64_t seed = 0;

    void validate() const {
        if (samples < 1) throw ConfigError("neighborhood sample count must be >= 1");
        if (!(radius > 0.0)) throw ConfigError("neighborhood radius must be > 0");
    }
};

namespace detail {

// Core of pdq with the first output precomputed. Deterministic SUTs are a
// model invariant, so reusing P(a) across many pairs sharing `a` changes
// nothing but the invocation count.
inline QuotientResult pdq_with_output(const SutAdapter& sut, const DistanceFn& d_out,
                                      const DistanceFn& d_in, const Value& a,
                                      const Value& out_a, const Value& b) {
    Value out_b = sut.invoke_value(b);
    const double din = d_in(a, b);
    const double dout = d_out(out_a, out_b);
    std::optional<double> quotient;
    if (din > 0.0) quotient = dout / din;
    return QuotientResult{a,        b,    out_a,       std::move(out_b), din,
                          dout,     quotient,          d_in.name(),      d_out.name()};
}

}  // namespace detail

// Program difference quotient for an arbitrary input pair.
inline QuotientResult pdq(const SutAdapter& sut, const DistanceFn& d_out,
                          const DistanceFn& d_in, const Value& a, const Value& b) {
    return detail::pdq_with_output(sut, d_out, d_in, a, sut.invoke_value(a), b);
}

// Compression difference quotient: pdq with NCD on both sides.
inline QuotientResult cdq(const SutAdapter& sut, const Compressor& c, const Value& a,
                          const Value& b) {
    const DistanceFn n = DistanceFn::make_ncd(c);
    return detail::pdq_with_output(sut, n, n, a, sut.invoke_value(a), b);
}

namespace detail {

inline std::vector<double> numeric_components(const Value& v) {
    if (v.kind() == ValueKind::Real) return {v.as_real()};
    if (v.kind() == ValueKind::Sequence) {
        std::vector<double> out;
        out.reserve(v.as_sequence().size());
        for (const Value& x : v.as_sequence()) {
            if (x.kind() != ValueKind::Real) {
                throw TypeError("neighbor generation needs a Real or Sequence-of-Real anchor");
            }
            out.push_back(x.as_real());
        }
        return out;
    }
    throw TypeError("neighbor generation needs a Real or Sequence-of-Real anchor");
}

inline Value value_like(const Value& shape, const std::vector<double>& comps) {
    if (shape.kind() == ValueKind::Real) return Value::real(comps[0]);
    Value::Sequence xs;
    xs.reserve(comps.size());
    for (double c : comps) xs.push_back(Value::real(c));
    return Value::sequence(std::move(xs));
}

}  // namespace detail

// Approximates the program derivative at `a`: samples neighbors within the
// given radius, evaluates the quotient for each, and returns the maximal
// defined one (ties broken by smaller input distance, then by generation
// order). Throws NoNeighborError when every sample is degenerate — equal to
// `a` after rounding, or with an undefined quotient.
inline QuotientResult pd_approx(const SutAdapter& sut, const DistanceFn& d_out,
                                const DistanceFn& d_in, const Value& a,
                                const NeighborhoodSpec& nbhd) {
    nbhd.validate();
    if (!sut.all_domains_numeric()) {
        throw TypeError("pd_approx requires a SUT with numeric input domains");
    }
    const std::vector<double> center = detail::numeric_components(a);
    const Value out_a = sut.invoke_value(a);

    Rng rng(nbhd.seed);
    std::optional<QuotientResult> best;
    for (int k = 0; k < nbhd.samples; ++k) {
        std::vector<double> pt(center.size());
        for (std::size_t d = 0; d < center.size(); ++d) {
            const double offset = (2.0 * uniform_unit(rng) - 1.0) * nbhd.radius;
            pt[d] = center[d] + offset;
        }
        const Value b = detail::value_like(a, pt);
        if (values_equal(a, b)) continue;
        QuotientResult r = detail::pdq_with_output(sut, d_out, d_in, a, out_a, b);
        if (!r.defined()) continue;
        if (!best || *r.quotient > *best->quotient ||
            (*r.quotient == *best->quotient && r.d_in < best->d_in)) {
            best = std::move(r);
        }
    }
    if (!best) {
        throw NoNeighborError("no usable neighbor around " + canonical_bytes(a));
    }
    return *best;
}

inline QuotientResult pd_approx_cdq(const SutAdapter& sut, const Compressor& c, const Value& a,
                                    const NeighborhoodSpec& nbhd) {
    const DistanceFn n = DistanceFn::make_ncd(c);
    return pd_approx(sut, n, n, a, nbhd);
}

}  // namespace progderiv
