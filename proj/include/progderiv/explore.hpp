#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "progderiv/compress.hpp"
#include "progderiv/derivative.hpp"
#include "progderiv/errors.hpp"
#include "progderiv/rng.hpp"
#include "progderiv/sut.hpp"
#include "progderiv/value.hpp"
#include "progderiv/version.hpp"

namespace progderiv {

// ---------------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------------

struct GridScanConfig {
    double x_lo = -2.0, x_hi = 8.0;
    double y_lo = -2.0, y_hi = 8.0;
    int resolution = 100;  // cells per axis
    int neighbor_samples = 32;
    // Default: half the smaller cell dimension.
    std::optional<double> neighbor_radius;
    Compressor compressor = Compressor::zlib();
    std::uint64_t seed = kDefaultSeed;
    int jobs = 1;

    void validate() const {
        if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw ConfigError("grid ranges must be nonempty");
        if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
        if (neighbor_samples < 1) throw ConfigError("neighbor sample count must be >= 1");
        if (neighbor_radius && !(*neighbor_radius > 0.0)) {
            throw ConfigError("neighbor radius must be > 0");
        }
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
    }

    double cell_width() const { return (x_hi - x_lo) / resolution; }
    double cell_height() const { return (y_hi - y_lo) / resolution; }
    double effective_radius() const {
        return neighbor_radius.value_or(0.5 * std::min(cell_width(), cell_height()));
    }
};

struct GridGeometry {
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    int resolution = 0;

    bool operator==(const GridGeometry&) const = default;

    double center_x(int i) const { return x_lo + (i + 0.5) * (x_hi - x_lo) / resolution; }
    double center_y(int j) const { return y_lo + (j + 0.5) * (y_hi - y_lo) / resolution; }
};

struct GridProvenance {
    std::string tool_version = kToolVersion;
    std::string sut_name;
    std::string compressor_name;
    int compressor_level = 0;
    std::uint64_t seed = 0;
    int neighbor_samples = 0;
    double neighbor_radius = 0;

    // Everything that must match for two grids to be comparable cell-wise.
    bool compatible_with(const GridProvenance& o) const {
        return compressor_name == o.compressor_name && compressor_level == o.compressor_level &&
               seed == o.seed && neighbor_samples == o.neighbor_samples &&
               neighbor_radius == o.neighbor_radius;
    }
};

struct HeatCell {
    std::optional<double> quotient;
    // Argmax witness: (cell-center input, best neighbor input). Absent for
    // undefined cells and for grids re-imported from CSV.
    std::optional<std::pair<Value, Value>> witness;
};

// A 2D field of maximal difference quotients over a rectangular input region.
// Cells are stored row-major: index j * resolution + i, where i indexes x
// (ascending) and j indexes y (ascending).
struct HeatGrid {
    GridGeometry geom;
    GridProvenance prov;
    std::vector<HeatCell> cells;

    const HeatCell& cell(int i, int j) const { return cells[std::size_t(j) * geom.resolution + i]; }
    HeatCell& cell(int i, int j) { return cells[std::size_t(j) * geom.resolution + i]; }

    std::size_t defined_count() const {
        std::size_t n = 0;
        for (const auto& c : cells) n += c.quotient.has_value();
        return n;
    }
};

// Scans the grid of cell centers; for each center, samples surrounding
// points and keeps the neighbor with the maximal compression difference
// quotient. Cells where every neighbor is degenerate are recorded as
// undefined, never as zero. Per-cell seeds are derived from the global seed
// and the cell center, so results are independent of evaluation order and
// the scan may run on several threads.
inline HeatGrid grid_scan(const SutAdapter& sut, const GridScanConfig& cfg) {
    cfg.validate();
    if (sut.arity() != 2 || !sut.all_domains_numeric()) {
        throw ConfigError("grid_scan requires a SUT with two numeric inputs");
    }

    HeatGrid grid;
    grid.geom = GridGeometry{cfg.x_lo, cfg.x_hi, cfg.y_lo, cfg.y_hi, cfg.resolution};
    grid.prov = GridProvenance{kToolVersion,
                               sut.name(),
                               cfg.compressor.name(),
                               cfg.compressor.level(),
                               cfg.seed,
                               cfg.neighbor_samples,
                               cfg.effective_radius()};
    const int res = cfg.resolution;
    grid.cells.resize(std::size_t(res) * res);

    const DistanceFn nc = DistanceFn::make_ncd(cfg.compressor);
    const double radius = cfg.effective_radius();

    auto scan_cell = [&](int i, int j) {
        const double cx = grid.geom.center_x(i);
        const double cy = grid.geom.center_y(j);
        const Value center =
            Value::sequence({Value::real(cx), Value::real(cy)});
        NeighborhoodSpec nbhd{cfg.neighbor_samples, radius, cell_seed(cfg.seed, cx, cy)};
        HeatCell& cell = grid.cell(i, j);
        try {
            QuotientResult r = pd_approx(sut, nc, nc, center, nbhd);
            cell.quotient = r.quotient;
            cell.witness = std::make_pair(std::move(r.input_a), std::move(r.input_b));
        } catch (const NoNeighborError&) {
            // undefined cell
        }
    };

    const int jobs =
        sut.concurrency() == ConcurrencyMode::SerialOnly ? 1 : std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int j = 0; j < res; ++j) {
            for (int i = 0; i < res; ++i) scan_cell(i, j);
        }
    } else {
        std::atomic<int> next{0};
        const int total = res * res;
        auto worker = [&] {
            for (;;) {
                const int idx = next.fetch_add(1);
                if (idx >= total) return;
                scan_cell(idx % res, idx / res);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Grid differencing
// ---------------------------------------------------------------------------

struct HeatGridDiff {
    // Per cell: |q1 - q2| when both defined, 0 when both undefined, absent
    // when the defined/undefined status differs.
    std::vector<std::optional<double>> cell_abs_diff;
    int resolution = 0;
    std::size_t status_mismatches = 0;
    double max_abs_diff = 0.0;
    double mean_abs_diff = 0.0;

    bool is_zero() const { return status_mismatches == 0 && max_abs_diff == 0.0; }
};

// Cell-wise comparison of two grids with identical geometry and compatible
// settings (same compressor, level, seed, and neighborhood). Symmetric; zero
// iff the grids are identical.
inline HeatGridDiff heatgrid_diff(const HeatGrid& g1, const HeatGrid& g2) {
    if (!(g1.geom == g2.geom)) {
        throw GeometryError("heatgrid_diff: grid geometries do not match");
    }
    if (!g1.prov.compatible_with(g2.prov)) {
        throw GeometryError("heatgrid_diff: grid settings are not comparable");
    }
    HeatGridDiff diff;
    diff.resolution = g1.geom.resolution;
    diff.cell_abs_diff.resize(g1.cells.size());
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t k = 0; k < g1.cells.size(); ++k) {
        const auto& q1 = g1.cells[k].quotient;
        const auto& q2 = g2.cells[k].quotient;
        if (q1.has_value() != q2.has_value()) {
            ++diff.status_mismatches;
            continue;
        }
        const double d = q1 ? std::abs(*q1 - *q2) : 0.0;
        diff.cell_abs_diff[k] = d;
        diff.max_abs_diff = std::max(diff.max_abs_diff, d);
        sum += d;
        ++counted;
    }
    diff.mean_abs_diff = counted ? sum / static_cast<double>(counted) : 0.0;
    return diff;
}

// ---------------------------------------------------------------------------
// Boundary search
// ---------------------------------------------------------------------------

struct SearchConfig {
    int budget = 2000;  // candidate pairs evaluated (2 SUT calls each)
    double initial_step = 0.5;
    double step_decay = 0.6;
    double step_floor = 1e-4;
    // Fraction by which the pair offset contracts per accepted candidate
    // once a high-contrast boundary is bracketed.
    double shrink_weight = 0.8;
    // Output-distance floor separating "major" boundaries (validity and
    // constraint lines) from rounding micro-boundaries in classification.
    double dout_floor = 0.2;
    // Output distance at which the incumbent counts as bracketing a
    // structurally different output, which arms the shrink operator. NCD
    // between short same-type outputs rarely exceeds ~0.7; type changes
    // (number vs error) land above it.
    double squeeze_dout_floor = 0.75;
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        if (budget < 1) throw ConfigError("search budget must be >= 1");
        if (!(initial_step > 0.0)) throw ConfigError("initial step must be > 0");
        if (!(step_decay > 0.0) || step_decay > 1.0) {
            throw ConfigError("step decay must be in (0, 1]");
        }
        if (!(step_floor > 0.0)) throw ConfigError("step floor must be > 0");
        if (shrink_weight < 0.0 || shrink_weight >= 1.0) {
            throw ConfigError("shrink weight must be in [0, 1)");
        }
        if (!(dout_floor >= 0.0)) throw ConfigError("output-distance floor must be >= 0");
        if (!(squeeze_dout_floor >= 0.0)) throw ConfigError("squeeze floor must be >= 0");
    }
};

struct SearchTrace {
    int evaluations = 0;
    std::uint64_t seed = 0;
    // Incumbent fitness after each evaluation; -inf entries mean "no defined
    // quotient yet". Not exported; kept for monotonicity checks.
    std::vector<double> incumbent_fitness;
};

// A boundary witness: two nearby inputs whose outputs differ strongly.
struct BoundaryPair {
    Value input_a;
    Value input_b;
    Value output_a;
    Value output_b;
    double d_in = 0.0;
    double d_out = 0.0;
    double quotient = 0.0;
    std::vector<double> midpoint;
    double euclidean_d_in = 0.0;
    // Exactly one side errored and the output distance clears the floor.
    bool major_straddle = false;
    SearchTrace trace;
};

namespace detail {

inline double clamp_to(double v, const SlotDomain& d) { return std::clamp(v, d.lo, d.hi); }

inline bool is_major_straddle(const Value& out_a, const Value& out_b, double d_out,
                              double floor) {
    return (out_a.is_error() != out_b.is_error()) && d_out >= floor;
}

}  // namespace detail

// (1+1) evolution strategy over input pairs (a, b), maximizing the
// compression difference quotient. The pair is mutated as midpoint plus
// offset: the midpoint explores at the scheduled step scale, the offset
// direction mutates relative to its own length. Once the incumbent pair
// brackets a structurally different output (d_out >= squeeze_dout_floor),
// the b-toward-a shrink operator arms: candidate offsets contract by the
// shrink weight and every strict improvement decays the step scale
// (floored), squeezing d_in while the quotient stays high. Candidates with
// an undefined quotient get fitness -inf; acceptance is on fitness >=
// incumbent, so the incumbent fitness sequence never decreases.
//
// NCD between nearby numeric inputs is nearly independent of their
// euclidean distance (digit tails dominate), so the fitness alone cannot
// pull d_in down; the scheduled contraction above is what does it.
//
// Throws NoBoundaryFoundError when no evaluated pair achieved a positive
// quotient — e.g. for a constant program, where nothing straddles anything.
inline BoundaryPair boundary_search(const SutAdapter& sut, const SearchConfig& cfg,
                                    const Compressor& c) {
    cfg.validate();
    if (!sut.all_domains_numeric()) {
        throw TypeError("boundary_search requires a SUT with numeric input domains");
    }
    const auto& domains = sut.domains();
    const std::size_t dims = domains.size();
    Rng rng(cfg.seed);

    auto random_point = [&] {
        std::vector<double> p(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            p[d] = uniform_in(rng, domains[d].lo, domains[d].hi);
        }
        return p;
    };
    auto as_value = [&](const std::vector<double>& p) {
        if (dims == 1) return Value::real(p[0]);
        Value::Sequence xs;
        xs.reserve(dims);
        for (double v : p) xs.push_back(Value::real(v));
        return Value::sequence(std::move(xs));
    };
    auto norm = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    auto fitness = [](const QuotientResult& r) {
        return r.defined() ? *r.quotient : kNegInf;
    };

    std::vector<double> a = random_point();
    std::vector<double> b = random_point();
    QuotientResult incumbent = cdq(sut, c, as_value(a), as_value(b));
    double f = fitness(incumbent);
    double step = cfg.initial_step;

    SearchTrace trace;
    trace.seed = cfg.seed;
    trace.evaluations = 1;
    trace.incumbent_fitness.push_back(f);

    std::vector<double> mid(dims), offset(dims), cand_mid(dims), cand_off(dims);
    std::vector<double> ca(dims), cb(dims);
    for (int eval = 2; eval <= cfg.budget; ++eval) {
        for (std::size_t d = 0; d < dims; ++d) {
            mid[d] = 0.5 * (a[d] + b[d]);
            offset[d] = b[d] - a[d];
        }
        const double olen = norm(offset);
        const bool bracketed = incumbent.d_out >= cfg.squeeze_dout_floor;
        const double w = bracketed ? cfg.shrink_weight : 0.0;
        const double mid_scale = bracketed ? 0.35 * olen : std::max(step, 0.35 * olen);
        const double off_scale = std::max(0.5 * olen, 0.3 * step);
        for (std::size_t d = 0; d < dims; ++d) {
            cand_mid[d] = mid[d] + mid_scale * gaussian(rng);
            cand_off[d] = (1.0 - w) * (offset[d] + off_scale * gaussian(rng));
        }
        const double clen = norm(cand_off);
        if (clen > 0.0 && clen < cfg.step_floor) {
            for (double& x : cand_off) x *= cfg.step_floor / clen;
        }
        for (std::size_t d = 0; d < dims; ++d) {
            ca[d] = detail::clamp_to(cand_mid[d] - 0.5 * cand_off[d], domains[d]);
            cb[d] = detail::clamp_to(cand_mid[d] + 0.5 * cand_off[d], domains[d]);
        }
        QuotientResult r = cdq(sut, c, as_value(ca), as_value(cb));
        const double fr = fitness(r);
        if (fr >= f) {
            const bool improved = fr > f;
            a = ca;
            b = cb;
            incumbent = std::move(r);
            f = fr;
            if (improved && incumbent.d_out >= cfg.squeeze_dout_floor) {
                step = std::max(cfg.step_floor, step * cfg.step_decay);
            }
        }
        trace.evaluations = eval;
        trace.incumbent_fitness.push_back(f);
    }

    if (!(f > 0.0)) {
        throw NoBoundaryFoundError("no pair with a positive quotient within budget " +
                                   std::to_string(cfg.budget));
    }

    std::vector<double> midpoint(dims);
    double sq = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        midpoint[d] = 0.5 * (a[d] + b[d]);
        sq += (a[d] - b[d]) * (a[d] - b[d]);
    }
    const bool straddle = detail::is_major_straddle(incumbent.output_a, incumbent.output_b,
                                                    incumbent.d_out, cfg.dout_floor);
    return BoundaryPair{std::move(incumbent.input_a),
                        std::move(incumbent.input_b),
                        std::move(incumbent.output_a),
                        std::move(incumbent.output_b),
                        incumbent.d_in,
                        incumbent.d_out,
                        *incumbent.quotient,
                        std::move(midpoint),
                        std::sqrt(sq),
                        straddle,
                        std::move(trace)};
}

// Runs `count` independent searches with per-run seeds derived from the base
// seed; failed runs (no boundary found) are skipped.
inline std::vector<BoundaryPair> boundary_search_runs(const SutAdapter& sut,
                                                      const SearchConfig& base, int count,
                                                      const Compressor& c) {
    std::vector<BoundaryPair> out;
    for (int k = 0; k < count; ++k) {
        SearchConfig cfg = base;
        cfg.seed = mix_seed(base.seed, static_cast<std::uint64_t>(k));
        try {
            out.push_back(boundary_search(sut, cfg, c));
        } catch (const NoBoundaryFoundError&) {
            // skipped; the caller decides whether zero successes is an error
        }
    }
    return out;
}

}  // namespace progderiv
