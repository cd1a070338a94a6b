#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "progderiv/errors.hpp"
#include "progderiv/explore.hpp"
#include "progderiv/value.hpp"
#include "progderiv/version.hpp"

namespace progderiv {

// File formats
// ------------
// Heatgrid CSV: a '#'-prefixed provenance block, then a header row with the
// x-centers, then one row per y-center (ascending). Quotients are written in
// shortest round-trip decimal form; undefined cells are the literal `NA`.
//
// Heatgrid PGM: plain P2, one pixel per cell, row 0 = smallest y. Quotients
// are min-max normalized over the defined cells to [0, 255] with darker =
// larger; undefined cells render as mid-gray 128. An all-equal grid renders
// white (255). Normalization bounds ride along in the comment header.
//
// Boundary-pair reports: JSON with a versioned schema, a provenance object
// sufficient to re-run the analysis, and one entry per returned pair.

struct ExportOptions {
    // Timestamps are excluded from golden-file comparisons via the CLI's
    // --no-timestamp; everything else is a pure function of the data.
    bool include_timestamp = true;
};

namespace detail {

inline std::string shortest(double v) {
    std::string s;
    append_shortest(s, v);
    return s;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_provenance_comments(std::ostream& os, const HeatGrid& g,
                                      const ExportOptions& opts) {
    os << "# progderiv-heatgrid 1\n";
    os << "# tool_version: " << g.prov.tool_version << "\n";
    os << "# sut: " << g.prov.sut_name << "\n";
    os << "# compressor: " << g.prov.compressor_name << "\n";
    os << "# level: " << g.prov.compressor_level << "\n";
    os << "# seed: " << g.prov.seed << "\n";
    os << "# neighbors: " << g.prov.neighbor_samples << "\n";
    os << "# radius: " << shortest(g.prov.neighbor_radius) << "\n";
    os << "# x_range: " << shortest(g.geom.x_lo) << " " << shortest(g.geom.x_hi) << "\n";
    os << "# y_range: " << shortest(g.geom.y_lo) << " " << shortest(g.geom.y_hi) << "\n";
    os << "# resolution: " << g.geom.resolution << "\n";
    if (opts.include_timestamp) os << "# timestamp: " << utc_timestamp() << "\n";
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    return os;
}

}  // namespace detail

inline void export_grid_csv(const HeatGrid& g, const std::filesystem::path& path,
                            const ExportOptions& opts = {}) {
    std::ofstream os = detail::open_out(path);
    detail::write_provenance_comments(os, g, opts);
    os << "y\\x";
    for (int i = 0; i < g.geom.resolution; ++i) {
        os << ',' << detail::shortest(g.geom.center_x(i));
    }
    os << '\n';
    for (int j = 0; j < g.geom.resolution; ++j) {
        os << detail::shortest(g.geom.center_y(j));
        for (int i = 0; i < g.geom.resolution; ++i) {
            const auto& q = g.cell(i, j).quotient;
            os << ',';
            if (q) {
                os << detail::shortest(*q);
            } else {
                os << "NA";
            }
        }
        os << '\n';
    }
    if (!os) throw Error("write to '" + path.string() + "' failed");
}

// Reads back a heatgrid CSV. Witness pairs are not part of the CSV, so the
// imported grid carries quotients, geometry, and provenance only.
inline HeatGrid import_grid_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path.string() + "' for reading");

    HeatGrid g;
    std::string line;
    auto fail = [&](const std::string& what) -> void {
        throw Error("malformed heatgrid CSV '" + path.string() + "': " + what);
    };

    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.starts_with("#")) {
            std::istringstream ls(line);
            std::string hash, key;
            ls >> hash >> key;
            if (key == "sut:") {
                ls >> g.prov.sut_name;
            } else if (key == "tool_version:") {
                ls >> g.prov.tool_version;
            } else if (key == "compressor:") {
                ls >> g.prov.compressor_name;
            } else if (key == "level:") {
                ls >> g.prov.compressor_level;
            } else if (key == "seed:") {
                ls >> g.prov.seed;
            } else if (key == "neighbors:") {
                ls >> g.prov.neighbor_samples;
            } else if (key == "radius:") {
                ls >> g.prov.neighbor_radius;
            } else if (key == "x_range:") {
                ls >> g.geom.x_lo >> g.geom.x_hi;
            } else if (key == "y_range:") {
                ls >> g.geom.y_lo >> g.geom.y_hi;
            } else if (key == "resolution:") {
                ls >> g.geom.resolution;
            }
            continue;
        }
        if (!have_header) {
            if (!line.starts_with("y\\x")) fail("missing header row");
            have_header = true;
            continue;
        }
        break;  // first data row already read into `line`
    }
    if (g.geom.resolution < 2) fail("missing or bad resolution");
    const int res = g.geom.resolution;
    g.cells.resize(std::size_t(res) * res);

    int j = 0;
    do {
        if (line.empty()) continue;
        if (j >= res) fail("too many rows");
        std::size_t pos = line.find(',');
        if (pos == std::string::npos) fail("row without cells");
        int i = 0;
        while (pos != std::string::npos) {
            const std::size_t start = pos + 1;
            pos = line.find(',', start);
            const std::string_view tok =
                std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos
                                                                              : pos - start);
            if (i >= res) fail("too many cells in row");
            if (tok != "NA") {
                double v = 0;
                auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc() || p != tok.data() + tok.size()) fail("bad cell value");
                g.cell(i, j).quotient = v;
            }
            ++i;
        }
        if (i != res) fail("short row");
        ++j;
    } while (std::getline(is, line));
    if (j != res) fail("missing rows");
    return g;
}

inline void export_grid_pgm(const HeatGrid& g, const std::filesystem::path& path,
                            const ExportOptions& opts = {}) {
    std::ofstream os = detail::open_out(path);
    os << "P2\n";
    detail::write_provenance_comments(os, g, opts);

    double qmin = 0, qmax = 0;
    bool any = false;
    for (const auto& c : g.cells) {
        if (!c.quotient) continue;
        if (!any) {
            qmin = qmax = *c.quotient;
            any = true;
        } else {
            qmin = std::min(qmin, *c.quotient);
            qmax = std::max(qmax, *c.quotient);
        }
    }
    if (any) {
        os << "# qmin: " << detail::shortest(qmin) << "\n";
        os << "# qmax: " << detail::shortest(qmax) << "\n";
    } else {
        os << "# warning: no defined cells\n";
    }
    os << g.geom.resolution << ' ' << g.geom.resolution << "\n255\n";

    for (int j = 0; j < g.geom.resolution; ++j) {
        for (int i = 0; i < g.geom.resolution; ++i) {
            int pixel = 128;  // undefined
            const auto& q = g.cell(i, j).quotient;
            if (q) {
                if (qmax > qmin) {
                    const double t = (*q - qmin) / (qmax - qmin);
                    pixel = 255 - static_cast<int>(std::lround(255.0 * t));
                } else {
                    pixel = 255;  // all defined cells equal
                }
            }
            os << pixel << (i + 1 == g.geom.resolution ? '\n' : ' ');
        }
    }
    if (!os) throw Error("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// Boundary-pair JSON report
// ---------------------------------------------------------------------------

struct SearchReportProvenance {
    std::string sut_name;
    std::string compressor_name;
    int compressor_level = 0;
    std::uint64_t base_seed = 0;
    int runs_requested = 0;
    SearchConfig config;
};

inline nlohmann::json pairs_report_json(const std::vector<BoundaryPair>& pairs,
                                        const SearchReportProvenance& prov,
                                        const ExportOptions& opts = {}) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    nlohmann::json p;
    p["tool_version"] = kToolVersion;
    p["sut"] = prov.sut_name;
    p["compressor"] = prov.compressor_name;
    p["level"] = prov.compressor_level;
    p["seed"] = prov.base_seed;
    p["runs_requested"] = prov.runs_requested;
    p["runs_succeeded"] = pairs.size();
    p["config"] = {{"budget", prov.config.budget},
                   {"initial_step", prov.config.initial_step},
                   {"step_decay", prov.config.step_decay},
                   {"step_floor", prov.config.step_floor},
                   {"shrink_weight", prov.config.shrink_weight},
                   {"dout_floor", prov.config.dout_floor}};
    if (opts.include_timestamp) p["timestamp"] = detail::utc_timestamp();
    doc["provenance"] = p;

    nlohmann::json arr = nlohmann::json::array();
    for (const auto& pair : pairs) {
        nlohmann::json e;
        e["input_a"] = canonical_bytes(pair.input_a);
        e["input_b"] = canonical_bytes(pair.input_b);
        e["output_a"] = canonical_bytes(pair.output_a);
        e["output_b"] = canonical_bytes(pair.output_b);
        e["d_in"] = pair.d_in;
        e["d_out"] = pair.d_out;
        e["quotient"] = pair.quotient;
        e["midpoint"] = pair.midpoint;
        e["euclidean_d_in"] = pair.euclidean_d_in;
        e["major_straddle"] = pair.major_straddle;
        e["trace"] = {{"evaluations", pair.trace.evaluations}, {"seed", pair.trace.seed}};
        arr.push_back(std::move(e));
    }
    doc["pairs"] = std::move(arr);
    return doc;
}

inline void export_pairs_json(const std::vector<BoundaryPair>& pairs,
                              const SearchReportProvenance& prov,
                              const std::filesystem::path& path, const ExportOptions& opts = {}) {
    std::ofstream os = detail::open_out(path);
    os << pairs_report_json(pairs, prov, opts).dump(2) << '\n';
    if (!os) throw Error("write to '" + path.string() + "' failed");
}

// Diff summary as JSON (used by the CLI and handy for scripting).
inline nlohmann::json diff_report_json(const HeatGridDiff& d) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["resolution"] = d.resolution;
    doc["status_mismatches"] = d.status_mismatches;
    doc["max_abs_diff"] = d.max_abs_diff;
    doc["mean_abs_diff"] = d.mean_abs_diff;
    doc["is_zero"] = d.is_zero();
    return doc;
}

}  // namespace progderiv
