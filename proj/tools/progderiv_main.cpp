// progderiv - black-box boundary analysis via compression-based program
// difference quotients.
//
// Exit codes: 0 success; 1 usage or configuration error; 2 SUT/adapter or
// I/O failure; 3 analysis found nothing (e.g. no boundary within budget).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "progderiv/progderiv.hpp"

namespace fs = std::filesystem;
using namespace progderiv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;
constexpr int kExitNothingFound = 3;

struct CommonOpts {
    std::string compressor = "zlib";
    int level = Compressor::kDefaultLevel;
    std::string seed_text = std::to_string(kDefaultSeed);
    int jobs = 1;
    bool no_timestamp = false;

    Compressor make_compressor() const { return Compressor::from_name(compressor, level); }

    std::uint64_t seed() const {
        if (seed_text == "random") {
            std::random_device rd;
            return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        }
        try {
            std::size_t used = 0;
            const std::uint64_t s = std::stoull(seed_text, &used);
            if (used != seed_text.size()) throw std::invalid_argument(seed_text);
            return s;
        } catch (const std::exception&) {
            throw ConfigError("--seed expects an unsigned integer or 'random'");
        }
    }

    ExportOptions export_opts() const { return ExportOptions{!no_timestamp}; }
};

struct SutOpts {
    std::string builtin;
    std::string command;
    int arity = 2;
    int timeout_ms = 5000;
    std::string decode = "canonical";
    double domain_lo = -2.0;
    double domain_hi = 8.0;

    SutAdapter make() const {
        if (!builtin.empty() && !command.empty()) {
            throw ConfigError("--sut and --sut-cmd are mutually exclusive");
        }
        if (!builtin.empty()) return make_builtin_sut(builtin);
        if (command.empty()) throw ConfigError("select a SUT with --sut or --sut-cmd");

        // --sut-cmd "PATH [ARG...]" split on spaces (no quoting support)
        std::vector<std::string> parts;
        std::istringstream is(command);
        for (std::string tok; is >> tok;) parts.push_back(tok);
        if (parts.empty()) throw ConfigError("--sut-cmd is empty");
        SubprocessSpec spec;
        spec.executable = parts[0];
        spec.args.assign(parts.begin() + 1, parts.end());
        spec.timeout_ms = timeout_ms;
        if (decode == "canonical") {
            spec.decode = OutputDecode::Canonical;
        } else if (decode == "auto") {
            spec.decode = OutputDecode::Auto;
        } else {
            throw ConfigError("--decode must be 'auto' or 'canonical'");
        }
        std::vector<SlotDomain> domains(static_cast<std::size_t>(arity),
                                        SlotDomain::numeric(domain_lo, domain_hi));
        return make_subprocess_sut(fs::path(parts[0]).filename().string(), spec,
                                   std::move(domains));
    }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--compressor", c.compressor, "Compressor backend (zlib)")
        ->capture_default_str();
    cmd->add_option("--level", c.level, "Compressor effort level 1-9")
        ->envname("PROGDERIV_LEVEL")
        ->capture_default_str();
    cmd->add_option("--seed", c.seed_text, "Seed (unsigned integer, or 'random')")
        ->capture_default_str();
    cmd->add_option("--jobs", c.jobs, "Worker threads for grid scans")->capture_default_str();
    cmd->add_flag("--no-timestamp", c.no_timestamp,
                  "Omit timestamps from outputs (deterministic artifacts)");
}

void add_sut(CLI::App* cmd, SutOpts& s) {
    cmd->add_option("--sut", s.builtin, "Builtin SUT: sum1, sum2, const0");
    cmd->add_option("--sut-cmd", s.command,
                    "External SUT: executable and arguments, space-separated");
    cmd->add_option("--sut-arity", s.arity, "Input arity of an external SUT")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", s.timeout_ms, "Per-invocation timeout for external SUTs")
        ->capture_default_str();
    cmd->add_option("--decode", s.decode,
                    "External SUT output decoding: canonical or auto")
        ->capture_default_str();
    cmd->add_option("--domain-lo", s.domain_lo, "Lower bound of each numeric input slot")
        ->capture_default_str();
    cmd->add_option("--domain-hi", s.domain_hi, "Upper bound of each numeric input slot")
        ->capture_default_str();
}

Value parse_point_arg(const std::string& text) {
    // comma-separated plain numbers: "2.9,3.1" or a single "2.9"
    std::vector<Value> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string tok =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        double v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
            throw ConfigError("cannot parse number '" + tok + "' in point '" + text + "'");
        }
        parts.push_back(Value::real(v));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (parts.empty()) throw ConfigError("empty point argument");
    if (parts.size() == 1) return parts[0];
    return Value::sequence(std::move(parts));
}

std::string read_file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw ConfigError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Analysis runs require deterministic programs; probe once at the domain
// midpoint before burning the real budget.
void require_deterministic(const SutAdapter& sut) {
    std::vector<Value> probe;
    probe.reserve(sut.domains().size());
    for (const SlotDomain& d : sut.domains()) {
        const double mid = d.kind == SlotDomain::Kind::Numeric ? 0.5 * (d.lo + d.hi) : 0.0;
        probe.push_back(Value::real(mid));
    }
    if (!sut.self_check(probe)) {
        throw AdapterError("SUT '" + sut.name() + "' failed the determinism self-check");
    }
}

// ---------------------------------------------------------------------------
// Subcommand payloads
// ---------------------------------------------------------------------------

int cmd_ncd(const CommonOpts& common, const std::string& file_a, const std::string& file_b) {
    const Compressor c = common.make_compressor();
    const std::string a = read_file_bytes(file_a);
    const std::string b = read_file_bytes(file_b);
    const Value va = Value::bytes(Value::Bytes(a.begin(), a.end()));
    const Value vb = Value::bytes(Value::Bytes(b.begin(), b.end()));
    const double v = ncd(c, va, vb);
    std::string line;
    detail::append_shortest(line, v);
    std::cout << line << "\n";
    std::cout << "compressor: " << c.name() << " level " << c.level() << "\n";
    return kExitOk;
}

int cmd_pdq(const CommonOpts& common, const SutOpts& sut_opts, const std::string& a_text,
            const std::string& b_text, const std::string& d_in_name,
            const std::string& d_out_name) {
    const Compressor c = common.make_compressor();
    const SutAdapter sut = sut_opts.make();
    const DistanceFn d_in = DistanceFn::from_name(d_in_name, c);
    const DistanceFn d_out = DistanceFn::from_name(d_out_name, c);
    const Value a = parse_point_arg(a_text);
    const Value b = parse_point_arg(b_text);
    const QuotientResult r = pdq(sut, d_out, d_in, a, b);
    std::cout << "input_a:  " << canonical_bytes(r.input_a) << "\n";
    std::cout << "input_b:  " << canonical_bytes(r.input_b) << "\n";
    std::cout << "output_a: " << canonical_bytes(r.output_a) << "\n";
    std::cout << "output_b: " << canonical_bytes(r.output_b) << "\n";
    std::cout << "d_in:     " << detail::shortest(r.d_in) << "  (" << r.d_in_name << ")\n";
    std::cout << "d_out:    " << detail::shortest(r.d_out) << "  (" << r.d_out_name << ")\n";
    if (r.defined()) {
        std::cout << "quotient: " << detail::shortest(*r.quotient) << "\n";
    } else {
        std::cout << "quotient: undefined (zero input distance)\n";
    }
    return kExitOk;
}

struct ScanFlags {
    double x_lo = -2.0, x_hi = 8.0, y_lo = -2.0, y_hi = 8.0;
    int resolution = 100;
    int neighbors = 32;
    double radius = 0.0;  // 0 = auto (half cell)
    std::string out_prefix;
};

HeatGrid run_scan(const CommonOpts& common, const SutOpts& sut_opts, const ScanFlags& flags) {
    GridScanConfig cfg;
    cfg.x_lo = flags.x_lo;
    cfg.x_hi = flags.x_hi;
    cfg.y_lo = flags.y_lo;
    cfg.y_hi = flags.y_hi;
    cfg.resolution = flags.resolution;
    cfg.neighbor_samples = flags.neighbors;
    if (flags.radius > 0.0) cfg.neighbor_radius = flags.radius;
    cfg.compressor = common.make_compressor();
    cfg.seed = common.seed();
    cfg.jobs = common.jobs;
    const SutAdapter sut = sut_opts.make();
    require_deterministic(sut);
    return grid_scan(sut, cfg);
}

int cmd_scan(const CommonOpts& common, const SutOpts& sut_opts, const ScanFlags& flags) {
    const HeatGrid grid = run_scan(common, sut_opts, flags);
    const fs::path csv = flags.out_prefix + ".csv";
    const fs::path pgm = flags.out_prefix + ".pgm";
    export_grid_csv(grid, csv, common.export_opts());
    export_grid_pgm(grid, pgm, common.export_opts());

    double best = -1.0;
    int bi = 0, bj = 0;
    std::size_t undefined = 0;
    for (int j = 0; j < grid.geom.resolution; ++j) {
        for (int i = 0; i < grid.geom.resolution; ++i) {
            const auto& q = grid.cell(i, j).quotient;
            if (!q) {
                ++undefined;
            } else if (*q > best) {
                best = *q;
                bi = i;
                bj = j;
            }
        }
    }
    std::cout << "wrote " << csv.string() << " and " << pgm.string() << "\n";
    if (best >= 0.0) {
        std::cout << "max quotient " << detail::shortest(best) << " at cell (" << bi << ", "
                  << bj << ") center (" << detail::shortest(grid.geom.center_x(bi)) << ", "
                  << detail::shortest(grid.geom.center_y(bj)) << ")\n";
    }
    std::cout << "undefined cells: " << undefined << "\n";
    return kExitOk;
}

int cmd_diff(const std::string& csv_a, const std::string& csv_b, const std::string& out_path) {
    const HeatGrid a = import_grid_csv(csv_a);
    const HeatGrid b = import_grid_csv(csv_b);
    const HeatGridDiff d = heatgrid_diff(a, b);
    const nlohmann::json doc = diff_report_json(d);
    std::cout << doc.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw Error("cannot open '" + out_path + "' for writing");
        os << doc.dump(2) << "\n";
    }
    return kExitOk;
}

struct SearchFlags {
    int budget = 2000;
    int seeds = 1;
    double initial_step = 0.5;
    double step_decay = 0.0;     // 0 = library default
    double step_floor = 1e-4;
    double shrink = 0.0;         // 0 = library default
    double dout_floor = 0.2;
    double squeeze_floor = 0.0;  // 0 = library default
    std::string out_path;
};

int cmd_search(const CommonOpts& common, const SutOpts& sut_opts, const SearchFlags& flags) {
    const Compressor c = common.make_compressor();
    const SutAdapter sut = sut_opts.make();
    SearchConfig cfg;
    cfg.budget = flags.budget;
    cfg.initial_step = flags.initial_step;
    if (flags.step_decay > 0.0) cfg.step_decay = flags.step_decay;
    cfg.step_floor = flags.step_floor;
    if (flags.shrink > 0.0) cfg.shrink_weight = flags.shrink;
    cfg.dout_floor = flags.dout_floor;
    if (flags.squeeze_floor > 0.0) cfg.squeeze_dout_floor = flags.squeeze_floor;
    cfg.seed = common.seed();
    cfg.validate();
    require_deterministic(sut);

    const std::vector<BoundaryPair> pairs = boundary_search_runs(sut, cfg, flags.seeds, c);

    SearchReportProvenance prov;
    prov.sut_name = sut.name();
    prov.compressor_name = c.name();
    prov.compressor_level = c.level();
    prov.base_seed = cfg.seed;
    prov.runs_requested = flags.seeds;
    prov.config = cfg;
    if (!flags.out_path.empty()) {
        export_pairs_json(pairs, prov, flags.out_path, common.export_opts());
        std::cout << "wrote " << flags.out_path << "\n";
    }
    std::size_t straddles = 0;
    for (const auto& p : pairs) straddles += p.major_straddle;
    std::cout << "searches: " << flags.seeds << ", returned pairs: " << pairs.size()
              << ", major straddles: " << straddles << "\n";
    if (pairs.empty()) {
        std::cerr << "no boundary found within budget\n";
        return kExitNothingFound;
    }
    return kExitOk;
}

int cmd_demo(const CommonOpts& common, std::string out_dir, const ScanFlags& scan_flags,
             const SearchFlags& search_flags) {
    if (!common.no_timestamp) {
        out_dir += "-" + detail::utc_timestamp();
        for (auto& ch : out_dir) {
            if (ch == ':') ch = '-';
        }
    }
    const fs::path dir(out_dir);
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        throw ConfigError("output directory '" + dir.string() + "' exists and is not empty");
    }
    fs::create_directories(dir);

    SutOpts sum1_opts;
    sum1_opts.builtin = "sum1";
    SutOpts sum2_opts;
    sum2_opts.builtin = "sum2";

    std::cout << "[1/4] scanning sum1...\n";
    ScanFlags f1 = scan_flags;
    f1.out_prefix = (dir / "g1").string();
    const HeatGrid g1 = run_scan(common, sum1_opts, f1);
    export_grid_csv(g1, f1.out_prefix + ".csv", common.export_opts());
    export_grid_pgm(g1, f1.out_prefix + ".pgm", common.export_opts());

    std::cout << "[2/4] scanning sum2...\n";
    ScanFlags f2 = scan_flags;
    f2.out_prefix = (dir / "g2").string();
    const HeatGrid g2 = run_scan(common, sum2_opts, f2);
    export_grid_csv(g2, f2.out_prefix + ".csv", common.export_opts());
    export_grid_pgm(g2, f2.out_prefix + ".pgm", common.export_opts());

    std::cout << "[3/4] diffing the heatgrids...\n";
    const HeatGridDiff diff = heatgrid_diff(g1, g2);
    {
        std::ofstream os(dir / "diff.json", std::ios::binary);
        os << diff_report_json(diff).dump(2) << "\n";
    }

    std::cout << "[4/4] searching sum1 for boundary pairs...\n";
    SearchFlags sf = search_flags;
    sf.out_path = (dir / "pairs.json").string();
    SutOpts sum1_for_search = sum1_opts;
    const int search_rc = cmd_search(common, sum1_for_search, sf);

    std::size_t straddles = 0;
    {
        std::ifstream is(dir / "pairs.json");
        if (is) {
            const nlohmann::json doc = nlohmann::json::parse(is, nullptr, false);
            if (doc.is_object() && doc.contains("pairs")) {
                for (const auto& e : doc["pairs"]) {
                    if (e.value("major_straddle", false)) ++straddles;
                }
            }
        }
    }
    {
        std::ofstream os(dir / "summary.txt", std::ios::binary);
        os << "constrained-sum boundary analysis\n";
        os << "grids: g1 (sum1), g2 (sum2), " << g1.geom.resolution << "x"
           << g1.geom.resolution << " cells over [" << detail::shortest(g1.geom.x_lo) << ", "
           << detail::shortest(g1.geom.x_hi) << "]^2\n";
        os << "diff: mean " << detail::shortest(diff.mean_abs_diff) << ", max "
           << detail::shortest(diff.max_abs_diff) << ", status mismatches "
           << diff.status_mismatches << "\n";
        os << "search: " << search_flags.seeds << " runs, " << straddles
           << " major straddles\n";
    }
    std::cout << "demo artifacts in " << dir.string() << "\n";
    return search_rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box boundary analysis via program difference quotients"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read option defaults from a TOML/INI file");

    CommonOpts common;
    SutOpts sut_opts;
    ScanFlags scan_flags;
    SearchFlags search_flags;

    std::string ncd_a, ncd_b;
    CLI::App* c_ncd = app.add_subcommand("ncd", "Normalized compression distance of two files");
    c_ncd->add_option("a", ncd_a, "First file")->required();
    c_ncd->add_option("b", ncd_b, "Second file")->required();
    add_common(c_ncd, common);

    std::string pdq_a, pdq_b, pdq_din = "ncd", pdq_dout = "ncd";
    CLI::App* c_pdq = app.add_subcommand("pdq", "Difference quotient for one input pair");
    c_pdq->add_option("--a", pdq_a, "First input point, e.g. 2.9,2.9")->required();
    c_pdq->add_option("--b", pdq_b, "Second input point")->required();
    c_pdq->add_option("--d-in", pdq_din, "Input distance: ncd, absdiff, euclidean")
        ->capture_default_str();
    c_pdq->add_option("--d-out", pdq_dout, "Output distance: ncd, absdiff, euclidean")
        ->capture_default_str();
    add_common(c_pdq, common);
    add_sut(c_pdq, sut_opts);

    CLI::App* c_scan = app.add_subcommand("scan", "Quotient heatgrid over a 2D input region");
    c_scan->add_option("--out", scan_flags.out_prefix, "Output path prefix (.csv/.pgm)")
        ->required();
    c_scan->add_option("--x-lo", scan_flags.x_lo)->capture_default_str();
    c_scan->add_option("--x-hi", scan_flags.x_hi)->capture_default_str();
    c_scan->add_option("--y-lo", scan_flags.y_lo)->capture_default_str();
    c_scan->add_option("--y-hi", scan_flags.y_hi)->capture_default_str();
    c_scan->add_option("--resolution", scan_flags.resolution, "Cells per axis")
        ->capture_default_str();
    c_scan->add_option("--neighbors", scan_flags.neighbors, "Samples per cell")
        ->capture_default_str();
    c_scan->add_option("--radius", scan_flags.radius,
                       "Neighbor sampling radius (default: half cell size)");
    add_common(c_scan, common);
    add_sut(c_scan, sut_opts);

    std::string diff_a, diff_b, diff_out;
    CLI::App* c_diff = app.add_subcommand("diff", "Compare two exported heatgrid CSVs");
    c_diff->add_option("a", diff_a, "First CSV")->required();
    c_diff->add_option("b", diff_b, "Second CSV")->required();
    c_diff->add_option("--out", diff_out, "Write the JSON summary here too");

    CLI::App* c_search = app.add_subcommand("search", "Squeeze boundary pairs by search");
    c_search->add_option("--out", search_flags.out_path, "Boundary-pair JSON report path");
    c_search->add_option("--budget", search_flags.budget, "Candidate evaluations per run")
        ->capture_default_str();
    c_search->add_option("--seeds", search_flags.seeds, "Number of independent runs")
        ->capture_default_str();
    c_search->add_option("--initial-step", search_flags.initial_step)->capture_default_str();
    c_search->add_option("--step-decay", search_flags.step_decay,
                         "Geometric decay per acceptance (default from library)");
    c_search->add_option("--step-floor", search_flags.step_floor)->capture_default_str();
    c_search->add_option("--shrink", search_flags.shrink,
                         "Shrink pressure weight (default from library)");
    c_search->add_option("--dout-floor", search_flags.dout_floor,
                         "Output-distance floor for major-straddle classification")
        ->capture_default_str();
    c_search->add_option("--squeeze-floor", search_flags.squeeze_floor,
                         "Output distance at which the pair counts as bracketing a "
                         "boundary and squeezing starts (default from library)");
    add_common(c_search, common);
    add_sut(c_search, sut_opts);

    std::string demo_out = "progderiv-demo";
    CLI::App* c_demo = app.add_subcommand(
        "demo", "Scan both constrained-sum programs, diff them, and search for boundaries");
    c_demo->add_option("--out", demo_out, "Output directory")->capture_default_str();
    c_demo->add_option("--resolution", scan_flags.resolution)->capture_default_str();
    c_demo->add_option("--neighbors", scan_flags.neighbors)->capture_default_str();
    c_demo->add_option("--budget", search_flags.budget)->capture_default_str();
    c_demo->add_option("--seeds", search_flags.seeds, "Search runs")->default_val(20);
    add_common(c_demo, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_ncd->parsed()) return cmd_ncd(common, ncd_a, ncd_b);
        if (c_pdq->parsed()) return cmd_pdq(common, sut_opts, pdq_a, pdq_b, pdq_din, pdq_dout);
        if (c_scan->parsed()) return cmd_scan(common, sut_opts, scan_flags);
        if (c_diff->parsed()) return cmd_diff(diff_a, diff_b, diff_out);
        if (c_search->parsed()) return cmd_search(common, sut_opts, search_flags);
        if (c_demo->parsed()) return cmd_demo(common, demo_out, scan_flags, search_flags);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TypeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NoBoundaryFoundError& e) {
        std::cerr << "no boundary found: " << e.what() << "\n";
        return kExitNothingFound;
    } catch (const AdapterError& e) {
        std::cerr << "adapter failure: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
