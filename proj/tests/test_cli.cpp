#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "progderiv/rng.hpp"
#include "progderiv/sut.hpp"

using namespace progderiv;
namespace fs = std::filesystem;

// The CLI binary is exercised through the library's own subprocess runner.

#ifndef PROGDERIV_CLI_PATH
#error "PROGDERIV_CLI_PATH must be defined"
#endif

namespace {

struct CliResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args, int timeout_ms = 120000) {
    detail::ChildOutput child =
        detail::run_child(PROGDERIV_CLI_PATH, args, "", timeout_ms);
    REQUIRE(!child.timed_out);
    return CliResult{child.exit_code, child.out, child.err};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("progderiv-cli-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("ncd of a file with itself prints 0") {
    const fs::path f = scratch_dir() / "self.txt";
    std::ofstream(f) << "some repeated content\n";
    const CliResult r = run_cli({"ncd", f.string(), f.string()});
    CHECK(r.exit_code == 0);
    CHECK(r.out.starts_with("0\n"));
    CHECK(r.out.find("compressor: zlib level 6") != std::string::npos);
}

TEST_CASE("ncd of two random files prints a large value") {
    Rng rng(77);
    const fs::path fa = scratch_dir() / "ra.bin";
    const fs::path fb = scratch_dir() / "rb.bin";
    {
        std::ofstream oa(fa, std::ios::binary), ob(fb, std::ios::binary);
        for (int i = 0; i < 1024; ++i) {
            oa.put(static_cast<char>(rng() & 0xff));
            ob.put(static_cast<char>(rng() & 0xff));
        }
    }
    const CliResult r = run_cli({"ncd", fa.string(), fb.string()});
    CHECK(r.exit_code == 0);
    const double v = std::stod(r.out);
    CHECK(v > 0.8);
}

TEST_CASE("ncd with a missing file exits 1") {
    const CliResult r = run_cli({"ncd", "/no/such/file", "/no/such/file2"});
    CHECK(r.exit_code == 1);
    CHECK(!r.err.empty());
}

TEST_CASE("unknown SUT name exits 1") {
    const CliResult r = run_cli({"scan", "--sut", "nope", "--out", "/tmp/x"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("unknown SUT") != std::string::npos);
}

TEST_CASE("search with budget 0 is a usage error") {
    const CliResult r = run_cli({"search", "--sut", "sum1", "--budget", "0"});
    CHECK(r.exit_code == 1);
}

TEST_CASE("missing subcommand is a usage error") {
    const CliResult r = run_cli({});
    CHECK(r.exit_code == 1);
}

TEST_CASE("pdq prints the quotient") {
    const CliResult r = run_cli({"pdq", "--sut", "sum1", "--a", "2.9,2.9", "--b", "3.1,3.1"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("quotient: ") != std::string::npos);
    CHECK(r.out.find("output_a: R:5.8;") != std::string::npos);
    CHECK(r.out.find("output_b: E:13:InvalidOutput") != std::string::npos);
}

TEST_CASE("pdq with equal inputs reports an undefined quotient") {
    const CliResult r = run_cli({"pdq", "--sut", "sum1", "--a", "1,1", "--b", "1,1"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("quotient: undefined") != std::string::npos);
}

TEST_CASE("scan writes deterministic CSV and PGM") {
    const fs::path p1 = scratch_dir() / "scan1";
    const fs::path p2 = scratch_dir() / "scan2";
    const std::vector<std::string> base = {"scan",           "--sut",        "sum1",
                                           "--x-lo",         "0",            "--x-hi",
                                           "6",              "--y-lo",       "0",
                                           "--y-hi",         "6",            "--resolution",
                                           "8",              "--neighbors",  "8",
                                           "--no-timestamp", "--seed",       "42"};
    auto args1 = base;
    args1.push_back("--out");
    args1.push_back(p1.string());
    auto args2 = base;
    args2.push_back("--out");
    args2.push_back(p2.string());
    CHECK(run_cli(args1).exit_code == 0);
    CHECK(run_cli(args2).exit_code == 0);
    CHECK(slurp(p1.string() + ".csv") == slurp(p2.string() + ".csv"));
    CHECK(slurp(p1.string() + ".pgm") == slurp(p2.string() + ".pgm"));
    CHECK(!slurp(p1.string() + ".csv").empty());
}

TEST_CASE("diff of a scan with itself is zero") {
    const fs::path p = scratch_dir() / "diffbase";
    CHECK(run_cli({"scan", "--sut", "sum1", "--resolution", "8", "--neighbors", "4",
                   "--no-timestamp", "--out", p.string()})
              .exit_code == 0);
    const CliResult r =
        run_cli({"diff", p.string() + ".csv", p.string() + ".csv"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"is_zero\": true") != std::string::npos);
}

TEST_CASE("search on const0 reports nothing found with exit 3") {
    const CliResult r =
        run_cli({"search", "--sut", "const0", "--budget", "100", "--seeds", "2"});
    CHECK(r.exit_code == 3);
}

TEST_CASE("search against an always-failing external SUT exits 3, not 2") {
    const CliResult r = run_cli({"search", "--sut-cmd", "/bin/false", "--budget", "50",
                                 "--seeds", "1", "--timeout-ms", "3000"});
    // every output is the same ErrorOutput, so no boundary exists
    CHECK(r.exit_code == 3);
}

TEST_CASE("search writes a pairs report") {
    const fs::path p = scratch_dir() / "pairs.json";
    const CliResult r = run_cli({"search", "--sut", "sum1", "--budget", "400", "--seeds", "2",
                                 "--no-timestamp", "--out", p.string()});
    CHECK(r.exit_code == 0);
    const std::string body = slurp(p);
    CHECK(body.find("\"schema_version\": 1") != std::string::npos);
    CHECK(body.find("\"pairs\"") != std::string::npos);
}

TEST_CASE("demo writes the full artifact set") {
    const fs::path dir = scratch_dir() / "demo";
    const CliResult r = run_cli({"demo", "--out", dir.string(), "--resolution", "8",
                                 "--neighbors", "8", "--budget", "300", "--seeds", "2",
                                 "--no-timestamp"});
    CHECK(r.exit_code == 0);
    for (const char* name :
         {"g1.csv", "g1.pgm", "g2.csv", "g2.pgm", "diff.json", "pairs.json", "summary.txt"}) {
        INFO(name);
        CHECK(fs::exists(dir / name));
    }
    // refuses to clobber a nonempty directory
    const CliResult again = run_cli({"demo", "--out", dir.string(), "--no-timestamp"});
    CHECK(again.exit_code == 1);
}

TEST_CASE("external SUT via --sut-cmd matches the builtin") {
    const CliResult r = run_cli({"pdq", "--sut-cmd", PROGDERIV_SUM_SUT_PATH, "--a", "2,3",
                                 "--b", "2,3.5", "--decode", "canonical"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("output_a: R:5;") != std::string::npos);
    CHECK(r.out.find("output_b: R:5.5;") != std::string::npos);
}
