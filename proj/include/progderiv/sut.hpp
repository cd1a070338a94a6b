#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "progderiv/errors.hpp"
#include "progderiv/value.hpp"

extern char** environ;

namespace progderiv {

// ---------------------------------------------------------------------------
// Adapter model
// ---------------------------------------------------------------------------

enum class ConcurrencyMode { ParallelSafe, SerialOnly };

struct SlotDomain {
    enum class Kind { Numeric, Text, Opaque };
    Kind kind = Kind::Opaque;
    double lo = 0.0;  // numeric interval, inclusive
    double hi = 0.0;

    static SlotDomain numeric(double lo, double hi) {
        return SlotDomain{Kind::Numeric, lo, hi};
    }
    static SlotDomain text() { return SlotDomain{Kind::Text, 0, 0}; }
    static SlotDomain opaque() { return SlotDomain{Kind::Opaque, 0, 0}; }
};

// A black-box program under test. invoke() is total: SUT-level failures come
// back as ErrorOutput values; only harness-side problems (a crashing spawn,
// broken plumbing) escape as AdapterError.
class SutAdapter {
  public:
    using InvokeFn = std::function<Value(std::span<const Value>)>;

    SutAdapter(std::string name, std::vector<SlotDomain> domains, ConcurrencyMode mode,
               InvokeFn fn)
        : name_(std::move(name)),
          domains_(std::move(domains)),
          mode_(mode),
          fn_(std::move(fn)) {}

    const std::string& name() const { return name_; }
    int arity() const { return static_cast<int>(domains_.size()); }
    const std::vector<SlotDomain>& domains() const { return domains_; }
    ConcurrencyMode concurrency() const { return mode_; }

    bool all_domains_numeric() const {
        for (const auto& d : domains_) {
            if (d.kind != SlotDomain::Kind::Numeric) return false;
        }
        return !domains_.empty();
    }

    Value invoke(std::span<const Value> args) const { return fn_(args); }

    // Arity-aware entry point: a single Value stands for the whole argument
    // tuple (a Sequence for arity > 1).
    Value invoke_value(const Value& v) const {
        if (arity() == 1) {
            return fn_(std::span<const Value>(&v, 1));
        }
        if (v.kind() != ValueKind::Sequence ||
            v.as_sequence().size() != static_cast<std::size_t>(arity())) {
            throw TypeError("SUT '" + name_ + "' expects a sequence of " +
                            std::to_string(arity()) + " values");
        }
        return fn_(std::span<const Value>(v.as_sequence()));
    }

    // Determinism self-check: invoking twice on the same input must produce
    // byte-equal outputs. The result of the last check is recorded.
    bool self_check(std::span<const Value> args) const {
        const bool ok = values_equal(invoke(args), invoke(args));
        last_self_check_ = ok;
        return ok;
    }

    std::optional<bool> last_self_check() const { return last_self_check_; }

  private:
    std::string name_;
    std::vector<SlotDomain> domains_;
    ConcurrencyMode mode_;
    InvokeFn fn_;
    mutable std::optional<bool> last_self_check_;
};

// ---------------------------------------------------------------------------
// Reference programs: the constrained sum, in two variants
// ---------------------------------------------------------------------------
//
// "Calculate the sum of two floating inputs, result reported with one
// decimal. Negative inputs are invalid, as are inputs or outputs >= 6."
// Variant two has a defect: its output constraint only triggers at sum >= 7.
//
// Check order is fixed (negative first, then the per-input >= 6 check, then
// the output constraint on the *unrounded* sum) and the error strings are
// constants, so error kinds are deterministic and each invalid region maps to
// a single output value.

namespace detail {

inline double round_half_up_1dp(double v) {
    return std::floor(v * 10.0 + 0.5) / 10.0;
}

inline Value constrained_sum(double x, double y, double sum_limit) {
    if (x < 0.0 || y < 0.0) {
        return Value::error("InvalidInput", "inputs must be non-negative");
    }
    if (x >= 6.0 || y >= 6.0) {
        return Value::error("InvalidInput", "inputs must be less than 6");
    }
    const double sum = x + y;
    if (sum >= sum_limit) {
        // Same message in both variants: variant two's defect is the
        // comparison constant, so outside the disagreement band the two
        // programs stay byte-identical.
        return Value::error("InvalidOutput", "sum too large");
    }
    return Value::real(round_half_up_1dp(sum));
}

}  // namespace detail

inline Value constrained_sum_one(double x, double y) {
    return detail::constrained_sum(x, y, 6.0);
}

inline Value constrained_sum_two(double x, double y) {
    return detail::constrained_sum(x, y, 7.0);
}

namespace detail {

inline SutAdapter make_sum_adapter(std::string name, Value (*fn)(double, double)) {
    std::vector<SlotDomain> domains{SlotDomain::numeric(-2.0, 8.0),
                                    SlotDomain::numeric(-2.0, 8.0)};
    return SutAdapter(std::move(name), std::move(domains), ConcurrencyMode::ParallelSafe,
                      [fn](std::span<const Value> args) {
                          return fn(args[0].numeric(), args[1].numeric());
                      });
}

}  // namespace detail

inline SutAdapter make_constrained_sum_one() {
    return detail::make_sum_adapter("sum1", &constrained_sum_one);
}

inline SutAdapter make_constrained_sum_two() {
    return detail::make_sum_adapter("sum2", &constrained_sum_two);
}

// Constant program; useful as the "provably no behavior change" baseline.
inline SutAdapter make_constant_zero() {
    std::vector<SlotDomain> domains{SlotDomain::numeric(-2.0, 8.0),
                                    SlotDomain::numeric(-2.0, 8.0)};
    return SutAdapter("const0", std::move(domains), ConcurrencyMode::ParallelSafe,
                      [](std::span<const Value>) { return Value::real(0.0); });
}

inline std::vector<std::string> builtin_sut_names() { return {"sum1", "sum2", "const0"}; }

inline SutAdapter make_builtin_sut(std::string_view name) {
    if (name == "sum1") return make_constrained_sum_one();
    if (name == "sum2") return make_constrained_sum_two();
    if (name == "const0") return make_constant_zero();
    throw ConfigError("unknown SUT '" + std::string(name) + "' (available: sum1, sum2, const0)");
}

// ---------------------------------------------------------------------------
// Subprocess adapter
// ---------------------------------------------------------------------------
//
// Wire protocol (bit-exact, UTF-8):
//   stdin:  one line, the comma-separated canonical renderings of the
//           inputs, terminated by '\n'.
//   stdout: read in full; one trailing '\n' is stripped, then decoded.
//
// Decode rules:
//   Auto      - exit 0 and empty stderr: stdout that parses fully as a plain
//               decimal number becomes Real, anything else becomes Text.
//   Canonical - exit 0 and empty stderr: stdout is parsed as one canonical
//               rendering (so external programs can return structured values
//               and first-class ErrorOutputs).
//   Either    - nonzero exit or nonempty stderr: ErrorOutput("Exit:<code>",
//               stderr); death by signal: ErrorOutput("Signal:<n>", stderr);
//               running past the timeout: ErrorOutput("Timeout", ...).
// The timeout message reports the configured budget rather than measured
// wall time so analysis outputs stay deterministic.

enum class OutputDecode { Auto, Canonical };

struct SubprocessSpec {
    std::string executable;
    std::vector<std::string> args;
    int timeout_ms = 5000;
    OutputDecode decode = OutputDecode::Auto;
};

inline std::string render_wire_line(std::span<const Value> inputs) {
    std::string line;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (i > 0) line += ',';
        line += canonical_bytes(inputs[i]);
    }
    line += '\n';
    return line;
}

inline std::vector<Value> parse_wire_line(std::string_view line) {
    if (line.ends_with('\n')) line.remove_suffix(1);
    std::vector<Value> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        out.push_back(parse_canonical_prefix(line, pos));
        if (pos < line.size()) {
            if (line[pos] != ',') throw ValueError("wire line: expected ',' between values");
            ++pos;
        }
    }
    return out;
}

namespace detail {

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd(std::exchange(o.fd, -1)) {}
    Fd& operator=(Fd&& o) noexcept {
        reset();
        fd = std::exchange(o.fd, -1);
        return *this;
    }
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

inline void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

inline std::string strip_one_newline(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

inline std::optional<double> parse_plain_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

struct ChildOutput {
    std::string out;
    std::string err;
    bool timed_out = false;
    int exit_code = 0;
    int signal = 0;  // nonzero if killed by a signal (other than our own timeout kill)
};

// Pump stdin to the child, drain stdout/stderr, enforce the deadline, reap.
inline ChildOutput run_child(const std::string& exe, const std::vector<std::string>& args,
                             const std::string& input, int timeout_ms) {
    ignore_sigpipe_once();

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
        ::pipe2(err_pipe, O_CLOEXEC) != 0) {
        throw AdapterError("pipe2 failed: " + std::string(std::strerror(errno)));
    }
    Fd in_r(in_pipe[0]), in_w(in_pipe[1]);
    Fd out_r(out_pipe[0]), out_w(out_pipe[1]);
    Fd err_r(err_pipe[0]), err_w(err_pipe[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_r.fd, 0);
    posix_spawn_file_actions_adddup2(&actions, out_w.fd, 1);
    posix_spawn_file_actions_adddup2(&actions, err_w.fd, 2);

    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
        throw AdapterError("failed to spawn '" + exe + "': " + std::strerror(rc));
    }
    in_r.reset();
    out_w.reset();
    err_w.reset();

    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    ChildOutput result;

    // Write the input line; the child may exit without reading it.
    std::size_t written = 0;
    while (written < input.size()) {
        const ssize_t n = ::write(in_w.fd, input.data() + written, input.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;  // EPIPE and friends: let the exit status tell the story
        }
        written += static_cast<std::size_t>(n);
    }
    in_w.reset();

    ::fcntl(out_r.fd, F_SETFL, O_NONBLOCK);
    ::fcntl(err_r.fd, F_SETFL, O_NONBLOCK);

    constexpr std::size_t kMaxCapture = std::size_t{64} << 20;
    auto drain = [&](Fd& fd, std::string& sink) {
        char buf[4096];
        for (;;) {
            const ssize_t n = ::read(fd.fd, buf, sizeof(buf));
            if (n > 0) {
                if (sink.size() + static_cast<std::size_t>(n) > kMaxCapture) {
                    ::kill(pid, SIGKILL);
                    ::waitpid(pid, nullptr, 0);
                    throw AdapterError("subprocess produced more than 64 MiB of output");
                }
                sink.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0) {
                fd.reset();
                return;
            } else {
                return;  // EAGAIN or EINTR; try again on the next poll
            }
        }
    };

    while (out_r.fd >= 0 || err_r.fd >= 0) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd fds[2];
        nfds_t nfds = 0;
        if (out_r.fd >= 0) fds[nfds++] = pollfd{out_r.fd, POLLIN, 0};
        if (err_r.fd >= 0) fds[nfds++] = pollfd{err_r.fd, POLLIN, 0};
        const int pr = ::poll(fds, nfds, static_cast<int>(std::min<long long>(left, 1000)));
        if (pr < 0 && errno != EINTR) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            throw AdapterError("poll failed: " + std::string(std::strerror(errno)));
        }
        for (nfds_t i = 0; i < nfds; ++i) {
            if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
                if (out_r.fd >= 0 && fds[i].fd == out_r.fd) {
                    drain(out_r, result.out);
                } else if (err_r.fd >= 0 && fds[i].fd == err_r.fd) {
                    drain(err_r, result.err);
                }
            }
        }
    }

    if (result.timed_out) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, nullptr, 0);
        return result;
    }

    // Streams are closed; wait for exit, still bounded by the deadline.
    int status = 0;
    for (;;) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0) throw AdapterError("waitpid failed: " + std::string(std::strerror(errno)));
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            result.timed_out = true;
            return result;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signal = WTERMSIG(status);
    }
    return result;
}

}  // namespace detail

inline Value run_subprocess(const SubprocessSpec& spec, std::span<const Value> inputs) {
    if (spec.timeout_ms <= 0) throw ConfigError("subprocess timeout must be > 0");
    if (spec.executable.empty()) throw ConfigError("subprocess executable must not be empty");

    const std::string line = render_wire_line(inputs);
    detail::ChildOutput child =
        detail::run_child(spec.executable, spec.args, line, spec.timeout_ms);

    if (child.timed_out) {
        return Value::error("Timeout",
                            "exceeded " + std::to_string(spec.timeout_ms) + " ms");
    }
    const std::string err = detail::strip_one_newline(std::move(child.err));
    if (child.signal != 0) {
        return Value::error("Signal:" + std::to_string(child.signal), err);
    }
    if (child.exit_code != 0 || !err.empty()) {
        return Value::error("Exit:" + std::to_string(child.exit_code), err);
    }
    const std::string out = detail::strip_one_newline(std::move(child.out));
    if (spec.decode == OutputDecode::Canonical) {
        try {
            return parse_canonical(out);
        } catch (const ValueError& e) {
            return Value::error("DecodeError", e.what());
        }
    }
    if (auto num = detail::parse_plain_number(out)) {
        return Value::real(*num);
    }
    return Value::text(out);
}

inline SutAdapter make_subprocess_sut(std::string name, SubprocessSpec spec,
                                      std::vector<SlotDomain> domains,
                                      ConcurrencyMode mode = ConcurrencyMode::ParallelSafe) {
    return SutAdapter(std::move(name), std::move(domains), mode,
                      [spec = std::move(spec)](std::span<const Value> args) {
                          return run_subprocess(spec, args);
                      });
}

}  // namespace progderiv
