#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "progderiv/errors.hpp"

namespace progderiv {

// Canonical data model for everything a program under test consumes or
// produces. Error outputs are first-class values so that "threw X" and
// "returned 5.8" live in the same space and can be fed to a distance.
//
// The byte-level canonical format is documented in docs/value-format.md.
// In short: every value is rendered with a one-letter tag; numeric payloads
// are terminated by ';', everything else is length-prefixed, so the encoding
// is an unambiguous prefix code and needs no escaping.

enum class ValueKind { Real, Integer, Text, Bytes, Sequence, Record, Error };

struct ErrorOutput {
    std::string kind;
    std::string message;
};

class Value {
  public:
    using Bytes = std::vector<std::uint8_t>;
    using Sequence = std::vector<Value>;
    // Sorted by key, keys unique. Kept as a vector so Value stays a regular
    // value type with cheap iteration.
    using Record = std::vector<std::pair<std::string, Value>>;

    // Rejects NaN and infinities: they have no stable ordering or distance
    // semantics in this model.
    static Value real(double v) {
        if (!std::isfinite(v)) {
            throw ValueError("Real payload must be finite");
        }
        return Value(Payload(v));
    }

    static Value integer(std::int64_t v) { return Value(Payload(v)); }

    static Value text(std::string s) { return Value(Payload(std::move(s))); }

    static Value bytes(Bytes b) { return Value(Payload(std::move(b))); }

    static Value sequence(Sequence elems) { return Value(Payload(std::move(elems))); }

    // Fields are sorted lexicographically; duplicate names are rejected.
    static Value record(Record fields) {
        std::sort(fields.begin(), fields.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].first == fields[i - 1].first) {
                throw ValueError("duplicate record field name: " + fields[i].first);
            }
        }
        return Value(Payload(std::move(fields)));
    }

    static Value record(const std::map<std::string, Value>& fields) {
        Record r(fields.begin(), fields.end());
        return Value(Payload(std::move(r)));
    }

    static Value error(std::string kind, std::string message) {
        return Value(Payload(ErrorOutput{std::move(kind), std::move(message)}));
    }

    ValueKind kind() const { return static_cast<ValueKind>(payload_.index()); }

    bool is_error() const { return kind() == ValueKind::Error; }
    bool is_numeric() const { return kind() == ValueKind::Real || kind() == ValueKind::Integer; }

    double as_real() const { return std::get<double>(payload_); }
    std::int64_t as_integer() const { return std::get<std::int64_t>(payload_); }
    const std::string& as_text() const { return std::get<std::string>(payload_); }
    const Bytes& as_bytes() const { return std::get<Bytes>(payload_); }
    const Sequence& as_sequence() const { return std::get<Sequence>(payload_); }
    const Record& as_record() const { return std::get<Record>(payload_); }
    const ErrorOutput& as_error() const { return std::get<ErrorOutput>(payload_); }

    // Numeric payload as a double regardless of Real/Integer tag.
    double numeric() const {
        if (kind() == ValueKind::Real) return as_real();
        if (kind() == ValueKind::Integer) return static_cast<double>(as_integer());
        throw TypeError("value is not numeric");
    }

  private:
    using Payload = std::variant<double, std::int64_t, std::string, Bytes, Sequence, Record, ErrorOutput>;

    explicit Value(Payload p) : payload_(std::move(p)) {}

    Payload payload_;
};

namespace detail {

inline void append_size(std::string& out, std::size_t n) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), n);
    out.append(buf, ptr);
}

inline void append_shortest(std::string& out, double v) {
    // std::to_chars with no precision yields the shortest decimal form that
    // round-trips, which is exactly the stability the compressor needs.
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

inline void append_shortest(std::string& out, std::int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

inline void render_value(std::string& out, const Value& v) {
    switch (v.kind()) {
        case ValueKind::Real:
            out += "R:";
            append_shortest(out, v.as_real());
            out += ';';
            break;
        case ValueKind::Integer:
            out += "I:";
            append_shortest(out, v.as_integer());
            out += ';';
            break;
        case ValueKind::Text: {
            const std::string& s = v.as_text();
            out += "T:";
            append_size(out, s.size());
            out += ':';
            out += s;
            break;
        }
        case ValueKind::Bytes: {
            const Value::Bytes& b = v.as_bytes();
            out += "B:";
            append_size(out, b.size());
            out += ':';
            out.append(reinterpret_cast<const char*>(b.data()), b.size());
            break;
        }
        case ValueKind::Sequence: {
            const Value::Sequence& xs = v.as_sequence();
            out += "S:";
            append_size(out, xs.size());
            out += ':';
            for (const Value& x : xs) render_value(out, x);
            break;
        }
        case ValueKind::Record: {
            const Value::Record& r = v.as_record();
            out += "M:";
            append_size(out, r.size());
            out += ':';
            for (const auto& [key, val] : r) {
                append_size(out, key.size());
                out += ':';
                out += key;
                render_value(out, val);
            }
            break;
        }
        case ValueKind::Error: {
            const ErrorOutput& e = v.as_error();
            out += "E:";
            append_size(out, e.kind.size());
            out += ':';
            out += e.kind;
            out += ':';
            append_size(out, e.message.size());
            out += ':';
            out += e.message;
            break;
        }
    }
}

}  // namespace detail

// Deterministic byte encoding of a Value. Equal values always yield identical
// bytes; distinct variant tags can never collide.
inline std::string canonical_bytes(const Value& v) {
    std::string out;
    detail::render_value(out, v);
    return out;
}

struct CanonicalBytes {
    std::string bytes;
    Value source;
};

inline CanonicalBytes canonicalize(const Value& v) {
    return CanonicalBytes{canonical_bytes(v), v};
}

// Exact equality: byte-for-byte equal canonical encodings. Deliberately no
// floating-point tolerance; Real(-0.0) and Real(0.0) are distinct.
inline bool values_equal(const Value& a, const Value& b) {
    return canonical_bytes(a) == canonical_bytes(b);
}

inline bool operator==(const Value& a, const Value& b) { return values_equal(a, b); }
inline bool operator!=(const Value& a, const Value& b) { return !values_equal(a, b); }

namespace detail {

inline constexpr int kMaxParseDepth = 256;

[[noreturn]] inline void parse_fail(const char* what, std::size_t pos) {
    throw ValueError("canonical parse error at byte " + std::to_string(pos) + ": " + what);
}

inline char take(std::string_view in, std::size_t& pos) {
    if (pos >= in.size()) parse_fail("unexpected end of input", pos);
    return in[pos++];
}

inline void expect(std::string_view in, std::size_t& pos, char c) {
    if (take(in, pos) != c) parse_fail("unexpected character", pos - 1);
}

inline std::size_t parse_size(std::string_view in, std::size_t& pos) {
    std::size_t start = pos;
    while (pos < in.size() && in[pos] >= '0' && in[pos] <= '9') ++pos;
    if (pos == start || pos - start > 18) parse_fail("bad length", start);
    std::size_t n = 0;
    std::from_chars(in.data() + start, in.data() + pos, n);
    expect(in, pos, ':');
    return n;
}

inline std::string_view parse_raw(std::string_view in, std::size_t& pos) {
    const std::size_t n = parse_size(in, pos);
    if (in.size() - pos < n) parse_fail("raw payload truncated", pos);
    std::string_view raw = in.substr(pos, n);
    pos += n;
    return raw;
}

inline std::string_view take_until_semicolon(std::string_view in, std::size_t& pos) {
    const std::size_t end = in.find(';', pos);
    if (end == std::string_view::npos) parse_fail("missing ';' terminator", pos);
    std::string_view seg = in.substr(pos, end - pos);
    pos = end + 1;
    return seg;
}

inline Value parse_value(std::string_view in, std::size_t& pos, int depth) {
    if (depth > kMaxParseDepth) parse_fail("nesting too deep", pos);
    const char tag = take(in, pos);
    expect(in, pos, ':');
    switch (tag) {
        case 'R': {
            std::string_view seg = take_until_semicolon(in, pos);
            double v = 0;
            auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), v);
            if (ec != std::errc() || ptr != seg.data() + seg.size() || !std::isfinite(v)) {
                parse_fail("bad real payload", pos);
            }
            return Value::real(v);
        }
        case 'I': {
            std::string_view seg = take_until_semicolon(in, pos);
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), v);
            if (ec != std::errc() || ptr != seg.data() + seg.size()) {
                parse_fail("bad integer payload", pos);
            }
            return Value::integer(v);
        }
        case 'T':
            return Value::text(std::string(parse_raw(in, pos)));
        case 'B': {
            std::string_view raw = parse_raw(in, pos);
            return Value::bytes(Value::Bytes(raw.begin(), raw.end()));
        }
        case 'S': {
            const std::size_t n = parse_size(in, pos);
            Value::Sequence xs;
            xs.reserve(std::min<std::size_t>(n, 4096));
            for (std::size_t i = 0; i < n; ++i) xs.push_back(parse_value(in, pos, depth + 1));
            return Value::sequence(std::move(xs));
        }
        case 'M': {
            const std::size_t n = parse_size(in, pos);
            Value::Record r;
            r.reserve(std::min<std::size_t>(n, 4096));
            for (std::size_t i = 0; i < n; ++i) {
                std::string key(parse_raw(in, pos));
                r.emplace_back(std::move(key), parse_value(in, pos, depth + 1));
            }
            return Value::record(std::move(r));  // re-sorts and rejects duplicates
        }
        case 'E': {
            std::string kind(parse_raw(in, pos));
            expect(in, pos, ':');
            std::string msg(parse_raw(in, pos));
            return Value::error(std::move(kind), std::move(msg));
        }
        default:
            parse_fail("unknown tag", pos - 2);
    }
}

}  // namespace detail

// Parses one value starting at `pos`, advancing it past the consumed bytes.
inline Value parse_canonical_prefix(std::string_view in, std::size_t& pos) {
    return detail::parse_value(in, pos, 0);
}

// Parses a complete canonical rendering; trailing bytes are an error.
// The parser is lenient about non-canonical numeric spellings ("R:5.0;"
// parses to the same value as "R:5;"); re-rendering restores canonical form.
inline Value parse_canonical(std::string_view in) {
    std::size_t pos = 0;
    Value v = detail::parse_value(in, pos, 0);
    if (pos != in.size()) detail::parse_fail("trailing data", pos);
    return v;
}

}  // namespace progderiv
