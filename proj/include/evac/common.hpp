#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

/// Bad user input: unparsable files, invalid flag values, violated input invariants.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant failed during simulation (a bug, not bad input).
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Seeded generator with platform-independent conversions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std distributions are not, so the conversions to real and
/// bounded integer values are done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on the closed interval [lo, hi].
    double uniform_closed(double lo, double hi)
    {
        const double u = static_cast<double>(next() >> 11) / static_cast<double>((std::uint64_t{1} << 53) - 1);
        return lo + (hi - lo) * u;
    }

    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Uniform integer on [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; the building block of all seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Stable hash of a sequence of integers, used to derive per-run seeds.
std::uint64_t stable_hash(std::initializer_list<std::uint64_t> parts);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parses a complete decimal number; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Flat `key = value` configuration file. `#` starts a comment.
///
/// Keys are consumed with take(); finish() rejects any key nobody asked for,
/// so misspelled keys fail loudly instead of silently using a default.
class KeyValueFile {
public:
    static KeyValueFile load(const std::string& path);
    static KeyValueFile parse(std::string_view text, std::string source_name);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string take(const std::string& key);
    std::string take_or(const std::string& key, std::string fallback);
    double take_double(const std::string& key, double fallback);
    std::int64_t take_int(const std::string& key, std::int64_t fallback);
    std::vector<double> take_doubles(const std::string& key, std::vector<double> fallback);
    void finish() const;

    const std::string& source() const { return source_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string where(const std::string& key) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> consumed_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

} // namespace evac
