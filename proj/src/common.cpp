#include "evac/common.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace evac {

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("Rng::below: empty range");
    }
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next();
    while (x >= limit) {
        x = next();
    }
    return x % n;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ splitmix64(p));
    }
    return h;
}

std::string format_double(double v)
{
    if (v == 0.0) {
        return "0"; // folds -0
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw InputError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view text, std::string_view what)
{
    text = trim(text);
    std::int64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw InputError(std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what)
{
    text = trim(text);
    std::uint64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw InputError(std::string(what) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

KeyValueFile KeyValueFile::load(const std::string& path)
{
    return parse(read_text_file(path), path);
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string source_name)
{
    KeyValueFile kv;
    kv.source_ = std::move(source_name);
    int line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InputError(kv.source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw InputError(kv.source_ + ":" + std::to_string(line_no) + ": empty key");
        }
        if (kv.entries_.count(key)) {
            throw InputError(kv.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        kv.entries_.emplace(std::move(key), Entry{std::move(value), line_no});
    }
    return kv;
}

std::string KeyValueFile::where(const std::string& key) const
{
    auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    return source_ + ":" + std::to_string(line) + ": " + key;
}

std::string KeyValueFile::take(const std::string& key)
{
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw InputError(source_ + ": missing required key '" + key + "'");
    }
    consumed_.insert(key);
    return it->second.value;
}

std::string KeyValueFile::take_or(const std::string& key, std::string fallback)
{
    return has(key) ? take(key) : std::move(fallback);
}

double KeyValueFile::take_double(const std::string& key, double fallback)
{
    return has(key) ? parse_double(take(key), where(key)) : fallback;
}

std::int64_t KeyValueFile::take_int(const std::string& key, std::int64_t fallback)
{
    return has(key) ? parse_int(take(key), where(key)) : fallback;
}

std::vector<double> KeyValueFile::take_doubles(const std::string& key, std::vector<double> fallback)
{
    if (!has(key)) {
        return fallback;
    }
    const std::string raw = take(key);
    std::vector<double> out;
    for (auto tok : split_whitespace(raw)) {
        out.push_back(parse_double(tok, where(key)));
    }
    if (out.empty()) {
        throw InputError(where(key) + ": expected at least one value");
    }
    return out;
}

void KeyValueFile::finish() const
{
    for (const auto& [key, entry] : entries_) {
        if (!consumed_.count(key)) {
            throw InputError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
        }
    }
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw InputError("write failed for '" + path + "'");
    }
}

} // namespace evac
