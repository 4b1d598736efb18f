#include "dsopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "dsopt/text.hpp"

namespace dsopt {

ConfigError::ConfigError(std::string source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      source_(std::move(source)),
      line_(line) {}

std::vector<double> logspace(double lo_exp, double hi_exp, std::size_t count) {
    std::vector<double> out;
    for (double e : linspace(lo_exp, hi_exp, count)) out.push_back(std::pow(10.0, e));
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count == 0) throw std::invalid_argument("range needs at least one point");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = hi;
    return out;
}

namespace {

std::string_view strip_brackets(std::string_view v) {
    v = trim(v);
    if (v.size() >= 2 && ((v.front() == '[' && v.back() == ']') || (v.front() == '{' && v.back() == '}'))) {
        return trim(v.substr(1, v.size() - 2));
    }
    return v;
}

// Splits on commas that are not inside parentheses.
std::vector<std::string_view> split_top_level(std::string_view v) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '(') ++depth;
        if (v[i] == ')') --depth;
        if (depth < 0) throw std::invalid_argument("unbalanced parentheses");
        if (v[i] == ',' && depth == 0) {
            parts.push_back(trim(v.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (depth != 0) throw std::invalid_argument("unbalanced parentheses");
    parts.push_back(trim(v.substr(start)));
    return parts;
}

std::string_view strip_quotes(std::string_view v) {
    v = trim(v);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& value) {
    const auto body = strip_brackets(value);
    if (body.empty()) return {};
    std::vector<double> out;
    for (auto term : split_top_level(body)) {
        if (term.empty()) throw std::invalid_argument("empty list element");
        const auto open = term.find('(');
        if (open == std::string_view::npos) {
            out.push_back(parse_real(term));
            continue;
        }
        if (term.back() != ')') throw std::invalid_argument("malformed range '" + std::string(term) + "'");
        const auto fn = trim(term.substr(0, open));
        const auto args = split_top_level(term.substr(open + 1, term.size() - open - 2));
        if (args.size() != 3) throw std::invalid_argument(std::string(fn) + " takes (start, stop, count)");
        const double a = parse_real(args[0]), b = parse_real(args[1]);
        const std::size_t n = parse_uint(args[2]);
        std::vector<double> r;
        if (fn == "logspace") {
            r = logspace(a, b, n);
        } else if (fn == "linspace") {
            r = linspace(a, b, n);
        } else {
            throw std::invalid_argument("unknown range function '" + std::string(fn) + "'");
        }
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        // '#' begins a comment unless inside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '"') quoted = !quoted;
            if (body[i] == '#' && !quoted) {
                body = body.substr(0, i);
                break;
            }
        }
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError(source, line_no, "empty key");
        for (char c : key) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
                throw ConfigError(source, line_no, "invalid character in key '" + key + "'");
            }
        }
        if (value.empty()) throw ConfigError(source, line_no, "key '" + key + "' has no value");
        if (cfg.entries_.contains(key)) {
            throw ConfigError(source, line_no,
                              "duplicate key '" + key + "' (first set on line " +
                                  std::to_string(cfg.entries_[key].line) + ")");
        }
        cfg.entries_[key] = Entry{value, line_no};
    }
    return cfg;
}

Config Config::parse_string(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    return parse(in, source);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    Config cfg = parse(in, path.string());
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0}; }

void Config::fail(const std::string& key, const std::string& what) const {
    const Entry* e = find(key);
    throw ConfigError(source_, e ? e->line : 0, "'" + key + "': " + what);
}

const Config::Entry* Config::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? std::string(strip_quotes(e->value)) : fallback;
}

std::string Config::require_string(const std::string& key) const {
    if (!has(key)) throw ConfigError(source_, 0, "missing required key '" + key + "'");
    return get_string(key, "");
}

double Config::get_real(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    try {
        return parse_real(e->value);
    } catch (const std::exception&) {
        fail(key, "expected a real number, got '" + e->value + "'");
    }
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    try {
        return parse_uint(e->value);
    } catch (const std::exception&) {
        fail(key, "expected a non-negative integer, got '" + e->value + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> Config::get_reals(const std::string& key, const std::vector<double>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    try {
        return parse_real_list(e->value);
    } catch (const std::exception& ex) {
        fail(key, std::string("bad list: ") + ex.what());
    }
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    const auto body = strip_brackets(e->value);
    std::vector<std::string> out;
    if (body.empty()) return out;
    for (auto part : split_top_level(body)) {
        if (part.empty()) fail(key, "empty list element");
        out.emplace_back(strip_quotes(part));
    }
    return out;
}

void Config::reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries_) {
        bool ok = known.contains(key);
        for (const auto& k : known) {
            if (!ok && !k.empty() && k.back() == '.' && key.starts_with(k)) ok = true;
        }
        if (!ok) throw ConfigError(source_, entry.line, "unknown key '" + key + "'");
    }
}

std::vector<std::string> Config::keys() const {
    std::vector<std::pair<std::size_t, std::string>> order;
    for (const auto& [key, entry] : entries_) order.emplace_back(entry.line ? entry.line : SIZE_MAX, key);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (auto& [line, key] : order) out.push_back(std::move(key));
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [key, entry] : entries_) out += key + " = " + entry.value + "\n";
    return out;
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

std::filesystem::path Config::resolve_path(const std::string& value) const {
    const std::filesystem::path p(value);
    if (p.is_absolute() || base_dir_.empty()) return p;
    return base_dir_ / p;
}

}  // namespace dsopt
