#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsopt {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, std::size_t line, const std::string& what);
    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }  // 0 when not tied to a line

private:
    std::string source_;
    std::size_t line_;
};

/// Flat `key.path = value` configuration. '#' starts a comment. Values are
/// scalars or lists: `[1, 2, 3]`, `{logspace(-6,-3,7)}`, `linspace(0,1,5)`.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config parse_string(const std::string& text, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.contains(key); }
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_real(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// A scalar, a bracketed list, or range expressions.
    std::vector<double> get_reals(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Throws ConfigError at the first key not in `known` (prefix entries ending in '.' match subtrees).
    void reject_unknown(const std::set<std::string>& known) const;

    /// Keys in file order; keys added with set() come last.
    std::vector<std::string> keys() const;
    /// Sorted `key = value` lines; stable input for hashing.
    std::string canonical() const;
    std::string hash() const;
    const std::string& source() const { return source_; }
    /// Directory that relative paths are resolved against.
    std::filesystem::path base_dir() const { return base_dir_; }
    std::filesystem::path resolve_path(const std::string& value) const;

    /// Throws ConfigError for `key`, citing its line when the key is present.
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    const Entry* find(const std::string& key) const;

    std::map<std::string, Entry> entries_;
    std::string source_;
    std::filesystem::path base_dir_;
};

/// Expands a list value: comma-separated reals and logspace/linspace terms,
/// optionally wrapped in [] or {}. Throws std::invalid_argument.
std::vector<double> parse_real_list(const std::string& value);
std::vector<double> logspace(double lo_exp, double hi_exp, std::size_t count);
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace dsopt
