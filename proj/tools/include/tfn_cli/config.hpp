#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfn::cli {

/// A setting is missing, unknown or malformed; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key = value settings. Later sources override earlier ones.
class Config {
public:
    /// Lines "key = value"; '#' starts a comment; blank lines are ignored.
    /// Throws ParseError with the line number on malformed lines.
    static Config parse(const std::string& text, const std::string& origin = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<std::uint64_t> seeds(const std::string& key) const;

    /// Rendered as parseable text, keys sorted.
    std::string render() const;

private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& text);

}  // namespace tfn::cli
