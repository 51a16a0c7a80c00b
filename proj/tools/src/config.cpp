#include "tfn_cli/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tfn/errors.hpp"

namespace tfn::cli {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(origin, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(origin, line_no, "empty key");
        c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string Config::str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key + ": missing setting");
    return it->second;
}

double Config::real(const std::string& key) const {
    const std::string v = str(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad(key, v, "a finite number");
    return out;
}

std::size_t Config::count(const std::string& key) const {
    const std::string v = str(key);
    unsigned long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "a non-negative integer");
    return static_cast<std::size_t>(out);
}

bool Config::flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, v, "true or false");
}

std::vector<std::string> Config::list(const std::string& key) const { return split_list(str(key)); }

std::vector<std::uint64_t> Config::seeds(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : list(key)) {
        std::uint64_t s = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), s);
        if (ec != std::errc() || ptr != item.data() + item.size()) bad(key, item, "a comma-separated list of integers");
        out.push_back(s);
    }
    if (out.empty()) throw ConfigError(key + ": at least one seed is required");
    return out;
}

std::string Config::render() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

}  // namespace tfn::cli
