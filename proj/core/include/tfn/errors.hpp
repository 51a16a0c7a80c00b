#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tfn {

/// A kernel control parameter lies outside its admissible box.
class ConstraintError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input file. `location` is a 1-based line number for text
/// formats and a byte offset for binary ones.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t location, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(location) + ": " + what),
          location_(location) {}

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

}  // namespace tfn

namespace tfn {

/// Invalid generator or run specification; `key()` names the offending setting.
class SpecError : public std::invalid_argument {
public:
    SpecError(std::string key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace tfn
