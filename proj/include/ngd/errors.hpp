#pragma once

#include <stdexcept>
#include <string>

namespace ngd {

/// Malformed arguments: wrong dimensions, non-finite entries, out-of-range
/// parameters.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mathematically inadmissible input, e.g. a covariance that is not positive
/// definite or a singular transformation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Overflow or a non-finite value produced during an iteration.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, int line, const std::string& what)
        : std::runtime_error(format(key, line, what)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& what) {
        std::string msg = "config";
        if (line > 0) msg += " line " + std::to_string(line);
        if (!key.empty()) msg += " key '" + key + "'";
        return msg + ": " + what;
    }

    std::string key_;
    int line_;
};

class BatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ngd
