#pragma once

#include <stdexcept>
#include <string>

namespace salsaloc {

/// Malformed or inconsistent input data (files, trajectories, audio).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value. `key()` names the offending setting.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Non-finite values or divergence during numeric work.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace salsaloc
