#pragma once

#include <stdexcept>
#include <string>

namespace pdmfc {

/// Configuration rejected (validation failure, missing table, bad file content).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: value sweep blow-up, stability bound violated,
/// negative density mass, diverging multipliers.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure while reading inputs or writing artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pdmfc
