#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace srd {

using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.3.1";

/// Bad argument to a numerical kernel (empty sample, probability out of range, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent or incomplete configuration (missing parameter, wrong arity).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Objective or constraints are not finite at the starting point of a solve.
class InvalidStart : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite function value during finite differencing.
class NonFiniteValue : public std::runtime_error {
public:
    NonFiniteValue(const std::string& what, std::size_t component)
        : std::runtime_error(what + " (component " + std::to_string(component) + ")"),
          component_(component) {}
    std::size_t component() const noexcept { return component_; }

private:
    std::size_t component_;
};

/// Requirement gradient vanishes, so no ascent direction exists.
class DegenerateGradient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace srd
