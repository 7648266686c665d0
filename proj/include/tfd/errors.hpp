/// @file errors.hpp
/// @brief Exception hierarchy; each class maps to a distinct CLI exit code.

#pragma once

#include <stdexcept>
#include <string>

namespace tfd {

/// @brief Invalid or inconsistent configuration / input files (exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// @brief Iterative solver failed to reach its tolerance (exit code 3).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// @brief Numeric degeneracy: violated precondition, degenerate interface
/// point, loss of a structural invariant (exit code 4).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tfd
