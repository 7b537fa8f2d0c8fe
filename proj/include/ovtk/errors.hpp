#pragma once

#include <stdexcept>
#include <string>

namespace ovtk {

/// Bad user input: malformed config, unknown key, horizon off the grid, ...
/// CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: state blow-up, non-finite values, rank collapse that
/// cannot be repaired, failed validation. CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ovtk
