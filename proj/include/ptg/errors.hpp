#pragma once

#include <stdexcept>
#include <string>

namespace ptg {

/// Bad user input: malformed files, invalid config, infeasible requests.
/// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure: singular kernels, diverging optimizations.
/// The CLI maps this to exit code 1.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ptg
