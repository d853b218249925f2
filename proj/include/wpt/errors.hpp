// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wpt {

/// Shape mismatch between operands, or an empty operand where one is required.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value violates a documented precondition (range, normalization, sign).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. The message carries line or field context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The convex solver was handed a start point that is not strictly feasible.
struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Newton iterations did not converge. Carries the best feasible iterate seen.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, std::vector<double> best)
        : std::runtime_error(what), best_iterate(std::move(best)) {}

    std::vector<double> best_iterate;
};

} // namespace wpt
