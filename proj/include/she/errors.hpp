#pragma once

#include <stdexcept>
#include <string>

namespace she {

/// Raised when caller-supplied parameters violate a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot meet its numerical contract
/// (integrator tolerance, missing extremum, ...).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace she
