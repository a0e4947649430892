#pragma once

#include <stdexcept>
#include <string>

namespace occupancy {

// Malformed or inconsistent input data (CSV rows, schedules, model files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arguments that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Correlation statistics are undefined when one side has zero variance.
class DegenerateVariance : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Training produced a non-finite or runaway error value.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace occupancy
