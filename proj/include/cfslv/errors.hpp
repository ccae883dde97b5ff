#pragma once

#include <stdexcept>
#include <string>

namespace cfslv {

// Error taxonomy shared across the library. The CLI maps these onto
// process exit codes (data 2, numerics 3, calibration 4).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, quote sets, curves).
class DataError : public Error {
public:
    using Error::Error;
};

// A query outside the supported range of a curve, grid or path set.
class RangeError : public Error {
public:
    using Error::Error;
};

// Invalid configuration (grids, budgets, flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Model parameters violating their admissible domain.
class ParamError : public Error {
public:
    using Error::Error;
};

// A value outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Calendar cannot support the requested schedule.
class CalendarError : public Error {
public:
    using Error::Error;
};

// Numerical breakdown (NaN, divergence) inside a solver or simulation.
class NumericsError : public Error {
public:
    using Error::Error;
};

// An optimizer failed its tolerance within budget.
class CalibrationError : public Error {
public:
    using Error::Error;
};

}  // namespace cfslv
