#pragma once

#include <stdexcept>
#include <string>

namespace bragg {

/// Raised for malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Base for failures of a numerical procedure (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Norm escaped into the outermost guard sites of a ladder window.
class TruncationError : public NumericalError {
public:
    TruncationError(const std::string& what, double leakage)
        : NumericalError(what), leakage_(leakage) {}
    double leakage() const noexcept { return leakage_; }

private:
    double leakage_;
};

class CalibrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace bragg
