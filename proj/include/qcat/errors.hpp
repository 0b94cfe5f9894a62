// errors.hpp — exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace qcat {

struct QuantizationError : std::runtime_error {
    explicit QuantizationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnitarityError : std::runtime_error {
    explicit UnitarityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonUnitaryInput : std::runtime_error {
    explicit NonUnitaryInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptySample : std::runtime_error {
    explicit EmptySample(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitWindowTooShort : std::runtime_error {
    explicit FitWindowTooShort(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CacheError : std::runtime_error {
    explicit CacheError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qcat
