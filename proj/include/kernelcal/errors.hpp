#pragma once

#include <stdexcept>
#include <string>

namespace kernelcal {

// Invalid parameter value (non-positive lengthscale, negative scale factor, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Operands live on different domains or have mismatched sizes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Data fails a validity check (NaN/Inf entries, non-PSD beyond tolerance).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration or allocation guard tripped.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Internal numeric guard (singular solve, vanished normalizer).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calibration target outside the achievable range; message carries the range.
struct InfeasibleError : std::runtime_error {
    InfeasibleError(const std::string& what, double lo, double hi)
        : std::runtime_error(what), achievable_lo(lo), achievable_hi(hi) {}
    double achievable_lo;
    double achievable_hi;
};

// Configuration failed validation; `field` is the JSON path of the offender.
struct SchemaError : std::runtime_error {
    SchemaError(const std::string& field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), field(field_path) {}
    std::string field;
};

// Policy comparison rejected (seed mismatch or unequal budgets).
struct ComparisonRefused : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kernelcal
