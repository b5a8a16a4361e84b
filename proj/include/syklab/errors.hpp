#pragma once

#include <stdexcept>
#include <string>

namespace syklab {

// Precondition violated by the caller (bad N, index out of range, mismatched
// dimensions, malformed input files).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Operator lacks a structure the operation relies on, e.g. parity
// block-diagonality. Carries the offending norm.
struct StructureError : std::runtime_error {
    StructureError(const std::string& what, double leaked)
        : std::runtime_error(what), leaked_norm(leaked) {}
    double leaked_norm;
};

// A numerical post-condition failed (eigensolver residual, non-real
// coefficients where real ones are required).
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
    double residual;
};

struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace syklab
