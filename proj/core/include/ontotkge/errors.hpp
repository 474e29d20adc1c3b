#pragma once

#include <stdexcept>
#include <string>

namespace onto {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes incompatible with the requested operation.
struct ShapeError : Error {
    using Error::Error;
};

// Input outside the mathematical domain of an operation (log of a
// non-positive value, zero-norm vector in a cosine, ...).
struct DomainError : Error {
    using Error::Error;
};

// A forward value or loss became NaN/Inf. Forward results are required
// to stay finite; hitting this aborts the surrounding computation.
struct NumericError : Error {
    using Error::Error;
};

// Malformed or inconsistent dataset files.
struct DataError : Error {
    using Error::Error;
};

// Bad run configuration (unknown key, invalid value, missing file).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace onto
