#pragma once

#include <stdexcept>
#include <string>

namespace dekg {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File missing / unreadable / unwritable.
struct FileError : Error {
    using Error::Error;
};

// Malformed input data (bad line, duplicate triple, unknown relation, ...).
struct DataError : Error {
    using Error::Error;
};

// Invalid configuration value or key.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical failure: shape mismatch, non-finite value, trace reuse.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace dekg
