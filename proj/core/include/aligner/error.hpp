#pragma once

#include <stdexcept>
#include <string>

namespace aligner {

// Malformed or inconsistent input data (bad files, dimension mismatches,
// invariant violations). The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Container bytes that cannot be decoded.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

// Invalid configuration values (alpha out of range, non-positive
// temperature, ...). The CLI maps these to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace aligner
