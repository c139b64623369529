#pragma once

#include <stdexcept>
#include <string>

namespace spreader_gnn {

// Base of every error the library raises. Subclasses name the failure class
// so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN or Inf produced where finite values are required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Labels or dataset contents violate a contract.
class DataError : public Error {
public:
    using Error::Error;
};

// A configuration value is outside its valid range.
class ConfigError : public Error {
public:
    using Error::Error;
};

// API misuse, e.g. stepping an optimizer without gradients.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed input file; the message carries file and line.
class ParseError : public Error {
public:
    using Error::Error;
};

// Missing or unreadable file.
class IoError : public Error {
public:
    using Error::Error;
};

// Checkpoint or model tag does not match what the caller expects.
class IncompatibilityError : public Error {
public:
    using Error::Error;
};

}  // namespace spreader_gnn
