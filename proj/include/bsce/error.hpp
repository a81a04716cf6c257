#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsce {

// Base type for everything this toolkit throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad value or shape handed to an operation (out-of-domain probability,
// length mismatch, crop larger than the image, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration (bad field, unknown key, infeasible
// dataset spec).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

// File exists but its content is damaged (truncation, bad field value).
class CorruptDataError : public IoError {
public:
    using IoError::IoError;
};

// File carries an unrecognized magic / format version.
class VersionError : public IoError {
public:
    using IoError::IoError;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, std::size_t epoch)
        : Error(msg), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_ = 0;
};

}  // namespace bsce
