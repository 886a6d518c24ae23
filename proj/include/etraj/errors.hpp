#pragma once

#include <stdexcept>
#include <string>

namespace etraj {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Argument-level errors: the caller passed a value outside the contract.
class ArgumentError : public Error {
public:
    using Error::Error;
};

class TooSmall : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

class EvenStepCount : public ArgumentError {
public:
    explicit EvenStepCount(int n)
        : ArgumentError("step count must be odd and >= 3, got " + std::to_string(n)) {}
};

class StepMismatch : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

class UnsupportedMode : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

class SupportTooSmall : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

class TooSmallForScales : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Raised when an optimization diverges.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

}  // namespace etraj
