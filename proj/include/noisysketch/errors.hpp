#pragma once

#include <stdexcept>
#include <string>

namespace noisysketch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An operation that divides by ‖v‖₂ was handed the zero vector.
class ZeroVector : public Error {
  public:
    ZeroVector() : Error("zero vector: operation requires a nonzero input") {}
    explicit ZeroVector(const std::string& what) : Error(what) {}
};

/// A sparse vector violated its storage invariants.
class BadVector : public Error {
  public:
    using Error::Error;
};

/// Operator shape invariants violated (m, n, s out of range).
class BadDimensions : public Error {
  public:
    using Error::Error;
};

/// Operand length does not match the operator's input dimension.
class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// Explicit materialization above the configured entry cap.
class TooLarge : public Error {
  public:
    using Error::Error;
};

/// A bound's parameters fall outside the domain where the formula holds.
class BadParams : public Error {
  public:
    using Error::Error;
};

/// An experiment configuration that does not fit the requested experiment.
class ConfigMismatch : public Error {
  public:
    using Error::Error;
};

/// File could not be opened, read or written, or its contents did not parse.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace noisysketch
