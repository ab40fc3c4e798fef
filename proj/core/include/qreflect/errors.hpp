#pragma once

#include <stdexcept>
#include <string>

namespace qreflect {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition was violated (bad parameter or range).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// The Morse/Casimir matching problem has no unique root in its bracket.
class MatchingError : public Error {
  public:
    using Error::Error;
};

/// A requested diffraction order does not propagate, or needs a grating.
class KinematicsError : public Error {
  public:
    using Error::Error;
};

/// The close-coupling propagation or S-matrix extraction failed.
class SolverError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file (presets, CSV, config).
class ParseError : public Error {
  public:
    using Error::Error;
};

} // namespace qreflect
