#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ganshm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates a precondition (bad dimension, odd
// window length, out-of-range probability, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// The input stream is too short for the requested operation.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Input samples contain NaN/Inf or otherwise unusable values.
class InvalidData : public Error {
 public:
  using Error::Error;
};

// An object is used outside its valid lifecycle (stale cache, empty
// histogram, untuned system, ...).
class InvalidState : public Error {
 public:
  using Error::Error;
};

// Optimization produced non-finite losses, gradients or parameters.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// A spectrum has no energy, so normalized quantities are undefined.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

// A fitted model cannot score inputs (e.g. zero training mean likelihood).
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

// Mixture fitting collapsed (e.g. all samples identical); callers usually
// treat this as "one cluster".
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file. Carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t byte_offset)
      : Error(message + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

}  // namespace ganshm
