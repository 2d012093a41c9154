#pragma once

#include <stdexcept>
#include <string>

namespace gswf {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument: zero phase point, empty set, mismatched dimensions.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Grid too small or too coarse for the requested object.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Sampled phase or spectral multiplier not resolved by the grid.
class AliasingError : public ResolutionError {
 public:
  using ResolutionError::ResolutionError;
};

// STFT requested too close to the edge of a sampled signal.
class TruncationError : public ResolutionError {
 public:
  using ResolutionError::ResolutionError;
};

// Decay profile has too few reachable samples.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Index pair outside every regime with a known prediction.
class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gswf
