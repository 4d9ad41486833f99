#pragma once

#include <stdexcept>
#include <string>

namespace explab {

/// Operand shapes disagree (vector lengths, matrix sizes).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver or simulation could not produce a finite answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (unknown keys, bad pairings, bad ranges).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace explab
