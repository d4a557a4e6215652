#pragma once

#include <stdexcept>
#include <string>

namespace aapl {

// Operand shapes do not line up for an op.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced or consumed, or a value outside its numeric domain.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Object used in a state that its contract forbids (stale tape, missing grad, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed configuration, file, or argument.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace aapl
