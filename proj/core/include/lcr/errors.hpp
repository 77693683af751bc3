#pragma once

#include <stdexcept>
#include <string>

namespace lcr {

// Shapes that cannot be combined (mismatched operands, kernel larger than input, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An API called in a state where it is not allowed (step after terminal, backward off-graph).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid hyperparameters or configuration file contents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lcr
