#pragma once

#include <stdexcept>
#include <string>

namespace rkhs {

// Requested kernel/derivative combination has no analytic form.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Gram or constraint system could not be factorized.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scene generation exhausted its rejection budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed scene/config file or invalid configuration value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rkhs
