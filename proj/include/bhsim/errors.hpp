#pragma once

#include <stdexcept>
#include <string>

namespace bhsim {

// Invalid configuration (bad grid dimensions, non-power-of-two BS count, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violated precondition or invariant on otherwise valid configuration.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// File and serialization failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bhsim
