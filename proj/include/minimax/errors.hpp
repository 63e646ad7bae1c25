#pragma once

#include <stdexcept>
#include <string>

namespace minimax {

// Invalid arguments or violated preconditions (bad dimensions, non-SPD
// metrics, out-of-range parameters).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Factorization failures, singular replicates, truncations that never close.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incomplete configuration. `key()` names the offending entry
// when one can be identified.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key = {})
      : std::runtime_error(message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minimax
