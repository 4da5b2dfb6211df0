#pragma once

#include <stdexcept>
#include <string>

namespace edrsim {

/// Rejected configuration input. The message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Inputs that are individually well formed but mutually inconsistent,
/// e.g. a joint table whose correlator exceeds the probe strength.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edrsim
