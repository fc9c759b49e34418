#pragma once

#include <stdexcept>
#include <string>

namespace skidsim {

// Argument outside the domain where a formula is defined (|s| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite plant state or input; the engine aborts the run and marks the
// trace faulted.
class IntegrationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario or terrain configuration violates the schema. `line` is 1-based,
// 0 when no source position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace skidsim
