#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mccsim {

/// Base of every error raised by the simulator.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public SimError {
 public:
  using SimError::SimError;
};

class SchedulerError : public SimError {
 public:
  using SimError::SimError;
};

class AllocationError : public SimError {
 public:
  using SimError::SimError;
};

class LogError : public SimError {
 public:
  using SimError::SimError;
};

class IoError : public SimError {
 public:
  using SimError::SimError;
};

/// One problem found in a scenario, with a JSON-pointer-like path to the field.
struct ValidationError {
  std::string path;
  std::string message;

  bool operator==(const ValidationError&) const = default;
};

/// Thrown when a scenario document cannot be turned into a runnable scenario.
class ScenarioError : public SimError {
 public:
  explicit ScenarioError(std::vector<ValidationError> errors);
  ScenarioError(std::string path, std::string message);

  const std::vector<ValidationError>& errors() const noexcept { return errors_; }

 private:
  std::vector<ValidationError> errors_;
};

}  // namespace mccsim
