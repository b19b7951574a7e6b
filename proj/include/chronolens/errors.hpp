#pragma once

#include <stdexcept>
#include <string>

namespace chronolens {

// Error taxonomy shared by the library and the CLI exit-code mapping.
// std::invalid_argument is used directly for plain precondition violations.

// Pulse support or stretched field does not fit the time grid.
struct WindowError : std::runtime_error {
  explicit WindowError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested feature is below the grid resolution.
struct ResolutionError : std::runtime_error {
  explicit ResolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

// ODE step-size precondition violated.
struct StepError : std::runtime_error {
  explicit StepError(const std::string& msg) : std::runtime_error(msg) {}
};

// Measurement windows unusable (overlapping pixels).
struct MeasurementError : std::runtime_error {
  explicit MeasurementError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside a model's declared validity range.
struct ValidityError : std::runtime_error {
  explicit ValidityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario or dispersion file unreadable or malformed.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested design point cannot meet its budget.
struct FeasibilityError : std::runtime_error {
  explicit FeasibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace chronolens
