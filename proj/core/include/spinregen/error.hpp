#pragma once

#include <stdexcept>
#include <string>

namespace spinregen {

/// Bad user input: configuration, parameters out of range, unknown keys.
/// The CLI maps this family to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while running a valid configuration. CLI exit code 2.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signal/control overlap contains no atoms.
class DegenerateGeometryError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Integrator step too coarse for the per-step gain linearization.
class StepSizeError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Gain calibration could not bracket the requested target.
class CalibrationError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Number-basis truncation left too much population at the cutoff.
class TruncationError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// A function was called outside its documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace spinregen
