#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

// Input fails a mathematical precondition (bad parameter range, wrong mode, ...).
struct InvalidParams : std::invalid_argument {
  explicit InvalidParams(const std::string& msg) : std::invalid_argument(msg) {}
};

// Argument outside the domain of a special function or measure.
struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Declared integrand behavior makes the integral divergent.
struct NonIntegrable : std::invalid_argument {
  explicit NonIntegrable(const std::string& msg) : std::invalid_argument(msg) {}
};

// Iterative scheme exhausted its refinement or iteration budget.
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

// Result exceeds double range.
struct Overflow : std::runtime_error {
  explicit Overflow(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky pivot failure in a pencil solve.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& msg) : std::runtime_error(msg) {}
};

// Random generation could not satisfy the requested constraints.
struct ConstraintUnsatisfiable : std::runtime_error {
  explicit ConstraintUnsatisfiable(const std::string& msg) : std::runtime_error(msg) {}
};

// A norm required as a divisor or under a square root vanished.
struct DegenerateNorm : std::runtime_error {
  explicit DegenerateNorm(const std::string& msg) : std::runtime_error(msg) {}
};

// Unknown preset name passed to a dispatcher.
struct UnknownPreset : std::invalid_argument {
  explicit UnknownPreset(const std::string& msg) : std::invalid_argument(msg) {}
};

// Reserved: requested symbolic operation would leave the Gauss-power family.
// No current operation throws it; kept so callers can write a stable handler.
struct FamilyClosure : std::runtime_error {
  explicit FamilyClosure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ckn
