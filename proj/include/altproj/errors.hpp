// Error types thrown across the library. Every message names the violated
// invariant or precondition so callers (and the CLI) can report it verbatim.

#pragma once

#include <stdexcept>
#include <string>

namespace altproj {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A structural invariant of a spec, measure or kernel does not hold.
class SpecValidationError : public Error {
 public:
  SpecValidationError(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& detail)
      : Error("shape mismatch: " + detail) {}
};

class AxisMismatch : public Error {
 public:
  explicit AxisMismatch(const std::string& detail)
      : Error("axis mismatch: " + detail) {}
};

class SupportMismatch : public Error {
 public:
  explicit SupportMismatch(const std::string& detail)
      : Error("support mismatch: " + detail) {}
};

/// Conditioning on a state with zero marginal mass.
class ZeroMarginal : public Error {
 public:
  ZeroMarginal(char axis_name, int state)
      : Error(std::string("zero marginal: conditioning state ") + axis_name +
              "=" + std::to_string(state) + " has no mass"),
        state_(state) {}
  int state() const noexcept { return state_; }

 private:
  int state_;
};

class NonPositiveInput : public Error {
 public:
  explicit NonPositiveInput(const std::string& detail)
      : Error("non-positive input: " + detail) {}
};

class NonPositiveEntry : public Error {
 public:
  explicit NonPositiveEntry(const std::string& detail)
      : Error("non-positive entry: " + detail) {}
};

class AbsoluteContinuityViolation : public Error {
 public:
  explicit AbsoluteContinuityViolation(const std::string& detail)
      : Error("absolute continuity violation: " + detail) {}
};

class DegenerateSupport : public Error {
 public:
  explicit DegenerateSupport(const std::string& detail)
      : Error("degenerate support: " + detail) {}
};

class NotConverged : public Error {
 public:
  explicit NotConverged(long iterations)
      : Error("not converged after " + std::to_string(iterations) +
              " iterations"),
        iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

class NotErgodic : public Error {
 public:
  explicit NotErgodic(const std::string& detail)
      : Error("not ergodic: " + detail) {}
};

/// The two conditionals admit no common coupling.
class CompatibilityViolation : public Error {
 public:
  explicit CompatibilityViolation(double max_violation)
      : Error("incompatible conditionals: worst disintegration violation " +
              std::to_string(max_violation)),
        max_violation_(max_violation) {}
  double max_violation() const noexcept { return max_violation_; }

 private:
  double max_violation_;
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& detail)
      : Error("cap exceeded: " + detail) {}
};

class GenerationFailed : public Error {
 public:
  explicit GenerationFailed(const std::string& detail)
      : Error("generation failed: " + detail) {}
};

}  // namespace altproj
