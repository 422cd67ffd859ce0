// Finite product-space measure algebra: joint measures in their three views
// (probability / denormalized / log-likelihood), marginals, conditional
// kernels, and the disintegration operations relating them.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "altproj/errors.hpp"
#include "altproj/numeric.hpp"
#include "altproj/support.hpp"

namespace altproj {

enum class View { Probability, Denormalized, LogLikelihood };

enum class Direction { YGivenX, XGivenY };

/// Axis carrying the conditioning states: X for y|x kernels, Y for x|y.
inline Axis conditioning_axis(Direction d) {
  return d == Direction::YGivenX ? Axis::X : Axis::Y;
}

inline constexpr double kProbabilitySumTol = 1e-12;

/// A measure on the pairs of a SupportSet, stored densely over the grid.
/// Off-support entries are hard zeros (or -inf in the log-likelihood view);
/// entries on the support may be zero in the probability view, which is how
/// pre-burn-in chain states are represented.
class JointMeasure {
 public:
  JointMeasure(SupportSet support, std::vector<double> dense, View view)
      : support_(std::move(support)), weights_(std::move(dense)), view_(view) {
    const std::size_t n =
        static_cast<std::size_t>(support_.nx()) * support_.ny();
    if (weights_.size() != n) {
      throw ShapeMismatch("joint weights have " +
                          std::to_string(weights_.size()) + " entries, grid " +
                          std::to_string(n));
    }
    validate();
  }

  static JointMeasure probability(SupportSet s, std::vector<double> dense) {
    return JointMeasure(std::move(s), std::move(dense), View::Probability);
  }
  static JointMeasure denormalized(SupportSet s, std::vector<double> dense) {
    return JointMeasure(std::move(s), std::move(dense), View::Denormalized);
  }
  static JointMeasure log_likelihood(SupportSet s, std::vector<double> dense) {
    return JointMeasure(std::move(s), std::move(dense), View::LogLikelihood);
  }

  static JointMeasure uniform(const SupportSet& s) {
    std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
    const double v = 1.0 / s.size();
    for (auto [x, y] : s.pairs()) w[s.index(x, y)] = v;
    return probability(s, std::move(w));
  }

  static JointMeasure dirac(const SupportSet& s, int x, int y) {
    if (!s.contains(x, y)) {
      throw SupportMismatch("dirac point (" + std::to_string(x) + "," +
                            std::to_string(y) + ") not in support");
    }
    std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
    w[s.index(x, y)] = 1.0;
    return probability(s, std::move(w));
  }

  const SupportSet& support() const { return support_; }
  View view() const { return view_; }
  int nx() const { return support_.nx(); }
  int ny() const { return support_.ny(); }

  double at(int x, int y) const { return weights_[support_.index(x, y)]; }
  const std::vector<double>& dense() const { return weights_; }

  /// Total mass over T (probability/denormalized views).
  double total_mass() const {
    NeumaierSum acc;
    for (auto [x, y] : support_.pairs()) acc.add(at(x, y));
    return acc.value();
  }

  bool operator==(const JointMeasure& o) const {
    return view_ == o.view_ && support_ == o.support_ &&
           weights_ == o.weights_;
  }
  bool operator!=(const JointMeasure& o) const { return !(*this == o); }

 private:
  void validate() {
    const char* names[] = {"probability", "denormalized", "log-likelihood"};
    const char* view_name = names[static_cast<int>(view_)];
    for (int x = 0; x < support_.nx(); ++x) {
      for (int y = 0; y < support_.ny(); ++y) {
        const double v = weights_[support_.index(x, y)];
        if (support_.contains(x, y)) {
          if (view_ == View::LogLikelihood) {
            if (!std::isfinite(v)) {
              throw SpecValidationError("log-likelihood entries finite",
                                        entry_str(x, y, v));
            }
          } else if (!(v >= 0.0) || !std::isfinite(v)) {
            throw SpecValidationError(
                std::string(view_name) + " weights nonnegative and finite",
                entry_str(x, y, v));
          } else if (view_ == View::Denormalized && v == 0.0) {
            throw SpecValidationError("denormalized weights strictly positive",
                                      entry_str(x, y, v));
          }
        } else {
          if (view_ == View::LogLikelihood) {
            // Off-support log-likelihood slots are forced to -inf so that
            // exp of the dense array is again a measure on T.
            weights_[support_.index(x, y)] =
                -std::numeric_limits<double>::infinity();
          } else if (v != 0.0) {
            throw SpecValidationError("off-support entries are hard zeros",
                                      entry_str(x, y, v));
          }
        }
      }
    }
    if (view_ == View::Probability) {
      const double total = total_mass();
      if (std::abs(total - 1.0) > kProbabilitySumTol) {
        throw SpecValidationError(
            "probability weights sum to 1",
            "total mass " + std::to_string(total));
      }
    }
  }

  static std::string entry_str(int x, int y, double v) {
    return "entry (" + std::to_string(x) + "," + std::to_string(y) + ") = " +
           std::to_string(v);
  }

  SupportSet support_;
  std::vector<double> weights_;
  View view_;
};

/// True iff pi is strictly positive on every pair of T.
inline bool has_full_support(const JointMeasure& pi) {
  for (auto [x, y] : pi.support().pairs()) {
    if (!(pi.at(x, y) > 0.0)) return false;
  }
  return true;
}

class MarginalDistribution {
 public:
  MarginalDistribution(Axis axis, std::vector<double> weights)
      : axis_(axis), weights_(std::move(weights)) {
    if (weights_.empty()) {
      throw ShapeMismatch("marginal has no states");
    }
    NeumaierSum acc;
    for (double v : weights_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw SpecValidationError("marginal weights nonnegative",
                                  std::to_string(v));
      }
      acc.add(v);
    }
    if (std::abs(acc.value() - 1.0) > kProbabilitySumTol) {
      throw SpecValidationError("marginal weights sum to 1",
                                "total " + std::to_string(acc.value()));
    }
  }

  Axis axis() const { return axis_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double at(int s) const { return weights_[static_cast<std::size_t>(s)]; }
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const MarginalDistribution& o) const {
    return axis_ == o.axis_ && weights_ == o.weights_;
  }

 private:
  Axis axis_;
  std::vector<double> weights_;
};

/// A row-stochastic family P[y|x] (or P[x|y]) over the carrier T. Values are
/// stored densely over the grid; entries off T are hard zeros, and each
/// conditioning state's row over T sums to 1. Rows may contain zeros on T
/// (kernels derived from a measure without full support); the chain spec
/// additionally requires strict positivity on T.
class ConditionalKernel {
 public:
  ConditionalKernel(Direction direction, SupportSet support,
                    std::vector<double> dense)
      : direction_(direction),
        support_(std::move(support)),
        values_(std::move(dense)) {
    const std::size_t n =
        static_cast<std::size_t>(support_.nx()) * support_.ny();
    if (values_.size() != n) {
      throw ShapeMismatch("kernel values have " +
                          std::to_string(values_.size()) + " entries, grid " +
                          std::to_string(n));
    }
    for (int x = 0; x < support_.nx(); ++x) {
      for (int y = 0; y < support_.ny(); ++y) {
        const double v = values_[support_.index(x, y)];
        if (!support_.contains(x, y)) {
          if (v != 0.0) {
            throw SpecValidationError(
                "kernel entries are 0 off the support mask",
                "(" + std::to_string(x) + "," + std::to_string(y) + ")");
          }
        } else if (!(v >= 0.0) || !std::isfinite(v)) {
          throw SpecValidationError("kernel entries nonnegative",
                                    std::to_string(v));
        }
      }
    }
    const Axis cond = conditioning_axis(direction_);
    for (int s = 0; s < support_.dim(cond); ++s) {
      NeumaierSum acc;
      for (auto [x, y] : support_.pairs()) {
        if ((cond == Axis::X ? x : y) == s) acc.add(values_[support_.index(x, y)]);
      }
      if (std::abs(acc.value() - 1.0) > kProbabilitySumTol) {
        throw SpecValidationError(
            "kernel rows sum to 1",
            std::string(1, axis_name(cond)) + "=" + std::to_string(s) +
                " sums to " + std::to_string(acc.value()));
      }
    }
  }

  Direction direction() const { return direction_; }
  Axis conditioned_on() const { return conditioning_axis(direction_); }
  const SupportSet& support() const { return support_; }

  /// P[y|x] when direction is YGivenX, P[x|y] otherwise.
  double at(int x, int y) const { return values_[support_.index(x, y)]; }
  const std::vector<double>& dense() const { return values_; }

  /// True iff the kernel is strictly positive on every pair of T.
  bool positive_on_support() const {
    for (auto [x, y] : support_.pairs()) {
      if (!(at(x, y) > 0.0)) return false;
    }
    return true;
  }

  bool operator==(const ConditionalKernel& o) const {
    return direction_ == o.direction_ && support_ == o.support_ &&
           values_ == o.values_;
  }

 private:
  Direction direction_;
  SupportSet support_;
  std::vector<double> values_;
};

/// Marginal of a probability joint along the given axis.
inline MarginalDistribution marginal(const JointMeasure& pi, Axis axis) {
  if (pi.view() != View::Probability) {
    throw Error("marginal requires a probability view");
  }
  std::vector<NeumaierSum> bins(static_cast<std::size_t>(pi.support().dim(axis)));
  for (auto [x, y] : pi.support().pairs()) {
    bins[axis == Axis::X ? x : y].add(pi.at(x, y));
  }
  std::vector<double> w(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) w[i] = bins[i].value();
  return MarginalDistribution(axis, std::move(w));
}

/// Disintegrates pi into the conditional family of the given direction.
/// Throws ZeroMarginal when a conditioning state carries no mass.
inline ConditionalKernel conditional(const JointMeasure& pi, Direction dir) {
  if (pi.view() != View::Probability) {
    throw Error("conditional requires a probability view");
  }
  const Axis cond = conditioning_axis(dir);
  const MarginalDistribution m = marginal(pi, cond);
  for (int s = 0; s < m.size(); ++s) {
    if (!(m.at(s) > 0.0)) throw ZeroMarginal(axis_name(cond), s);
  }
  std::vector<double> vals(pi.dense().size(), 0.0);
  for (auto [x, y] : pi.support().pairs()) {
    vals[pi.support().index(x, y)] =
        pi.at(x, y) / m.at(cond == Axis::X ? x : y);
  }
  return ConditionalKernel(dir, pi.support(), std::move(vals));
}

/// Couples a conditional kernel with a marginal on its conditioning axis:
/// result(x,y) = P[y|x] * marg(x) (resp. P[x|y] * marg(y)), renormalized to
/// total mass exactly 1 so long iterate traces do not drift. Kernel rows are
/// divided by their own sums first, which keeps the conditioning marginal of
/// the result within 1e-14 of marg.
inline JointMeasure joint_from(const ConditionalKernel& kernel,
                               const MarginalDistribution& marg) {
  const Axis cond = kernel.conditioned_on();
  if (marg.axis() != cond) {
    throw AxisMismatch("kernel conditions on " +
                       std::string(1, axis_name(cond)) + ", marginal is on " +
                       std::string(1, axis_name(marg.axis())));
  }
  if (marg.size() != kernel.support().dim(cond)) {
    throw ShapeMismatch("marginal has " + std::to_string(marg.size()) +
                        " states, kernel expects " +
                        std::to_string(kernel.support().dim(cond)));
  }
  const SupportSet& s = kernel.support();
  std::vector<NeumaierSum> row_sums(static_cast<std::size_t>(s.dim(cond)));
  for (auto [x, y] : s.pairs()) {
    row_sums[cond == Axis::X ? x : y].add(kernel.at(x, y));
  }
  std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
  NeumaierSum total;
  for (auto [x, y] : s.pairs()) {
    const int c = cond == Axis::X ? x : y;
    const double rs = row_sums[c].value();
    const double v = rs > 0.0 ? kernel.at(x, y) / rs * marg.at(c) : 0.0;
    w[s.index(x, y)] = v;
    total.add(v);
  }
  const double z = total.value();
  if (!(z > 0.0)) {
    throw DegenerateSupport("coupled measure has zero total mass");
  }
  for (auto [x, y] : s.pairs()) w[s.index(x, y)] /= z;
  return JointMeasure::probability(s, std::move(w));
}

/// Max-norm violation of the disintegration pi = kernel x marginal:
/// max over T of |pi(x,y) - kernel(x,y) * marg(cond)|.
inline double check_disintegration(const JointMeasure& pi,
                                   const ConditionalKernel& kernel) {
  if (pi.support() != kernel.support()) {
    throw SupportMismatch("measure and kernel live on different carriers");
  }
  const Axis cond = kernel.conditioned_on();
  const MarginalDistribution m = marginal(pi, cond);
  double worst = 0.0;
  for (auto [x, y] : pi.support().pairs()) {
    const double coupled = kernel.at(x, y) * m.at(cond == Axis::X ? x : y);
    worst = std::max(worst, std::abs(pi.at(x, y) - coupled));
  }
  return worst;
}

}  // namespace altproj
