// Divergences used by the projection analysis: KL and reverse KL, the
// entropy Bregman divergence B_H on denormalized measures together with its
// scalar/KL decomposition, the dual divergence B_{H*} on log-likelihoods,
// and the KL chain rule over the product space.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "altproj/errors.hpp"
#include "altproj/measure.hpp"
#include "altproj/numeric.hpp"

namespace altproj {

/// Extended-real divergence value. +inf is an explicit variant so that it
/// never enters a floating-point sum; comparisons against +inf are exact.
class DivergenceValue {
 public:
  static DivergenceValue finite(double v) { return DivergenceValue(true, v); }
  static DivergenceValue infinity() { return DivergenceValue(false, 0.0); }

  bool is_finite() const { return finite_; }

  /// Finite value; calling this on +inf is a logic error.
  double value() const {
    if (!finite_) throw Error("divergence value is +inf");
    return v_;
  }

  bool operator==(const DivergenceValue& o) const {
    return finite_ == o.finite_ && (!finite_ || v_ == o.v_);
  }
  bool operator!=(const DivergenceValue& o) const { return !(*this == o); }

 private:
  DivergenceValue(bool finite, double v) : finite_(finite), v_(v) {}
  bool finite_;
  double v_;
};

namespace detail {

// KL over aligned weight sequences with the 0 log 0 = 0 convention;
// +inf as soon as p puts mass where q does not.
struct KlAccumulator {
  NeumaierSum acc;
  bool infinite = false;

  void add(double p, double q) {
    if (infinite || p == 0.0) return;
    if (q == 0.0) {
      infinite = true;
      return;
    }
    acc.add(p * std::log(p / q));
  }
  DivergenceValue result() const {
    return infinite ? DivergenceValue::infinity()
                    : DivergenceValue::finite(acc.value());
  }
};

}  // namespace detail

/// D_KL(p, q) = sum p log(p/q) over the common carrier.
inline DivergenceValue kl(const JointMeasure& p, const JointMeasure& q) {
  if (p.support() != q.support()) {
    throw ShapeMismatch("kl of joints on different carriers");
  }
  if (p.view() != View::Probability || q.view() != View::Probability) {
    throw Error("kl requires probability views");
  }
  detail::KlAccumulator a;
  for (auto [x, y] : p.support().pairs()) a.add(p.at(x, y), q.at(x, y));
  return a.result();
}

inline DivergenceValue kl(const MarginalDistribution& p,
                          const MarginalDistribution& q) {
  if (p.axis() != q.axis() || p.size() != q.size()) {
    throw ShapeMismatch("kl of marginals on different index sets");
  }
  detail::KlAccumulator a;
  for (int s = 0; s < p.size(); ++s) a.add(p.at(s), q.at(s));
  return a.result();
}

/// Reverse KL: D_RKL(p, q) := D_KL(q, p).
inline DivergenceValue rkl(const JointMeasure& p, const JointMeasure& q) {
  return kl(q, p);
}
inline DivergenceValue rkl(const MarginalDistribution& p,
                           const MarginalDistribution& q) {
  return kl(q, p);
}

/// Scalar entropy Bregman divergence b_h(a, b) = a log(a/b) - a + b for
/// the scalar entropy h(x) = x log x - x.
inline double b_h(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw NonPositiveInput("b_h requires positive scalars, got a=" +
                           std::to_string(a) + " b=" + std::to_string(b));
  }
  return a * std::log(a / b) - a + b;
}

/// Entropy H(pi) = sum pi log pi - pi over T, defined on the denormalized
/// cone (strictly positive measures). Probability views qualify.
inline double entropy(const JointMeasure& pi) {
  if (pi.view() == View::LogLikelihood) {
    throw Error("entropy is defined on (de)normalized measures");
  }
  NeumaierSum acc;
  for (auto [x, y] : pi.support().pairs()) {
    const double v = pi.at(x, y);
    if (!(v > 0.0)) {
      throw NonPositiveEntry("entropy requires strict positivity on T");
    }
    acc.add(v * std::log(v) - v);
  }
  return acc.value();
}

/// B_H(pi, rho) = sum pi log(pi/rho) - pi + rho over T, both strictly
/// positive. Coincides with D_KL(pi, rho) when both are probabilities.
inline double bregman_entropy(const JointMeasure& pi, const JointMeasure& rho) {
  if (pi.support() != rho.support()) {
    throw SupportMismatch("bregman_entropy on different carriers");
  }
  if (pi.view() == View::LogLikelihood || rho.view() == View::LogLikelihood) {
    throw Error("bregman_entropy takes (de)normalized measures");
  }
  NeumaierSum acc;
  for (auto [x, y] : pi.support().pairs()) {
    const double a = pi.at(x, y);
    const double b = rho.at(x, y);
    if (!(a > 0.0) || !(b > 0.0)) {
      throw NonPositiveEntry("bregman_entropy requires strict positivity on T");
    }
    acc.add(a * std::log(a / b) - a + b);
  }
  return acc.value();
}

/// Splits B_H(pi, rho) = b_h(pi(T), rho(T)) + pi(T) * D_KL(pi/pi(T), rho/rho(T)):
/// the scalar mass term and the mass-scaled KL between the normalizations.
inline std::pair<double, double> decompose_bregman_entropy(
    const JointMeasure& pi, const JointMeasure& rho) {
  if (pi.support() != rho.support()) {
    throw SupportMismatch("decompose_bregman_entropy on different carriers");
  }
  if (pi.view() == View::LogLikelihood || rho.view() == View::LogLikelihood) {
    throw Error("decompose_bregman_entropy takes (de)normalized measures");
  }
  const double mass_pi = pi.total_mass();
  const double mass_rho = rho.total_mass();
  if (!(mass_pi > 0.0) || !(mass_rho > 0.0)) {
    throw NonPositiveEntry("decompose_bregman_entropy needs positive masses");
  }
  const double scalar_part = b_h(mass_pi, mass_rho);
  NeumaierSum acc;
  for (auto [x, y] : pi.support().pairs()) {
    const double a = pi.at(x, y) / mass_pi;
    const double b = rho.at(x, y) / mass_rho;
    if (!(a > 0.0) || !(b > 0.0)) {
      throw NonPositiveEntry("decompose_bregman_entropy requires positivity");
    }
    acc.add(a * std::log(a / b));
  }
  return {scalar_part, mass_pi * acc.value()};
}

/// Dual Bregman divergence B_{H*} on log-likelihoods, with H*(l) = sum exp l:
/// B_{H*}(l1, l2) = sum exp l1 - exp l2 - exp l2 * (l1 - l2).
/// Satisfies B_{H*}(log rho, log pi) = B_H(pi, rho).
inline double bregman_dual(const JointMeasure& l1, const JointMeasure& l2) {
  if (l1.support() != l2.support()) {
    throw ShapeMismatch("bregman_dual on different carriers");
  }
  if (l1.view() != View::LogLikelihood || l2.view() != View::LogLikelihood) {
    throw Error("bregman_dual takes log-likelihood views");
  }
  NeumaierSum acc;
  for (auto [x, y] : l1.support().pairs()) {
    const double a = l1.at(x, y);
    const double b = l2.at(x, y);
    const double eb = std::exp(b);
    acc.add(std::exp(a) - eb - eb * (a - b));
  }
  return acc.value();
}

/// KL chain rule over the product space: for the given axis,
///   D_KL(p, q) = D_KL(p_axis, q_axis)
///              + sum_a D_KL(p[.|a], q[.|a]) * p_axis(a).
/// Returns (marginal_term, conditional_term). Throws when p is not
/// absolutely continuous w.r.t. q (both terms would be infinite).
inline std::pair<double, double> kl_chain_rule(const JointMeasure& p,
                                               const JointMeasure& q,
                                               Axis axis) {
  if (p.support() != q.support()) {
    throw ShapeMismatch("kl_chain_rule on different carriers");
  }
  for (auto [x, y] : p.support().pairs()) {
    if (p.at(x, y) > 0.0 && q.at(x, y) == 0.0) {
      throw AbsoluteContinuityViolation(
          "p has mass at (" + std::to_string(x) + "," + std::to_string(y) +
          ") where q has none");
    }
  }
  const MarginalDistribution pm = marginal(p, axis);
  const MarginalDistribution qm = marginal(q, axis);
  detail::KlAccumulator marg;
  for (int s = 0; s < pm.size(); ++s) marg.add(pm.at(s), qm.at(s));

  // Conditional rows p(.|a) = p(a,.)/pm(a); states with pm(a) = 0 contribute
  // nothing. qm(a) > 0 whenever pm(a) > 0 by absolute continuity.
  NeumaierSum cond;
  for (int s = 0; s < pm.size(); ++s) {
    if (!(pm.at(s) > 0.0)) continue;
    detail::KlAccumulator row;
    for (auto [x, y] : p.support().pairs()) {
      if ((axis == Axis::X ? x : y) != s) continue;
      row.add(p.at(x, y) / pm.at(s), q.at(x, y) / qm.at(s));
    }
    cond.add(row.result().value() * pm.at(s));
  }
  return {marg.result().value(), cond.value()};
}

}  // namespace altproj
