// Theorem harnesses: numerically certify the projection characterization of
// the half-steps and the duality theorem (Pythagorean identity, monotone
// entropy decay, primal/dual chain) on a given spec, producing pass/fail
// reports with worst-case violations.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "altproj/chain.hpp"
#include "altproj/divergence.hpp"
#include "altproj/instances.hpp"
#include "altproj/measure.hpp"
#include "altproj/numeric.hpp"
#include "altproj/projection.hpp"

namespace altproj {

struct CheckResult {
  std::string name;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline CheckResult make_check(std::string name, double violation, double tol) {
  CheckResult c{std::move(name), violation, tol, violation <= tol};
  return c;
}

/// Per-half-step divergence record. Columns are the reverse-KL distances
/// rkl(pi_ES, pi_t), rkl(mu_ES, mu_t), rkl(nu_ES, nu_t) and the step progress
/// rkl(pi_t, pi_{t-1}). Rows where pi_t lacks full support on T (before the
/// run's burn-in) are marked +inf: the log-likelihood geometry behind these
/// quantities only exists once the support fills.
struct TraceRow {
  int t = 0;
  DivergenceValue d_joint = DivergenceValue::infinity();
  DivergenceValue d_mu = DivergenceValue::infinity();
  DivergenceValue d_nu = DivergenceValue::infinity();
  DivergenceValue progress = DivergenceValue::infinity();
};

struct DivergenceTrace {
  std::vector<TraceRow> rows;
  int full_support_from = 0;  // first row with finite entries
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  DivergenceTrace trace;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

inline DivergenceTrace trace_from_states(const AlternatingChainSpec& spec,
                                         const std::vector<ChainState>& states) {
  const JointMeasure& es = spec.es();
  const MarginalDistribution mu_es = marginal(es, Axis::X);
  const MarginalDistribution nu_es = marginal(es, Axis::Y);
  DivergenceTrace trace;
  trace.full_support_from = -1;
  for (std::size_t i = 0; i < states.size(); ++i) {
    TraceRow row;
    row.t = states[i].t;
    if (has_full_support(states[i].pi)) {
      if (trace.full_support_from < 0) {
        trace.full_support_from = states[i].t;
      }
      row.d_joint = kl(states[i].pi, es);
      row.d_mu = kl(marginal(states[i].pi, Axis::X), mu_es);
      row.d_nu = kl(marginal(states[i].pi, Axis::Y), nu_es);
      row.progress = i == 0 ? DivergenceValue::finite(0.0)
                            : kl(states[i - 1].pi, states[i].pi);
    }
    trace.rows.push_back(row);
  }
  if (trace.full_support_from < 0) {
    trace.full_support_from = static_cast<int>(states.size());
  }
  return trace;
}

/// The divergence trace of a run; rows before the run reaches full support
/// are +inf-valued.
inline DivergenceTrace emit_trace(const AlternatingChainSpec& spec,
                                  const JointMeasure& pi0, int steps) {
  return trace_from_states(spec, run(spec, pi0, steps));
}

/// Certifies the structural theorem on `trials` seeded random full-support
/// starts, one even and one odd half-step each: (a) the half-step equals the
/// S1/S2 projection bitwise, (b) it matches the independent
/// convex-minimization oracle within 1e-6, (c) its log-likelihood lies in the
/// step's affine subspace with residual <= 1e-10, and (d) it minimizes the
/// dual Bregman divergence over sampled members of the log-denormalization.
/// The spec's disintegration invariants are prechecked; on a corrupted spec
/// they fail and are reported rather than thrown.
inline VerificationReport verify_projection_theorem(
    const AlternatingChainSpec& spec, int trials, std::uint64_t seed) {
  VerificationReport report;
  report.checks.push_back(
      make_check("es_disintegration_y_given_x",
                 check_disintegration(spec.es(), spec.kernel_y_given_x()),
                 kEsDisintegrationTol));
  report.checks.push_back(
      make_check("es_disintegration_x_given_y",
                 check_disintegration(spec.es(), spec.kernel_x_given_y()),
                 kEsDisintegrationTol));

  const AffineSubspace sub1 = affine_subspace(spec.kernel_y_given_x());
  const AffineSubspace sub2 = affine_subspace(spec.kernel_x_given_y());

  Rng rng(seed);
  double worst_exact = 0.0;
  double worst_oracle = 0.0;
  double worst_residual = 0.0;
  double worst_dual = 0.0;

  auto max_abs_diff = [](const JointMeasure& a, const JointMeasure& b) {
    double worst = 0.0;
    for (auto [x, y] : a.support().pairs()) {
      worst = std::max(worst, std::abs(a.at(x, y) - b.at(x, y)));
    }
    return worst;
  };

  // Random member of log S~: offset plus random multiples of the block
  // indicators.
  auto sample_subspace_point = [&](const AffineSubspace& sub) {
    std::vector<double> l = sub.offset;
    for (const auto& b : sub.basis) {
      const double c = rng.uniform(-2.0, 2.0);
      for (auto [x, y] : sub.support.pairs()) {
        l[sub.support.index(x, y)] += c * b[sub.support.index(x, y)];
      }
    }
    return JointMeasure::log_likelihood(sub.support, std::move(l));
  };

  JointMeasure last_start = JointMeasure::uniform(spec.support());
  for (int trial = 0; trial < trials; ++trial) {
    const JointMeasure start = random_full_support(spec.support(), rng);
    last_start = start;

    const struct {
      const ConditionalKernel& kernel;
      const AffineSubspace& sub;
      int parity;
    } sides[2] = {{spec.kernel_y_given_x(), sub1, 0},
                  {spec.kernel_x_given_y(), sub2, 1}};
    for (const auto& side : sides) {
      const ChainState state{side.parity, start};
      const ChainState next = half_step(state, spec);
      const JointMeasure proj =
          side.parity == 0 ? project_s1(start, side.kernel)
                           : project_s2(start, side.kernel);
      worst_exact = std::max(worst_exact, max_abs_diff(next.pi, proj));

      const JointMeasure oracle =
          side.parity == 0 ? oracle_project_s1(start, side.kernel)
                           : oracle_project_s2(start, side.kernel);
      worst_oracle = std::max(worst_oracle, max_abs_diff(proj, oracle));

      const JointMeasure lp = log_denormalize(proj);
      worst_residual = std::max(worst_residual, affine_residual(lp, side.sub));

      const JointMeasure l0 = log_denormalize(start);
      const double base = bregman_dual(lp, l0);
      for (int k = 0; k < 100; ++k) {
        const double candidate =
            bregman_dual(sample_subspace_point(side.sub), l0);
        worst_dual = std::max(worst_dual, base - candidate);
      }
    }
  }
  report.checks.push_back(make_check("half_step_equals_projection",
                                     worst_exact, 0.0));
  report.checks.push_back(make_check("projection_matches_oracle",
                                     worst_oracle, 1e-6));
  report.checks.push_back(make_check("log_affine_residual",
                                     worst_residual, 1e-10));
  report.checks.push_back(make_check("dual_form_minimality",
                                     worst_dual, 1e-8));
  report.trace = emit_trace(spec, last_start, 20);
  return report;
}

/// Certifies the Pythagorean identity
///   rkl(pi_ES, pi_t) = rkl(pi_ES, pi_{t+1}) + rkl(pi_{t+1}, pi_t)
/// at every half-step t >= t0, to relative tolerance 1e-10. This is the
/// generic Bregman Pythagorean inequality holding with equality, the
/// projection sets being affine in the log-denormalization.
inline VerificationReport verify_pythagorean(const AlternatingChainSpec& spec,
                                             const JointMeasure& pi0,
                                             int steps) {
  VerificationReport report;
  report.trace = emit_trace(spec, pi0, steps);
  const auto& rows = report.trace.rows;
  const int t0 = std::max(spec.burn_in(), report.trace.full_support_from);
  double worst_rel = 0.0;
  double worst_negative_progress = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].t < t0) continue;
    const double d_t = rows[i].d_joint.value();
    const double d_next = rows[i + 1].d_joint.value();
    const double prog = rows[i + 1].progress.value();
    const double resid = std::abs(d_t - d_next - prog);
    worst_rel = std::max(worst_rel, resid / std::max(1.0, d_t));
    worst_negative_progress = std::max(worst_negative_progress, -prog);
  }
  report.checks.push_back(
      make_check("pythagorean_identity_relative", worst_rel, 1e-10));
  report.checks.push_back(make_check("progress_nonnegative",
                                     worst_negative_progress, 1e-12));
  return report;
}

/// Certifies the duality chain at every even t >= t0,
///   d_mu(t) >= d_mu(t+1) >= d_nu(t+1) >= d_nu(t+2) >= d_mu(t+2),
/// with slack >= -1e-12, together with the data-processing bounds
/// d_mu(t) <= d_joint(t), d_nu(t) <= d_joint(t) and the monotone decay of
/// the joint divergence.
inline VerificationReport verify_duality_chain(const AlternatingChainSpec& spec,
                                               const JointMeasure& pi0,
                                               int steps) {
  VerificationReport report;
  report.trace = emit_trace(spec, pi0, steps);
  const auto& rows = report.trace.rows;
  const int t0 = std::max(spec.burn_in(), report.trace.full_support_from);
  double worst_chain = 0.0;
  double worst_dp_mu = 0.0;
  double worst_dp_nu = 0.0;
  double worst_monotone = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].t < t0) continue;
    worst_dp_mu = std::max(worst_dp_mu,
                           rows[i].d_mu.value() - rows[i].d_joint.value());
    worst_dp_nu = std::max(worst_dp_nu,
                           rows[i].d_nu.value() - rows[i].d_joint.value());
    if (i + 1 < rows.size()) {
      worst_monotone = std::max(
          worst_monotone, rows[i + 1].d_joint.value() - rows[i].d_joint.value());
    }
    if (rows[i].t % 2 == 0 && i + 2 < rows.size()) {
      const double slacks[4] = {
          rows[i].d_mu.value() - rows[i + 1].d_mu.value(),
          rows[i + 1].d_mu.value() - rows[i + 1].d_nu.value(),
          rows[i + 1].d_nu.value() - rows[i + 2].d_nu.value(),
          rows[i + 2].d_nu.value() - rows[i + 2].d_mu.value()};
      for (double s : slacks) worst_chain = std::max(worst_chain, -s);
    }
  }
  report.checks.push_back(make_check("duality_chain_slack", worst_chain, 1e-12));
  report.checks.push_back(make_check("data_processing_mu", worst_dp_mu, 1e-12));
  report.checks.push_back(make_check("data_processing_nu", worst_dp_nu, 1e-12));
  report.checks.push_back(
      make_check("joint_rkl_monotone", worst_monotone, 1e-12));
  return report;
}

}  // namespace altproj
