// Reverse-KL projections onto the matched-conditional sets S1/S2, an
// independent convex-minimization oracle over the convex-hull weights, and
// the affine log-denormalization machinery for log S1~ / log S2~.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "altproj/chain.hpp"
#include "altproj/divergence.hpp"
#include "altproj/errors.hpp"
#include "altproj/measure.hpp"
#include "altproj/numeric.hpp"

namespace altproj {

inline constexpr double kOracleGradTol = 1e-9;
inline constexpr double kOracleGridResolution = 1e-3;

namespace detail {

inline void require_full_support(const JointMeasure& pi, const char* op) {
  if (!has_full_support(pi)) {
    throw DegenerateSupport(std::string(op) +
                            " requires full support on T (post burn-in)");
  }
}

}  // namespace detail

/// RKL projection of pi onto S1 = {joints with y|x conditional P[y|x]}:
/// the coupling of P[y|x] with pi's X-marginal. Shares its code path with
/// the even half-step.
inline JointMeasure project_s1(const JointMeasure& pi,
                               const ConditionalKernel& y_given_x) {
  if (y_given_x.direction() != Direction::YGivenX) {
    throw AxisMismatch("project_s1 expects a y|x kernel");
  }
  if (pi.support() != y_given_x.support()) {
    throw SupportMismatch("measure and kernel live on different carriers");
  }
  detail::require_full_support(pi, "project_s1");
  return resample(pi, y_given_x);
}

/// RKL projection of pi onto S2; mirror of project_s1.
inline JointMeasure project_s2(const JointMeasure& pi,
                               const ConditionalKernel& x_given_y) {
  if (x_given_y.direction() != Direction::XGivenY) {
    throw AxisMismatch("project_s2 expects an x|y kernel");
  }
  if (pi.support() != x_given_y.support()) {
    throw SupportMismatch("measure and kernel live on different carriers");
  }
  detail::require_full_support(pi, "project_s2");
  return resample(pi, x_given_y);
}

namespace detail {

// Objective for the oracle: S1 (resp. S2) is the convex hull of the per-state
// couplings mu_s = sum P[.|s] e_(s,.), so a member is pi_w with weights w on
// the simplex and f(w) = rkl(pi_w, pi) = kl(pi, pi_w). Grouping the sum by
// conditioning state gives f(w) = C - sum_s mass_s log w_s with
// C = sum pi log(pi / K) and mass_s the mass of pi in block s.
struct OracleObjective {
  std::vector<double> block_mass;
  double constant = 0.0;

  OracleObjective(const JointMeasure& pi, const ConditionalKernel& k) {
    const Axis cond = k.conditioned_on();
    const int n = pi.support().dim(cond);
    std::vector<NeumaierSum> mass(static_cast<std::size_t>(n));
    NeumaierSum c;
    for (auto [x, y] : pi.support().pairs()) {
      const int s = cond == Axis::X ? x : y;
      const double p = pi.at(x, y);
      mass[s].add(p);
      c.add(p * std::log(p / k.at(x, y)));
    }
    block_mass.resize(n);
    for (int s = 0; s < n; ++s) block_mass[s] = mass[s].value();
    constant = c.value();
  }

  double eval(const std::vector<double>& w) const {
    NeumaierSum acc;
    for (std::size_t s = 0; s < w.size(); ++s) {
      if (!(w[s] > 0.0)) return std::numeric_limits<double>::infinity();
      acc.add(-block_mass[s] * std::log(w[s]));
    }
    return constant + acc.value();
  }

  void gradient(const std::vector<double>& w, std::vector<double>& g) const {
    for (std::size_t s = 0; s < w.size(); ++s) {
      g[s] = -block_mass[s] / w[s];
    }
  }

  // Diagonal of the Hessian, for the line-search initialization.
  double curvature_along(const std::vector<double>& w,
                         const std::vector<double>& d) const {
    NeumaierSum acc;
    for (std::size_t s = 0; s < w.size(); ++s) {
      acc.add(block_mass[s] * d[s] * d[s] / (w[s] * w[s]));
    }
    return acc.value();
  }
};

// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double csum = 0.0;
  double theta = 0.0;
  int rho = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    acc += u[k];
    const double t = (acc - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) {
      rho = static_cast<int>(k + 1);
      csum = acc;
    }
  }
  theta = (csum - 1.0) / rho;
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

// Euclidean norm of the gradient projected onto the simplex tangent space
// {v : sum v = 0}; at interior points this is the projection onto the
// tangent cone.
inline double tangent_grad_norm(const std::vector<double>& g,
                                std::vector<double>* tangent = nullptr) {
  NeumaierSum mean_acc;
  for (double v : g) mean_acc.add(v);
  const double mean = mean_acc.value() / static_cast<double>(g.size());
  NeumaierSum sq;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const double t = g[s] - mean;
    if (tangent) (*tangent)[s] = t;
    sq.add(t * t);
  }
  return std::sqrt(std::max(sq.value(), 0.0));
}

// Projected gradient descent with Armijo backtracking, stopping when the
// gradient projected to the tangent cone is below tol. Each line search
// starts from the Newton step along the projected direction (the objective's
// curvature is analytic), so the iteration lands near the 1-D minimizer and
// keeps making measurable progress at accuracies where plain function
// comparisons go blind. Iterates stay interior: the objective is +inf on the
// boundary whenever the corresponding block mass is positive, so the line
// search rejects boundary points. When the decrease of f falls below double
// resolution, acceptance switches to a strict decrease of the tangent
// gradient norm, which stays informative at that scale.
inline std::vector<double> minimize_on_simplex(const OracleObjective& obj,
                                               std::vector<double> w,
                                               double tol) {
  const std::size_t n = w.size();
  std::vector<double> g(n), gt(n), t(n), trial(n);
  double f = obj.eval(w);
  const int max_iters = 10000;
  for (int it = 0; it < max_iters; ++it) {
    obj.gradient(w, g);
    const double pg = tangent_grad_norm(g, &t);
    if (pg <= tol) return w;

    const double curvature = obj.curvature_along(w, t);
    double step = curvature > 0.0 ? (pg * pg) / curvature : 1.0;
    // Keep the initial trial strictly inside the simplex.
    for (std::size_t s = 0; s < n; ++s) {
      if (t[s] > 0.0) step = std::min(step, 0.999 * w[s] / t[s]);
    }

    const double flat_slack = 4e-16 * std::max(1.0, std::abs(f));
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t s = 0; s < n; ++s) trial[s] = w[s] - step * t[s];
      trial = project_simplex(std::move(trial));
      const double ft = obj.eval(trial);
      NeumaierSum dir;
      bool moved = false;
      for (std::size_t s = 0; s < n; ++s) {
        dir.add(g[s] * (trial[s] - w[s]));
        moved = moved || trial[s] != w[s];
      }
      bool ok = moved && std::isfinite(ft) && ft <= f + 1e-4 * dir.value();
      if (!ok && moved && std::isfinite(ft) && ft <= f + flat_slack) {
        obj.gradient(trial, gt);
        ok = tangent_grad_norm(gt) < pg;
      }
      if (ok) {
        w = trial;
        f = std::min(f, ft);
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    if (!accepted) throw NotConverged(it);
  }
  throw NotConverged(max_iters);
}

// Exhaustive simplex grid at the given resolution for dimensions <= 3,
// returning the best grid point as a seed for the local polish.
inline std::vector<double> grid_seed(const OracleObjective& obj, int n,
                                     double resolution) {
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  std::vector<double> best;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    return {1.0};
  }
  if (n == 2) {
    for (int k = 0; k <= steps; ++k) {
      w[0] = static_cast<double>(k) / steps;
      w[1] = 1.0 - w[0];
      const double f = obj.eval(w);
      if (f < best_f) {
        best_f = f;
        best = w;
      }
    }
    return best;
  }
  for (int k1 = 0; k1 <= steps; ++k1) {
    for (int k2 = 0; k2 + k1 <= steps; ++k2) {
      w[0] = static_cast<double>(k1) / steps;
      w[1] = static_cast<double>(k2) / steps;
      w[2] = 1.0 - w[0] - w[1];
      const double f = obj.eval(w);
      if (f < best_f) {
        best_f = f;
        best = w;
      }
    }
  }
  return best;
}

inline JointMeasure oracle_project(const JointMeasure& pi,
                                   const ConditionalKernel& kernel,
                                   double tol) {
  if (pi.support() != kernel.support()) {
    throw SupportMismatch("measure and kernel live on different carriers");
  }
  require_full_support(pi, "oracle projection");
  const Axis cond = kernel.conditioned_on();
  const int n = pi.support().dim(cond);
  const OracleObjective obj(pi, kernel);
  std::vector<double> seed;
  if (n <= 3) {
    seed = grid_seed(obj, n, kOracleGridResolution);
    // The grid lattice includes boundary points where f = +inf; nudge those
    // inward before polishing.
    bool boundary = false;
    for (double v : seed) boundary = boundary || !(v > 0.0);
    if (boundary) {
      for (double& v : seed) v = (v + kOracleGridResolution) /
                                 (1.0 + n * kOracleGridResolution);
    }
  } else {
    seed.assign(static_cast<std::size_t>(n), 1.0 / n);
  }
  const std::vector<double> w = minimize_on_simplex(obj, std::move(seed), tol);
  return joint_from(kernel, MarginalDistribution(cond, w));
}

}  // namespace detail

/// Independent numerical S1 projection: minimizes rkl(pi_w, pi) over the
/// convex-hull weights w by exhaustive grid scan (|X| <= 3) followed by
/// projected gradient polish, or projected gradient descent with Armijo
/// backtracking from uniform otherwise, to first-order stationarity tol.
inline JointMeasure oracle_project_s1(const JointMeasure& pi,
                                      const ConditionalKernel& y_given_x,
                                      double tol = kOracleGradTol) {
  if (y_given_x.direction() != Direction::YGivenX) {
    throw AxisMismatch("oracle_project_s1 expects a y|x kernel");
  }
  return detail::oracle_project(pi, y_given_x, tol);
}

inline JointMeasure oracle_project_s2(const JointMeasure& pi,
                                      const ConditionalKernel& x_given_y,
                                      double tol = kOracleGradTol) {
  if (x_given_y.direction() != Direction::XGivenY) {
    throw AxisMismatch("oracle_project_s2 expects an x|y kernel");
  }
  return detail::oracle_project(pi, x_given_y, tol);
}

/// Coordinate-wise logarithm of a strictly positive measure on T.
inline JointMeasure log_denormalize(const JointMeasure& pi) {
  if (pi.view() == View::LogLikelihood) {
    throw Error("log_denormalize takes a (de)normalized measure");
  }
  std::vector<double> l(pi.dense().size(), 0.0);
  for (auto [x, y] : pi.support().pairs()) {
    const double v = pi.at(x, y);
    if (!(v > 0.0)) {
      throw NonPositiveEntry("log_denormalize at (" + std::to_string(x) + "," +
                             std::to_string(y) + ")");
    }
    l[pi.support().index(x, y)] = std::log(v);
  }
  return JointMeasure::log_likelihood(pi.support(), std::move(l));
}

/// Coordinate-wise exponential, inverse of log_denormalize.
inline JointMeasure exp_denormalize(const JointMeasure& l) {
  if (l.view() != View::LogLikelihood) {
    throw Error("exp_denormalize takes a log-likelihood view");
  }
  std::vector<double> w(l.dense().size(), 0.0);
  for (auto [x, y] : l.support().pairs()) {
    w[l.support().index(x, y)] = std::exp(l.at(x, y));
  }
  return JointMeasure::denormalized(l.support(), std::move(w));
}

/// The affine subspace log S~ of a kernel's log-denormalization: offset
/// log P on T, one indicator basis vector per conditioning state. Basis
/// vectors have disjoint supports and are mutually orthogonal.
struct AffineSubspace {
  SupportSet support;
  std::vector<double> offset;               // dense over the grid, 0 off T
  std::vector<std::vector<double>> basis;   // one indicator per cond. state
};

inline AffineSubspace affine_subspace(const ConditionalKernel& kernel) {
  const SupportSet& s = kernel.support();
  const Axis cond = kernel.conditioned_on();
  const int n = s.dim(cond);
  AffineSubspace sub{s, std::vector<double>(
                            static_cast<std::size_t>(s.nx()) * s.ny(), 0.0),
                     {}};
  sub.basis.assign(static_cast<std::size_t>(n),
                   std::vector<double>(
                       static_cast<std::size_t>(s.nx()) * s.ny(), 0.0));
  for (auto [x, y] : s.pairs()) {
    const double k = kernel.at(x, y);
    if (!(k > 0.0)) {
      throw NonPositiveEntry("affine_subspace needs a kernel positive on T");
    }
    sub.offset[s.index(x, y)] = std::log(k);
    sub.basis[cond == Axis::X ? x : y][s.index(x, y)] = 1.0;
  }
  return sub;
}

/// Least-squares distance of (l - offset) to span(basis). The basis blocks
/// partition T, so the projection is the blockwise mean and the residual is
/// computable per conditioning block.
inline double affine_residual(const JointMeasure& l, const AffineSubspace& sub) {
  if (l.view() != View::LogLikelihood) {
    throw Error("affine_residual takes a log-likelihood view");
  }
  if (l.support() != sub.support) {
    throw SupportMismatch("log-likelihood and subspace carriers differ");
  }
  const SupportSet& s = sub.support;
  const std::size_t nblocks = sub.basis.size();
  std::vector<NeumaierSum> sums(nblocks);
  std::vector<int> counts(nblocks, 0);
  auto block_of = [&](int x, int y) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      if (sub.basis[b][s.index(x, y)] != 0.0) return b;
    }
    throw Error("pair outside every basis block");
  };
  for (auto [x, y] : s.pairs()) {
    const std::size_t b = block_of(x, y);
    sums[b].add(l.at(x, y) - sub.offset[s.index(x, y)]);
    counts[b] += 1;
  }
  NeumaierSum sq;
  for (auto [x, y] : s.pairs()) {
    const std::size_t b = block_of(x, y);
    const double mean = sums[b].value() / counts[b];
    const double d = (l.at(x, y) - sub.offset[s.index(x, y)]) - mean;
    sq.add(d * d);
  }
  return std::sqrt(std::max(sq.value(), 0.0));
}

}  // namespace altproj
