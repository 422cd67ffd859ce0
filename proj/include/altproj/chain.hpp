// Alternating chain dynamics: the spec type bundling two compatible
// conditionals with the derived Edwards-Sokal coupling and burn-in time,
// exact half-step evolution of the product-chain distribution, the induced
// primal/dual transition matrices, ergodicity checks, and stationary
// distributions by power iteration.

#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "altproj/divergence.hpp"
#include "altproj/errors.hpp"
#include "altproj/measure.hpp"
#include "altproj/support.hpp"

namespace altproj {

inline constexpr double kEsCompatibilityTol = 1e-8;
inline constexpr double kEsDisintegrationTol = 1e-10;
inline constexpr double kStationaryTol = 1e-13;
inline constexpr long kStationaryMaxIters = 1'000'000;

/// Row-stochastic transition matrix on one coordinate space.
class TransitionMatrix {
 public:
  TransitionMatrix(Axis space, int n, std::vector<double> rows)
      : space_(space), n_(n), rows_(std::move(rows)) {
    if (n_ <= 0 || rows_.size() != static_cast<std::size_t>(n_) * n_) {
      throw ShapeMismatch("transition matrix must be n x n");
    }
    for (int i = 0; i < n_; ++i) {
      NeumaierSum acc;
      for (int j = 0; j < n_; ++j) {
        const double v = at(i, j);
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw SpecValidationError("transition entries nonnegative",
                                    std::to_string(v));
        }
        acc.add(v);
      }
      if (std::abs(acc.value() - 1.0) > kProbabilitySumTol) {
        throw SpecValidationError(
            "transition rows sum to 1",
            "row " + std::to_string(i) + " sums to " +
                std::to_string(acc.value()));
      }
    }
  }

  Axis space() const { return space_; }
  int size() const { return n_; }
  double at(int i, int j) const {
    return rows_[static_cast<std::size_t>(i) * n_ + j];
  }

 private:
  Axis space_;
  int n_;
  std::vector<double> rows_;
};

struct ErgodicityReport {
  bool irreducible = false;
  bool aperiodic = false;
  int period = 0;  // gcd of cycle lengths through state 0's component
};

/// Irreducibility via strong connectivity of the positive-entry digraph;
/// period via the BFS level-difference gcd, aperiodic iff it is 1.
inline ErgodicityReport check_ergodic(const TransitionMatrix& m) {
  const int n = m.size();
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        const double w = transpose ? m.at(v, u) : m.at(u, v);
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return seen;
  };
  const std::vector<char> fwd = reach(false);
  const std::vector<char> bwd = reach(true);
  ErgodicityReport rep;
  rep.irreducible = true;
  for (int v = 0; v < n; ++v) {
    if (!fwd[v] || !bwd[v]) rep.irreducible = false;
  }

  // BFS levels from state 0; every positive edge (u,v) inside the reached
  // set contributes |level(u) + 1 - level(v)| to the period gcd.
  std::vector<int> level(n, -1);
  std::queue<int> q;
  q.push(0);
  level[0] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (m.at(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < n; ++u) {
    if (level[u] < 0) continue;
    for (int v = 0; v < n; ++v) {
      if (m.at(u, v) > 0.0 && level[v] >= 0) {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  rep.period = g;
  rep.aperiodic = (g == 1);
  return rep;
}

/// Stationary distribution of an ergodic transition matrix by power
/// iteration from uniform, stopping when successive iterates agree within
/// tol in max norm.
inline MarginalDistribution stationary(const TransitionMatrix& m,
                                       double tol = kStationaryTol,
                                       long max_iters = kStationaryMaxIters) {
  const ErgodicityReport rep = check_ergodic(m);
  if (!rep.irreducible || !rep.aperiodic) {
    throw NotErgodic(std::string("matrix is ") +
                     (rep.irreducible ? "" : "reducible ") +
                     (rep.aperiodic ? "" : "periodic"));
  }
  const int n = m.size();
  std::vector<double> pi(n, 1.0 / n), next(n, 0.0);
  for (long it = 0; it < max_iters; ++it) {
    for (int j = 0; j < n; ++j) {
      NeumaierSum acc;
      for (int i = 0; i < n; ++i) acc.add(pi[i] * m.at(i, j));
      next[j] = acc.value();
    }
    NeumaierSum total;
    for (double v : next) total.add(v);
    for (double& v : next) v /= total.value();
    double delta = 0.0;
    for (int j = 0; j < n; ++j) delta = std::max(delta, std::abs(next[j] - pi[j]));
    pi.swap(next);
    if (delta <= tol) {
      return MarginalDistribution(m.space(), std::move(pi));
    }
  }
  throw NotConverged(max_iters);
}

/// Primal transition matrix on X: M(x,x') = sum_y P[y|x] P[x'|y].
inline TransitionMatrix primal_kernel(const ConditionalKernel& y_given_x,
                                      const ConditionalKernel& x_given_y) {
  if (y_given_x.direction() != Direction::YGivenX ||
      x_given_y.direction() != Direction::XGivenY) {
    throw AxisMismatch("primal_kernel expects (y|x, x|y) kernels");
  }
  if (y_given_x.support() != x_given_y.support()) {
    throw SupportMismatch("kernels live on different carriers");
  }
  const SupportSet& s = y_given_x.support();
  const int nx = s.nx();
  std::vector<double> rows(static_cast<std::size_t>(nx) * nx, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int xp = 0; xp < nx; ++xp) {
      NeumaierSum acc;
      for (int y = 0; y < s.ny(); ++y) {
        acc.add(y_given_x.at(x, y) * x_given_y.at(xp, y));
      }
      rows[static_cast<std::size_t>(x) * nx + xp] = acc.value();
    }
  }
  return TransitionMatrix(Axis::X, nx, std::move(rows));
}

/// Dual transition matrix on Y: N(y,y') = sum_x P[x|y] P[y'|x].
inline TransitionMatrix dual_kernel(const ConditionalKernel& y_given_x,
                                    const ConditionalKernel& x_given_y) {
  if (y_given_x.direction() != Direction::YGivenX ||
      x_given_y.direction() != Direction::XGivenY) {
    throw AxisMismatch("dual_kernel expects (y|x, x|y) kernels");
  }
  if (y_given_x.support() != x_given_y.support()) {
    throw SupportMismatch("kernels live on different carriers");
  }
  const SupportSet& s = y_given_x.support();
  const int ny = s.ny();
  std::vector<double> rows(static_cast<std::size_t>(ny) * ny, 0.0);
  for (int y = 0; y < ny; ++y) {
    for (int yp = 0; yp < ny; ++yp) {
      NeumaierSum acc;
      for (int x = 0; x < s.nx(); ++x) {
        acc.add(x_given_y.at(x, y) * y_given_x.at(x, yp));
      }
      rows[static_cast<std::size_t>(y) * ny + yp] = acc.value();
    }
  }
  return TransitionMatrix(Axis::Y, ny, std::move(rows));
}

/// The unique coupling consistent with both conditionals: the stationary
/// distribution of the primal chain coupled back through P[y|x], then
/// cross-checked against the x|y disintegration. Throws
/// CompatibilityViolation when the kernels admit no common coupling.
inline JointMeasure es_from_kernels(const ConditionalKernel& y_given_x,
                                    const ConditionalKernel& x_given_y,
                                    double compat_tol = kEsCompatibilityTol,
                                    double stationary_tol = kStationaryTol) {
  const TransitionMatrix m = primal_kernel(y_given_x, x_given_y);
  const MarginalDistribution mu = stationary(m, stationary_tol);
  const JointMeasure es = joint_from(y_given_x, mu);
  const double v = check_disintegration(es, x_given_y);
  if (v > compat_tol) throw CompatibilityViolation(v);
  return es;
}

namespace detail {

// Boolean half-step on support masks: an S1 step fills every row of T that
// is currently occupied, an S2 step fills occupied columns. Both fills are
// extensive, so supports grow monotonically and T is absorbing.
inline void support_half_step(const SupportSet& s, std::vector<char>& occ,
                              bool s1_step) {
  const int nx = s.nx();
  const int ny = s.ny();
  std::vector<char> hit(static_cast<std::size_t>(s1_step ? nx : ny), 0);
  for (auto [x, y] : s.pairs()) {
    if (occ[s.index(x, y)]) hit[s1_step ? x : y] = 1;
  }
  for (auto [x, y] : s.pairs()) {
    occ[s.index(x, y)] = hit[s1_step ? x : y];
  }
}

inline int burn_in_from_support(const SupportSet& s, int cap) {
  const int total = s.size();
  // One occupancy mask per Dirac start; all evolve in lockstep.
  std::vector<std::vector<char>> occs;
  occs.reserve(total);
  std::vector<int> counts;
  for (auto [x, y] : s.pairs()) {
    std::vector<char> occ(static_cast<std::size_t>(s.nx()) * s.ny(), 0);
    occ[s.index(x, y)] = 1;
    occs.push_back(std::move(occ));
    counts.push_back(1);
  }
  auto all_full = [&]() {
    for (int c : counts) {
      if (c != total) return false;
    }
    return true;
  };
  if (all_full()) return 0;
  for (int t = 0; t < cap; ++t) {
    const bool s1_step = (t % 2 == 0);
    for (std::size_t i = 0; i < occs.size(); ++i) {
      support_half_step(s, occs[i], s1_step);
      int c = 0;
      for (auto [x, y] : s.pairs()) c += occs[i][s.index(x, y)];
      counts[i] = c;
    }
    if (all_full()) return t + 1;
  }
  throw CapExceeded("no full-support time within " + std::to_string(cap) +
                    " half-steps");
}

}  // namespace detail

struct SpecOptions {
  double compat_tol = kEsCompatibilityTol;
  double es_tol = kEsDisintegrationTol;
  double stationary_tol = kStationaryTol;
  int burn_in_cap = 0;  // 0 = default 2 (nx^2 + ny^2)
};

/// An alternating Markov chain: carrier T, the two conditionals (both
/// strictly positive exactly on T), the derived ES coupling and the derived
/// burn-in time in half-steps.
class AlternatingChainSpec {
 public:
  static AlternatingChainSpec from_kernels(
      const ConditionalKernel& y_given_x, const ConditionalKernel& x_given_y,
      const SpecOptions& opt = SpecOptions()) {
    if (y_given_x.direction() != Direction::YGivenX ||
        x_given_y.direction() != Direction::XGivenY) {
      throw AxisMismatch("spec expects (y|x, x|y) kernels");
    }
    if (y_given_x.support() != x_given_y.support()) {
      throw SupportMismatch("kernels live on different carriers");
    }
    if (!y_given_x.positive_on_support() || !x_given_y.positive_on_support()) {
      throw SpecValidationError("kernels supported exactly on T",
                                "a kernel entry vanishes on the carrier");
    }
    const TransitionMatrix m = primal_kernel(y_given_x, x_given_y);
    const ErgodicityReport rep = check_ergodic(m);
    if (!rep.irreducible || !rep.aperiodic) {
      throw NotErgodic(std::string("primal chain is ") +
                       (rep.irreducible ? "" : "reducible ") +
                       (rep.aperiodic
                            ? ""
                            : "periodic (period " +
                                  std::to_string(rep.period) + ")"));
    }
    JointMeasure es =
        es_from_kernels(y_given_x, x_given_y, opt.compat_tol, opt.stationary_tol);
    const double v1 = check_disintegration(es, y_given_x);
    const double v2 = check_disintegration(es, x_given_y);
    if (std::max(v1, v2) > opt.es_tol) {
      throw SpecValidationError(
          "es satisfies both disintegrations",
          "worst violation " + std::to_string(std::max(v1, v2)));
    }
    for (Axis a : {Axis::X, Axis::Y}) {
      const MarginalDistribution em = marginal(es, a);
      for (int s = 0; s < em.size(); ++s) {
        if (!(em.at(s) > 0.0)) {
          throw SpecValidationError("es marginals have full support",
                                    std::string(1, axis_name(a)) + "=" +
                                        std::to_string(s) + " has no mass");
        }
      }
    }
    const SupportSet& s = y_given_x.support();
    const int cap = opt.burn_in_cap > 0
                        ? opt.burn_in_cap
                        : 2 * (s.nx() * s.nx() + s.ny() * s.ny());
    const int t0 = detail::burn_in_from_support(s, cap);
    return AlternatingChainSpec(y_given_x, x_given_y, std::move(es), t0);
  }

  /// Assembles a spec without derivation or validation. Intended for
  /// verification harnesses that need deliberately inconsistent specs.
  static AlternatingChainSpec assemble_unchecked(
      const ConditionalKernel& y_given_x, const ConditionalKernel& x_given_y,
      JointMeasure es, int burn_in) {
    return AlternatingChainSpec(y_given_x, x_given_y, std::move(es), burn_in);
  }

  const SupportSet& support() const { return y_given_x_.support(); }
  const ConditionalKernel& kernel_y_given_x() const { return y_given_x_; }
  const ConditionalKernel& kernel_x_given_y() const { return x_given_y_; }
  const JointMeasure& es() const { return es_; }
  int burn_in() const { return burn_in_; }

 private:
  AlternatingChainSpec(ConditionalKernel y_given_x,
                       ConditionalKernel x_given_y, JointMeasure es,
                       int burn_in)
      : y_given_x_(std::move(y_given_x)),
        x_given_y_(std::move(x_given_y)),
        es_(std::move(es)),
        burn_in_(burn_in) {}

  ConditionalKernel y_given_x_;
  ConditionalKernel x_given_y_;
  JointMeasure es_;
  int burn_in_;
};

struct ChainState {
  int t = 0;
  JointMeasure pi;
};

/// Coordinate resampling: couples the kernel with pi's marginal on the
/// kernel's conditioning axis. This single code path is shared by the chain
/// evolution and the S1/S2 projections, which are equal by the structural
/// theorem.
inline JointMeasure resample(const JointMeasure& pi,
                             const ConditionalKernel& kernel) {
  return joint_from(kernel, marginal(pi, kernel.conditioned_on()));
}

/// One half-step. Even t applies the y|x kernel (lands in S1, preserves the
/// X-marginal); odd t applies the x|y kernel (lands in S2, preserves the
/// Y-marginal).
inline ChainState half_step(const ChainState& state,
                            const AlternatingChainSpec& spec) {
  if (state.pi.support() != spec.support()) {
    throw SupportMismatch("state lives on a different carrier than the spec");
  }
  const ConditionalKernel& k = (state.t % 2 == 0) ? spec.kernel_y_given_x()
                                                  : spec.kernel_x_given_y();
  return ChainState{state.t + 1, resample(state.pi, k)};
}

/// Exact distribution trajectory: pi0 followed by `steps` half-steps.
inline std::vector<ChainState> run(const AlternatingChainSpec& spec,
                                   const JointMeasure& pi0, int steps) {
  if (pi0.support() != spec.support()) {
    throw SupportMismatch("pi0 lives on a different carrier than the spec");
  }
  if (pi0.view() != View::Probability) {
    throw Error("run requires a probability initial distribution");
  }
  std::vector<ChainState> states;
  states.reserve(static_cast<std::size_t>(steps) + 1);
  states.push_back(ChainState{0, pi0});
  for (int t = 0; t < steps; ++t) {
    states.push_back(half_step(states.back(), spec));
  }
  return states;
}

inline TransitionMatrix primal_kernel(const AlternatingChainSpec& spec) {
  return primal_kernel(spec.kernel_y_given_x(), spec.kernel_x_given_y());
}

inline TransitionMatrix dual_kernel(const AlternatingChainSpec& spec) {
  return dual_kernel(spec.kernel_y_given_x(), spec.kernel_x_given_y());
}

/// First half-step index from which every Dirac start has support exactly T
/// (and keeps it, the fills being extensive). `cap` <= 0 selects the default
/// 2 (nx^2 + ny^2).
inline int burn_in(const AlternatingChainSpec& spec, int cap = 0) {
  const SupportSet& s = spec.support();
  const int effective =
      cap > 0 ? cap : 2 * (s.nx() * s.nx() + s.ny() * s.ny());
  return detail::burn_in_from_support(s, effective);
}

}  // namespace altproj
