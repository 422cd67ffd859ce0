// Instance generators: seeded random ergodic chains with full or structured
// support, and the Swendsen-Wang / Potts Edwards-Sokal construction on small
// graphs, enumerated exactly.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "altproj/chain.hpp"
#include "altproj/errors.hpp"
#include "altproj/measure.hpp"
#include "altproj/numeric.hpp"
#include "altproj/support.hpp"

namespace altproj {

inline constexpr long long kDefaultStateCap = 200000;

/// Random full-support probability measure on T: weights uniform on
/// [0.1, 1] (bounded away from 0 so conditionals stay well scaled),
/// normalized.
inline JointMeasure random_full_support(const SupportSet& s, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
  NeumaierSum total;
  for (auto [x, y] : s.pairs()) {
    const double v = rng.uniform(0.1, 1.0);
    w[s.index(x, y)] = v;
    total.add(v);
  }
  for (auto [x, y] : s.pairs()) w[s.index(x, y)] /= total.value();
  return JointMeasure::probability(s, std::move(w));
}

/// Seeded random ergodic instance. Draws a support mask of approximately the
/// given density (every row and column kept nonempty), positive weights on
/// it, derives both conditionals from the normalized joint, and retries with
/// a fresh mask until the primal chain is ergodic (at most 100 attempts).
/// The spec's es then recovers the generating joint within ~1e-12.
inline AlternatingChainSpec random_instance(int nx, int ny, double density,
                                            std::uint64_t seed) {
  if (nx < 1 || ny < 1) {
    throw Error("random_instance: nx and ny must be >= 1");
  }
  if (!(density > 0.0) || density > 1.0) {
    throw Error("random_instance: density must lie in (0, 1]");
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<char> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) {
        mask[static_cast<std::size_t>(x) * ny + y] =
            rng.uniform01() < density ? 1 : 0;
      }
    }
    for (int x = 0; x < nx; ++x) {
      bool hit = false;
      for (int y = 0; y < ny; ++y) hit = hit || mask[static_cast<std::size_t>(x) * ny + y];
      if (!hit) mask[static_cast<std::size_t>(x) * ny + rng.below(ny)] = 1;
    }
    for (int y = 0; y < ny; ++y) {
      bool hit = false;
      for (int x = 0; x < nx; ++x) hit = hit || mask[static_cast<std::size_t>(x) * ny + y];
      if (!hit) mask[static_cast<std::size_t>(rng.below(nx)) * ny + y] = 1;
    }
    std::vector<std::pair<int, int>> pairs;
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) {
        if (mask[static_cast<std::size_t>(x) * ny + y]) pairs.emplace_back(x, y);
      }
    }
    const SupportSet support(nx, ny, std::move(pairs));
    const JointMeasure pi = random_full_support(support, rng);
    const ConditionalKernel k1 = conditional(pi, Direction::YGivenX);
    const ConditionalKernel k2 = conditional(pi, Direction::XGivenY);
    const ErgodicityReport rep = check_ergodic(primal_kernel(k1, k2));
    if (!rep.irreducible || !rep.aperiodic) continue;
    return AlternatingChainSpec::from_kernels(k1, k2);
  }
  throw GenerationFailed("no ergodic instance in 100 attempts (nx=" +
                         std::to_string(nx) + " ny=" + std::to_string(ny) +
                         " density=" + std::to_string(density) + ")");
}

struct GraphSpec {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Potts / random-cluster coupling parameters. X enumerates the q^V
/// colorings (base-q digits, vertex 0 least significant), Y the 2^|E| edge
/// subsets (bitmask in edge-list order).
struct PottsInstance {
  GraphSpec graph;
  int q = 2;
  double beta = 0.0;

  double p() const { return 1.0 - std::exp(-beta); }
};

namespace detail {

inline int count_components(int vertices,
                            const std::vector<std::pair<int, int>>& edges,
                            unsigned long long subset) {
  std::vector<int> parent(vertices);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> stack;
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  int comps = vertices;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!(subset >> e & 1ULL)) continue;
    const int a = find(edges[e].first);
    const int b = find(edges[e].second);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return comps;
}

}  // namespace detail

/// Builds the alternating chain of the Swendsen-Wang dynamics for the given
/// Potts instance by exact enumeration. The joint weight on a coloring c and
/// edge subset A is p^|A| (1-p)^(|E|-|A|) when A contains only edges that are
/// monochromatic under c, and 0 otherwise; edge subsets with no admissible
/// coloring are pruned from Y. The derived conditionals are checked against
/// their closed forms (independent edge inclusion given the coloring, uniform
/// coloring per connected component given the edges) to 1e-12 before the spec
/// is assembled.
inline AlternatingChainSpec potts_instance(const PottsInstance& inst,
                                           long long state_cap = kDefaultStateCap) {
  const int v_count = inst.graph.vertices;
  const auto& edges = inst.graph.edges;
  const int e_count = static_cast<int>(edges.size());
  if (v_count < 1 || inst.q < 1) {
    throw Error("potts_instance: need at least one vertex and one color");
  }
  if (!(inst.beta >= 0.0) || !std::isfinite(inst.beta)) {
    throw SpecValidationError("beta nonnegative", std::to_string(inst.beta));
  }
  for (auto [a, b] : edges) {
    if (a < 0 || a >= v_count || b < 0 || b >= v_count || a == b) {
      throw SpecValidationError("edges join distinct vertices in range",
                                std::to_string(a) + "-" + std::to_string(b));
    }
  }
  double states = 1.0;
  for (int v = 0; v < v_count; ++v) states *= inst.q;
  states *= std::pow(2.0, e_count);
  if (states > static_cast<double>(state_cap)) {
    throw CapExceeded("q^V * 2^|E| = " + std::to_string(states) +
                      " exceeds state cap " + std::to_string(state_cap));
  }

  long long nx = 1;
  for (int v = 0; v < v_count; ++v) nx *= inst.q;
  const long long ny_all = 1LL << e_count;
  const double p = inst.p();

  auto color_of = [&](long long c, int vertex) {
    long long d = c;
    for (int v = 0; v < vertex; ++v) d /= inst.q;
    return static_cast<int>(d % inst.q);
  };
  std::vector<unsigned long long> mono(static_cast<std::size_t>(nx), 0);
  for (long long c = 0; c < nx; ++c) {
    unsigned long long m = 0;
    for (int e = 0; e < e_count; ++e) {
      if (color_of(c, edges[e].first) == color_of(c, edges[e].second)) {
        m |= 1ULL << e;
      }
    }
    mono[static_cast<std::size_t>(c)] = m;
  }

  // Unnormalized weights on the full grid; prune edge subsets that no
  // coloring admits (only relevant at p = 0, where Y collapses to {empty}).
  std::vector<double> raw(static_cast<std::size_t>(nx * ny_all), 0.0);
  std::vector<char> y_used(static_cast<std::size_t>(ny_all), 0);
  for (long long c = 0; c < nx; ++c) {
    for (long long a = 0; a < ny_all; ++a) {
      const auto bits = static_cast<unsigned long long>(a);
      if ((bits & ~mono[static_cast<std::size_t>(c)]) != 0ULL) continue;
      const int sz = std::popcount(bits);
      const double w = std::pow(p, sz) * std::pow(1.0 - p, e_count - sz);
      if (w > 0.0) {
        raw[static_cast<std::size_t>(c * ny_all + a)] = w;
        y_used[static_cast<std::size_t>(a)] = 1;
      }
    }
  }
  std::vector<long long> y_index(static_cast<std::size_t>(ny_all), -1);
  std::vector<unsigned long long> y_subset;
  for (long long a = 0; a < ny_all; ++a) {
    if (y_used[static_cast<std::size_t>(a)]) {
      y_index[static_cast<std::size_t>(a)] = static_cast<long long>(y_subset.size());
      y_subset.push_back(static_cast<unsigned long long>(a));
    }
  }
  const long long ny = static_cast<long long>(y_subset.size());

  std::vector<std::pair<int, int>> pairs;
  std::vector<double> weights(static_cast<std::size_t>(nx * ny), 0.0);
  NeumaierSum total;
  for (long long c = 0; c < nx; ++c) {
    for (long long a = 0; a < ny_all; ++a) {
      const double w = raw[static_cast<std::size_t>(c * ny_all + a)];
      if (w > 0.0) {
        const long long yi = y_index[static_cast<std::size_t>(a)];
        pairs.emplace_back(static_cast<int>(c), static_cast<int>(yi));
        weights[static_cast<std::size_t>(c * ny + yi)] = w;
        total.add(w);
      }
    }
  }
  const SupportSet support(static_cast<int>(nx), static_cast<int>(ny),
                           std::move(pairs));
  for (auto [x, y] : support.pairs()) {
    weights[support.index(x, y)] /= total.value();
  }
  const JointMeasure joint =
      JointMeasure::probability(support, std::move(weights));
  const ConditionalKernel k1 = conditional(joint, Direction::YGivenX);
  const ConditionalKernel k2 = conditional(joint, Direction::XGivenY);

  // Closed-form cross-checks of the coupling construction.
  double worst = 0.0;
  for (auto [x, y] : support.pairs()) {
    const unsigned long long bits = y_subset[static_cast<std::size_t>(y)];
    const int sz = std::popcount(bits);
    const int mono_sz = std::popcount(mono[static_cast<std::size_t>(x)]);
    const double edge_form = std::pow(p, sz) * std::pow(1.0 - p, mono_sz - sz);
    worst = std::max(worst, std::abs(k1.at(x, y) - edge_form));
    const int comps = detail::count_components(v_count, edges, bits);
    double color_form = 1.0;
    for (int i = 0; i < comps; ++i) color_form /= inst.q;
    worst = std::max(worst, std::abs(k2.at(x, y) - color_form));
  }
  if (worst > 1e-12) {
    throw Error("potts conditionals deviate from closed forms by " +
                std::to_string(worst));
  }
  return AlternatingChainSpec::from_kernels(k1, k2);
}

}  // namespace altproj
