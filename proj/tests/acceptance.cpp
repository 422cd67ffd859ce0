// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "altproj/altproj.hpp"

using namespace altproj;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string g17(double v) { return fmt_g17(v); }

double max_abs_diff(const JointMeasure& a, const JointMeasure& b) {
  double worst = 0.0;
  for (auto [x, y] : a.support().pairs()) {
    worst = std::max(worst, std::abs(a.at(x, y) - b.at(x, y)));
  }
  return worst;
}

// The 50-spec pool shared by criteria 1-3: sizes 2..6 x 2..6, densities
// alternating between 1.0 and 0.7, fixed seeds.
std::vector<AlternatingChainSpec> spec_pool() {
  std::vector<AlternatingChainSpec> specs;
  specs.reserve(50);
  for (int i = 0; i < 50; ++i) {
    const int nx = 2 + i % 5;
    const int ny = 2 + (i / 5) % 5;
    const double density = (i % 2 == 0) ? 1.0 : 0.7;
    specs.push_back(random_instance(nx, ny, density, 1000 + i));
  }
  return specs;
}

double check_value(const VerificationReport& rep, const std::string& name) {
  for (const CheckResult& c : rep.checks) {
    if (c.name == name) return c.max_violation;
  }
  throw Failure("missing check " + name);
}

// --------------------------------------------------------------------------

void criterion_projection_theorem(const std::vector<AlternatingChainSpec>& pool) {
  const auto t_begin = std::chrono::steady_clock::now();
  double worst_oracle = 0.0;
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const VerificationReport rep =
        verify_projection_theorem(pool[i], 20, 2000 + i);
    require(check_value(rep, "half_step_equals_projection") == 0.0,
            "half-step and projection must coincide bitwise");
    worst_oracle = std::max(worst_oracle,
                            check_value(rep, "projection_matches_oracle"));
    worst_residual = std::max(worst_residual,
                              check_value(rep, "log_affine_residual"));
    require(rep.all_pass(), "projection report has a failing check");
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  require(worst_oracle <= 1e-6,
          "oracle max-norm gap " + g17(worst_oracle) + " > 1e-6");
  require(worst_residual <= 1e-10,
          "affine residual " + g17(worst_residual) + " > 1e-10");
  require(seconds < 60.0, "runtime " + g17(seconds) + "s >= 60s");
  std::printf("    worst oracle gap %s, worst affine residual %s, %.1fs\n",
              g17(worst_oracle).c_str(), g17(worst_residual).c_str(), seconds);
}

void criterion_pythagorean(const std::vector<AlternatingChainSpec>& pool) {
  double worst = 0.0;
  for (const auto& spec : pool) {
    const auto [x, y] = spec.support().pairs().front();
    const VerificationReport rep = verify_pythagorean(
        spec, JointMeasure::dirac(spec.support(), x, y), 100);
    worst = std::max(worst, check_value(rep, "pythagorean_identity_relative"));
    require(rep.all_pass(), "pythagorean report has a failing check");
  }
  require(worst <= 1e-10, "relative violation " + g17(worst) + " > 1e-10");
  std::printf("    worst relative violation %s\n", g17(worst).c_str());
}

void criterion_duality_chain(const std::vector<AlternatingChainSpec>& pool) {
  double worst_slack = 0.0;
  double worst_monotone = 0.0;
  for (const auto& spec : pool) {
    const auto [x, y] = spec.support().pairs().front();
    const VerificationReport rep = verify_duality_chain(
        spec, JointMeasure::dirac(spec.support(), x, y), 100);
    worst_slack = std::max(worst_slack, check_value(rep, "duality_chain_slack"));
    worst_monotone =
        std::max(worst_monotone, check_value(rep, "joint_rkl_monotone"));
    require(rep.all_pass(), "duality report has a failing check");
  }
  require(worst_slack <= 1e-12, "chain slack " + g17(worst_slack) + " > 1e-12");
  require(worst_monotone <= 1e-12,
          "monotonicity violation " + g17(worst_monotone) + " > 1e-12");
  std::printf("    worst chain slack %s, worst monotone violation %s\n",
              g17(worst_slack).c_str(), g17(worst_monotone).c_str());
}

void criterion_burn_in() {
  // strictly positive primal matrix over a strict support subset: exactly 3
  int positive_primal_specs = 0;
  for (std::uint64_t seed = 1; seed <= 200 && positive_primal_specs < 10;
       ++seed) {
    const auto spec = random_instance(4, 4, 0.7, 3000 + seed);
    if (spec.support().size() == 16) continue;  // needs a pruned grid
    const TransitionMatrix m = primal_kernel(spec);
    bool positive = true;
    for (int i = 0; i < m.size() && positive; ++i) {
      for (int j = 0; j < m.size(); ++j) positive = positive && m.at(i, j) > 0.0;
    }
    if (!positive) continue;
    ++positive_primal_specs;
    require(spec.burn_in() == 3,
            "positive-primal spec has burn-in " +
                std::to_string(spec.burn_in()) + ", expected 3");
  }
  require(positive_primal_specs >= 10, "too few positive-primal specs found");

  // all-positive conditionals: at most 2
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spec = random_instance(3 + seed % 3, 2 + seed % 4, 1.0,
                                      4000 + seed);
    require(spec.burn_in() <= 2, "full-support spec has burn-in " +
                                     std::to_string(spec.burn_in()));
  }
  std::printf("    %d positive-primal specs at burn-in 3, full grids <= 2\n",
              positive_primal_specs);
}

struct PottsOracle {
  std::vector<double> joint;
  std::vector<double> gibbs;
  long long nx = 0;
  long long ny_all = 0;

  explicit PottsOracle(const PottsInstance& inst) {
    const int V = inst.graph.vertices;
    const auto& E = inst.graph.edges;
    const double p = inst.p();
    nx = 1;
    for (int v = 0; v < V; ++v) nx *= inst.q;
    ny_all = 1LL << E.size();
    joint.assign(static_cast<std::size_t>(nx * ny_all), 0.0);
    gibbs.assign(static_cast<std::size_t>(nx), 0.0);
    double zj = 0.0, zg = 0.0;
    for (long long c = 0; c < nx; ++c) {
      auto color = [&](int vertex) {
        long long d = c;
        for (int v = 0; v < vertex; ++v) d /= inst.q;
        return static_cast<int>(d % inst.q);
      };
      unsigned long long mono = 0;
      int bichromatic = 0;
      for (std::size_t e = 0; e < E.size(); ++e) {
        if (color(E[e].first) == color(E[e].second)) {
          mono |= 1ULL << e;
        } else {
          ++bichromatic;
        }
      }
      gibbs[static_cast<std::size_t>(c)] = std::exp(-inst.beta * bichromatic);
      zg += gibbs[static_cast<std::size_t>(c)];
      for (long long a = 0; a < ny_all; ++a) {
        if ((static_cast<unsigned long long>(a) & ~mono) != 0ULL) continue;
        const int sz = std::popcount(static_cast<unsigned long long>(a));
        const double w = std::pow(p, sz) *
                         std::pow(1.0 - p, static_cast<int>(E.size()) - sz);
        joint[static_cast<std::size_t>(c * ny_all + a)] = w;
        zj += w;
      }
    }
    for (double& w : joint) w /= zj;
    for (double& w : gibbs) w /= zg;
  }
};

void criterion_es_round_trip() {
  // kernels of a random positive joint recover it through stationarity
  double worst_random = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto spec = random_instance(3 + i % 4, 2 + i % 5, 1.0, 5100 + i);
    // replicate the generator's stream: mask draws, then the weights
    Rng replay(5100 + i);
    const int cells = spec.support().nx() * spec.support().ny();
    for (int k = 0; k < cells; ++k) replay.uniform01();
    const auto generating = random_full_support(spec.support(), replay);
    worst_random = std::max(worst_random, max_abs_diff(spec.es(), generating));
  }
  require(worst_random <= 1e-9,
          "random joint round trip " + g17(worst_random) + " > 1e-9");

  // Potts instances against the brute-force enumeration
  const std::vector<std::vector<std::pair<int, int>>> graphs = {
      {{0, 1}},                    // single edge
      {{0, 1}, {1, 2}},            // path of 3
      {{0, 1}, {1, 2}, {0, 2}}};   // triangle
  const int vertices[] = {2, 3, 3};
  double worst_joint = 0.0, worst_gibbs = 0.0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (int q : {2, 3}) {
      PottsInstance inst;
      inst.graph.vertices = vertices[gi];
      inst.graph.edges = graphs[gi];
      inst.q = q;
      inst.beta = std::log(2.0);
      const auto spec = potts_instance(inst);
      const PottsOracle oracle(inst);
      require(spec.support().ny() == oracle.ny_all,
              "unexpected pruning at p > 0");
      for (auto [x, y] : spec.support().pairs()) {
        worst_joint = std::max(
            worst_joint,
            std::abs(spec.es().at(x, y) -
                     oracle.joint[static_cast<std::size_t>(x * oracle.ny_all +
                                                           y)]));
      }
      const MarginalDistribution mu = marginal(spec.es(), Axis::X);
      for (int c = 0; c < spec.support().nx(); ++c) {
        worst_gibbs = std::max(
            worst_gibbs,
            std::abs(mu.at(c) - oracle.gibbs[static_cast<std::size_t>(c)]));
      }
    }
  }
  require(worst_joint <= 1e-9,
          "Potts ES joint gap " + g17(worst_joint) + " > 1e-9");
  require(worst_gibbs <= 1e-10,
          "Potts Gibbs marginal gap " + g17(worst_gibbs) + " > 1e-10");
  std::printf("    random %s, potts joint %s, gibbs %s\n",
              g17(worst_random).c_str(), g17(worst_joint).c_str(),
              g17(worst_gibbs).c_str());
}

void criterion_divergence_algebra() {
  const SupportSet shapes[] = {SupportSet::full(2, 2), SupportSet::full(3, 2),
                               SupportSet::full(3, 3), SupportSet::full(4, 3)};
  Rng rng(6000);
  double worst_reverse = 0.0, worst_decomp = 0.0, worst_chain = 0.0;
  for (const SupportSet& s : shapes) {
    for (int i = 0; i < 200; ++i) {
      std::vector<double> wp(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
      std::vector<double> wq = wp;
      for (auto [x, y] : s.pairs()) {
        wp[s.index(x, y)] = rng.uniform(0.2, 3.0);
        wq[s.index(x, y)] = rng.uniform(0.2, 3.0);
      }
      const auto p = JointMeasure::denormalized(s, wp);
      const auto q = JointMeasure::denormalized(s, wq);

      const double direct = bregman_entropy(p, q);
      worst_reverse = std::max(
          worst_reverse,
          std::abs(bregman_dual(log_denormalize(q), log_denormalize(p)) -
                   direct));
      const auto [scalar, klp] = decompose_bregman_entropy(p, q);
      worst_decomp = std::max(worst_decomp, std::abs(scalar + klp - direct));

      const auto pp = random_full_support(s, rng);
      const auto qq = random_full_support(s, rng);
      for (Axis axis : {Axis::X, Axis::Y}) {
        const auto [m, c] = kl_chain_rule(pp, qq, axis);
        worst_chain =
            std::max(worst_chain, std::abs(m + c - kl(pp, qq).value()));
      }
    }
  }
  require(worst_reverse <= 1e-12, "reverse property " + g17(worst_reverse));
  require(worst_decomp <= 1e-12, "decomposition " + g17(worst_decomp));
  require(worst_chain <= 1e-12, "chain rule " + g17(worst_chain));

  // entropy gradient vs central differences, step 1e-5
  double worst_grad = 0.0;
  const double h = 1e-5;
  for (const SupportSet& s : shapes) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
      for (auto [x, y] : s.pairs()) w[s.index(x, y)] = rng.uniform(0.3, 2.5);
      const auto pi = JointMeasure::denormalized(s, w);
      const auto grad = log_denormalize(pi);
      for (auto [x, y] : s.pairs()) {
        std::vector<double> up(w), down(w);
        up[s.index(x, y)] += h;
        down[s.index(x, y)] -= h;
        const double fd = (entropy(JointMeasure::denormalized(s, up)) -
                           entropy(JointMeasure::denormalized(s, down))) /
                          (2.0 * h);
        worst_grad = std::max(worst_grad, std::abs(fd - grad.at(x, y)));
      }
    }
  }
  require(worst_grad <= 1e-6, "gradient check " + g17(worst_grad));
  std::printf("    reverse %s, decomposition %s, chain %s, gradient %s\n",
              g17(worst_reverse).c_str(), g17(worst_decomp).c_str(),
              g17(worst_chain).c_str(), g17(worst_grad).c_str());
}

void criterion_negative_controls() {
  // a kernel row perturbed by 0.05: the pair no longer couples
  const auto base = random_instance(3, 3, 1.0, 7001);
  std::vector<double> dense = base.kernel_y_given_x().dense();
  dense[base.support().index(0, 0)] += 0.05;
  dense[base.support().index(0, 1)] -= 0.05;
  const ConditionalKernel bad(Direction::YGivenX, base.support(), dense);
  bool rejected = false;
  try {
    AlternatingChainSpec::from_kernels(bad, base.kernel_x_given_y());
  } catch (const CompatibilityViolation&) {
    rejected = true;
  }
  require(rejected, "perturbed kernel pair was accepted");

  // same perturbation, ES left untouched: the harness must flag it
  const auto corrupt = AlternatingChainSpec::assemble_unchecked(
      bad, base.kernel_x_given_y(), base.es(), base.burn_in());
  require(!verify_projection_theorem(corrupt, 3, 7).all_pass(),
          "corrupted spec passed verification");

  // a periodic 2-state swap primal chain is not ergodic
  const TransitionMatrix swap(Axis::X, 2, {0.0, 1.0, 1.0, 0.0});
  const ErgodicityReport rep = check_ergodic(swap);
  require(rep.irreducible && !rep.aperiodic && rep.period == 2,
          "swap matrix not detected as periodic");
  const SupportSet diag(2, 2, {{0, 0}, {1, 1}});
  bool not_ergodic = false;
  try {
    AlternatingChainSpec::from_kernels(
        ConditionalKernel(Direction::YGivenX, diag, {1.0, 0.0, 0.0, 1.0}),
        ConditionalKernel(Direction::XGivenY, diag, {1.0, 0.0, 0.0, 1.0}));
  } catch (const NotErgodic&) {
    not_ergodic = true;
  }
  require(not_ergodic, "degenerate chain was accepted");
  std::printf("    perturbation rejected, corruption reported, period 2 found\n");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALTPROJ_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  if (status < 0) throw Failure("cannot run " + cmd);
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

void criterion_cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "altproj_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");

  for (const char* sub : {"a", "b"}) {
    const std::string d = (dir / sub).string();
    require(run_cli("gen --random 3 3 1.0 7 --out " + d + "/spec_r.json") == 0,
            "gen --random failed");
    require(run_cli("gen --potts 2 2 0.6931471805599453 --edges 0-1 --out " +
                    d + "/spec_p.json") == 0,
            "gen --potts failed");
    require(run_cli("run --spec " + d + "/spec_r.json --steps 50 --out " + d +
                    "/run.csv") == 0,
            "run failed");
    require(run_cli("trace --spec " + d + "/spec_r.json --steps 50 --out " +
                    d + "/trace.csv") == 0,
            "trace failed");
    require(run_cli("verify --spec " + d + "/spec_r.json --trials 5 --out " +
                    d + "/report.json > " + d + "/verify.txt") == 0,
            "verify reported a failure");
    require(run_cli("verify --spec " + d + "/spec_p.json --trials 5 > " + d +
                    "/verify_potts.txt") == 0,
            "verify on the Potts spec reported a failure");
  }
  for (const char* f : {"spec_r.json", "spec_p.json", "run.csv", "trace.csv",
                        "report.json", "verify.txt", "verify_potts.txt"}) {
    require(read_file((dir / "a" / f).string()) ==
                read_file((dir / "b" / f).string()),
            std::string(f) + " differs between identical invocations");
  }

  // exit-code contract
  require(run_cli("run --steps 5 2> /dev/null") == 2, "usage error exit != 2");
  write_file((dir / "broken.json").string(), "{\"nx\": 2}");
  require(run_cli("verify --spec " + (dir / "broken.json").string() +
                  " 2> /dev/null") == 3,
          "spec-validation exit != 3");
  const std::string run0 =
      (dir / "run0.csv").string();
  require(run_cli("run --spec " + (dir / "a" / "spec_r.json").string() +
                  " --steps 0 --out " + run0) == 0,
          "run --steps 0 failed");
  const std::string csv = read_file(run0);
  require(std::count(csv.begin(), csv.end(), '\n') == 2,
          "run --steps 0 should emit a header and one row");
  std::printf("    outputs byte-identical, exit codes 0/2/3 as specified\n");
}

}  // namespace

int main() {
  int failures = 0;
  const auto pool = spec_pool();
  const struct {
    const char* name;
    std::function<void()> fn;
  } criteria[] = {
      {"1. projection theorem vs oracle (50 specs x 20 starts)",
       [&] { criterion_projection_theorem(pool); }},
      {"2. pythagorean identity (100-step runs)",
       [&] { criterion_pythagorean(pool); }},
      {"3. duality chain and monotone decay",
       [&] { criterion_duality_chain(pool); }},
      {"4. burn-in values", criterion_burn_in},
      {"5. ES round trips (random and Potts)", criterion_es_round_trip},
      {"6. divergence algebra identities", criterion_divergence_algebra},
      {"7. negative controls", criterion_negative_controls},
      {"8. CLI determinism and exit codes", criterion_cli_determinism},
  };
  for (const auto& c : criteria) {
    try {
      c.fn();
      std::printf("PASS %s\n", c.name);
    } catch (const std::exception& e) {
      std::printf("FAIL %s: %s\n", c.name, e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
