// Command-line front end: generate instances, run exact chain evolutions,
// verify the projection/duality theorems, and emit divergence traces.
//
// Exit codes: 0 success (verify: all checks pass), 1 failed verification,
// 2 usage errors, 3 spec-validation errors.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "altproj/altproj.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSpecInvalid = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long long parse_ll(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": expected an integer, got '" + s +
                     "'");
  }
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": expected a number, got '" + s +
                     "'");
  }
}

std::vector<std::pair<int, int>> parse_edges(const std::string& arg) {
  std::vector<std::pair<int, int>> edges;
  std::string token;
  std::istringstream in(arg);
  while (std::getline(in, token, ',')) {
    const auto dash = token.find('-');
    if (dash == std::string::npos) {
      throw UsageError("--edges entries look like 0-1, got '" + token + "'");
    }
    edges.emplace_back(
        static_cast<int>(parse_ll(token.substr(0, dash), "--edges")),
        static_cast<int>(parse_ll(token.substr(dash + 1), "--edges")));
  }
  if (edges.empty()) throw UsageError("--edges lists at least one edge");
  return edges;
}

altproj::JointMeasure parse_start(const std::string& arg,
                                  const altproj::SupportSet& support) {
  if (arg == "uniform") return altproj::JointMeasure::uniform(support);
  if (arg == "dirac") {
    const auto [x, y] = support.pairs().front();
    return altproj::JointMeasure::dirac(support, x, y);
  }
  if (arg.rfind("dirac:", 0) == 0) {
    const std::string coords = arg.substr(6);
    const auto comma = coords.find(',');
    if (comma == std::string::npos) {
      throw UsageError("--start dirac:x,y needs two coordinates");
    }
    const int x = static_cast<int>(parse_ll(coords.substr(0, comma), "--start"));
    const int y = static_cast<int>(parse_ll(coords.substr(comma + 1), "--start"));
    if (!support.contains(x, y)) {
      throw UsageError("--start dirac:" + coords + " is not a support pair");
    }
    return altproj::JointMeasure::dirac(support, x, y);
  }
  throw UsageError("--start is one of uniform, dirac, dirac:x,y");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::fputs(content.c_str(), stdout);
  } else {
    altproj::write_file(out_path, content);
  }
}

long long state_cap_from_env() {
  if (const char* env = std::getenv("ALTPROJ_MAX_STATES")) {
    return parse_ll(env, "ALTPROJ_MAX_STATES");
  }
  return altproj::kDefaultStateCap;
}

int run_gen(const std::vector<std::string>& random_args,
            const std::vector<std::string>& potts_args,
            const std::string& edges_arg, const std::string& out_path) {
  nlohmann::json j;
  if (!random_args.empty()) {
    const int nx = static_cast<int>(parse_ll(random_args[0], "--random nx"));
    const int ny = static_cast<int>(parse_ll(random_args[1], "--random ny"));
    const double density = parse_double(random_args[2], "--random density");
    const auto seed = static_cast<std::uint64_t>(
        parse_ll(random_args[3], "--random seed"));
    j = altproj::spec_to_json(altproj::random_instance(nx, ny, density, seed));
  } else {
    altproj::PottsInstance inst;
    inst.graph.vertices =
        static_cast<int>(parse_ll(potts_args[0], "--potts V"));
    inst.q = static_cast<int>(parse_ll(potts_args[1], "--potts q"));
    inst.beta = parse_double(potts_args[2], "--potts beta");
    if (edges_arg.empty()) {
      throw UsageError("--potts requires --edges");
    }
    inst.graph.edges = parse_edges(edges_arg);
    j = altproj::spec_to_json(altproj::potts_instance(inst, state_cap_from_env()),
                              inst);
  }
  emit(out_path, j.dump(2) + "\n");
  return kExitOk;
}

int run_trace(const std::string& spec_path, const std::string& start_arg,
              int steps, const std::string& out_path, bool extended) {
  const altproj::AlternatingChainSpec spec = altproj::load_spec(spec_path);
  const altproj::JointMeasure pi0 = parse_start(start_arg, spec.support());
  if (extended) {
    emit(out_path, altproj::extended_trace_to_csv(spec, pi0, steps));
  } else {
    emit(out_path, altproj::trace_to_csv(altproj::emit_trace(spec, pi0, steps)));
  }
  return kExitOk;
}

int run_verify(const std::string& spec_path, int trials, int steps,
               std::uint64_t seed, const std::string& start_arg,
               const std::string& out_path) {
  const altproj::AlternatingChainSpec spec = altproj::load_spec(spec_path);
  const altproj::JointMeasure pi0 = parse_start(start_arg, spec.support());

  const altproj::VerificationReport projection =
      altproj::verify_projection_theorem(spec, trials, seed);
  const altproj::VerificationReport pythagorean =
      altproj::verify_pythagorean(spec, pi0, steps);
  const altproj::VerificationReport duality =
      altproj::verify_duality_chain(spec, pi0, steps);

  altproj::VerificationReport combined;
  combined.trace = duality.trace;
  const struct {
    const char* prefix;
    const altproj::VerificationReport& rep;
  } parts[] = {{"projection", projection},
               {"pythagorean", pythagorean},
               {"duality", duality}};
  for (const auto& part : parts) {
    for (const altproj::CheckResult& c : part.rep.checks) {
      altproj::CheckResult named = c;
      named.name = std::string(part.prefix) + "." + c.name;
      combined.checks.push_back(named);
    }
  }
  for (const altproj::CheckResult& c : combined.checks) {
    std::printf("[%s] %-45s max_violation=%s tol=%s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(),
                altproj::fmt_g17(c.max_violation).c_str(),
                altproj::fmt_g17(c.tolerance).c_str());
  }
  if (!out_path.empty()) {
    altproj::write_file(out_path,
                        altproj::report_to_json(combined).dump(2) + "\n");
  }
  return combined.all_pass() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating Markov chains as reverse-KL projections"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance spec (JSON)");
  std::vector<std::string> random_args, potts_args;
  std::string edges_arg, gen_out;
  auto* opt_random =
      gen->add_option("--random", random_args, "nx ny density seed")
          ->expected(4);
  auto* opt_potts =
      gen->add_option("--potts", potts_args, "V q beta")->expected(3);
  opt_random->excludes(opt_potts);
  opt_potts->excludes(opt_random);
  gen->add_option("--edges", edges_arg, "edge list, e.g. 0-1,1-2");
  gen->add_option("-o,--out", gen_out, "output path (default stdout)");

  // run / trace
  std::string run_spec, run_start = "dirac", run_out;
  int run_steps = 100;
  auto* run_cmd = app.add_subcommand("run", "evolve the chain, write a CSV trace");
  run_cmd->add_option("--spec", run_spec, "instance spec JSON")->required();
  run_cmd->add_option("--start", run_start, "uniform | dirac | dirac:x,y");
  run_cmd->add_option("--steps", run_steps, "number of half-steps")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("-o,--out", run_out, "output path (default stdout)");

  std::string trace_spec, trace_start = "dirac", trace_out;
  int trace_steps = 100;
  auto* trace_cmd = app.add_subcommand(
      "trace", "run plus per-step report columns");
  trace_cmd->add_option("--spec", trace_spec, "instance spec JSON")->required();
  trace_cmd->add_option("--start", trace_start, "uniform | dirac | dirac:x,y");
  trace_cmd->add_option("--steps", trace_steps, "number of half-steps")
      ->check(CLI::NonNegativeNumber);
  trace_cmd->add_option("-o,--out", trace_out, "output path (default stdout)");

  // verify
  std::string verify_spec, verify_start = "dirac", verify_out;
  int verify_trials = 20, verify_steps = 100;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd =
      app.add_subcommand("verify", "certify all theorem checks on a spec");
  verify_cmd->add_option("--spec", verify_spec, "instance spec JSON")
      ->required();
  verify_cmd->add_option("--trials", verify_trials, "projection trials")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--steps", verify_steps, "trace length")
      ->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--seed", verify_seed, "trial seed");
  verify_cmd->add_option("--start", verify_start, "uniform | dirac | dirac:x,y");
  verify_cmd->add_option("-o,--out", verify_out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      if (random_args.empty() && potts_args.empty()) {
        throw UsageError("gen needs --random or --potts");
      }
      return run_gen(random_args, potts_args, edges_arg, gen_out);
    }
    if (run_cmd->parsed()) {
      return run_trace(run_spec, run_start, run_steps, run_out, false);
    }
    if (trace_cmd->parsed()) {
      return run_trace(trace_spec, trace_start, trace_steps, trace_out, true);
    }
    return run_verify(verify_spec, verify_trials, verify_steps, verify_seed,
                      verify_start, verify_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const altproj::Error& e) {
    std::cerr << "spec validation error: " << e.what() << "\n";
    return kExitSpecInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpecInvalid;
  }
}
