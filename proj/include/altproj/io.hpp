// File formats: the JSON instance/spec schema, CSV divergence traces
// (17 significant digits, `inf` for pre-burn-in rows), and JSON verification
// reports. All writers are deterministic byte for byte for fixed inputs.

#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "altproj/chain.hpp"
#include "altproj/errors.hpp"
#include "altproj/instances.hpp"
#include "altproj/measure.hpp"
#include "altproj/projection.hpp"
#include "altproj/verify.hpp"

namespace altproj {

using nlohmann::json;

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_csv(const DivergenceValue& v) {
  return v.is_finite() ? fmt_g17(v.value()) : "inf";
}

// ---------------------------------------------------------------------------
// JSON: joint measures as [[x, y, weight], ...] triplets over the support.
// Weights may be numbers or decimal strings.

inline json joint_to_json(const JointMeasure& pi) {
  json arr = json::array();
  for (auto [x, y] : pi.support().pairs()) {
    arr.push_back(json::array({x, y, pi.at(x, y)}));
  }
  return arr;
}

inline double parse_weight(const json& w) {
  if (w.is_number()) return w.get<double>();
  if (w.is_string()) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(w.get<std::string>(), &pos);
      if (pos != w.get<std::string>().size()) {
        throw std::invalid_argument("trailing characters");
      }
      return v;
    } catch (const std::exception&) {
      throw SpecValidationError("weights are decimal strings or numbers",
                                w.dump());
    }
  }
  throw SpecValidationError("weights are decimal strings or numbers", w.dump());
}

inline JointMeasure joint_from_json(const json& arr, const SupportSet& support,
                                    View view) {
  if (!arr.is_array()) {
    throw SpecValidationError("joint is an array of [x, y, weight] triplets",
                              arr.dump());
  }
  std::vector<double> w(
      static_cast<std::size_t>(support.nx()) * support.ny(), 0.0);
  for (const json& t : arr) {
    if (!t.is_array() || t.size() != 3) {
      throw SpecValidationError("joint entries are [x, y, weight] triplets",
                                t.dump());
    }
    const int x = t[0].get<int>();
    const int y = t[1].get<int>();
    if (!support.contains(x, y)) {
      throw SpecValidationError("joint entries lie in the support",
                                t.dump());
    }
    w[support.index(x, y)] = parse_weight(t[2]);
  }
  return JointMeasure(support, std::move(w), view);
}

inline SupportSet support_from_json(const json& j) {
  if (!j.contains("nx") || !j.contains("ny") || !j.contains("support")) {
    throw SpecValidationError("instance has nx, ny and support fields",
                              "missing key");
  }
  std::vector<std::pair<int, int>> pairs;
  for (const json& p : j.at("support")) {
    if (!p.is_array() || p.size() != 2) {
      throw SpecValidationError("support entries are [x, y] pairs", p.dump());
    }
    pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return SupportSet(j.at("nx").get<int>(), j.at("ny").get<int>(),
                    std::move(pairs));
}

inline json kernel_to_json(const ConditionalKernel& k) {
  const SupportSet& s = k.support();
  json rows = json::array();
  if (k.direction() == Direction::YGivenX) {
    for (int x = 0; x < s.nx(); ++x) {
      json row = json::array();
      for (int y = 0; y < s.ny(); ++y) row.push_back(k.at(x, y));
      rows.push_back(std::move(row));
    }
  } else {
    for (int y = 0; y < s.ny(); ++y) {
      json row = json::array();
      for (int x = 0; x < s.nx(); ++x) row.push_back(k.at(x, y));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline ConditionalKernel kernel_from_json(const json& rows, Direction dir,
                                          const SupportSet& support) {
  const int outer = dir == Direction::YGivenX ? support.nx() : support.ny();
  const int inner = dir == Direction::YGivenX ? support.ny() : support.nx();
  if (!rows.is_array() || static_cast<int>(rows.size()) != outer) {
    throw SpecValidationError("kernel has one row per conditioning state",
                              std::to_string(rows.size()) + " rows");
  }
  std::vector<double> dense(
      static_cast<std::size_t>(support.nx()) * support.ny(), 0.0);
  for (int i = 0; i < outer; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != inner) {
      throw SpecValidationError("kernel rows span the other coordinate",
                                row.dump());
    }
    for (int j = 0; j < inner; ++j) {
      const int x = dir == Direction::YGivenX ? i : j;
      const int y = dir == Direction::YGivenX ? j : i;
      dense[support.index(x, y)] =
          parse_weight(row[static_cast<std::size_t>(j)]);
    }
  }
  return ConditionalKernel(dir, support, std::move(dense));
}

/// Serialize a chain spec (with derived es and burn_in) and optional Potts
/// metadata.
inline json spec_to_json(const AlternatingChainSpec& spec,
                         const std::optional<PottsInstance>& meta = {}) {
  json j;
  j["nx"] = spec.support().nx();
  j["ny"] = spec.support().ny();
  json support = json::array();
  for (auto [x, y] : spec.support().pairs()) {
    support.push_back(json::array({x, y}));
  }
  j["support"] = std::move(support);
  j["kernel_y_given_x"] = kernel_to_json(spec.kernel_y_given_x());
  j["kernel_x_given_y"] = kernel_to_json(spec.kernel_x_given_y());
  j["es"] = joint_to_json(spec.es());
  j["burn_in"] = spec.burn_in();
  if (meta) {
    json edges = json::array();
    for (auto [a, b] : meta->graph.edges) {
      edges.push_back(json::array({a, b}));
    }
    j["graph"] = {{"vertices", meta->graph.vertices},
                  {"edges", std::move(edges)}};
    j["q"] = meta->q;
    j["beta"] = meta->beta;
  }
  return j;
}

/// Reconstruct and fully re-validate a spec. The derived fields are
/// recomputed; when present in the file they must agree (es within 1e-9
/// max-norm, burn_in exactly).
inline AlternatingChainSpec spec_from_json(const json& j) {
  const SupportSet support = support_from_json(j);
  if (!j.contains("kernel_y_given_x") || !j.contains("kernel_x_given_y")) {
    throw SpecValidationError("spec has both kernels", "missing key");
  }
  const ConditionalKernel k1 =
      kernel_from_json(j.at("kernel_y_given_x"), Direction::YGivenX, support);
  const ConditionalKernel k2 =
      kernel_from_json(j.at("kernel_x_given_y"), Direction::XGivenY, support);
  AlternatingChainSpec spec = AlternatingChainSpec::from_kernels(k1, k2);
  if (j.contains("es")) {
    const JointMeasure stored =
        joint_from_json(j.at("es"), support, View::Probability);
    double worst = 0.0;
    for (auto [x, y] : support.pairs()) {
      worst = std::max(worst, std::abs(stored.at(x, y) - spec.es().at(x, y)));
    }
    if (worst > 1e-9) {
      throw SpecValidationError("stored es matches the kernels",
                                "max deviation " + std::to_string(worst));
    }
  }
  if (j.contains("burn_in") && j.at("burn_in").get<int>() != spec.burn_in()) {
    throw SpecValidationError(
        "stored burn_in matches the support propagation",
        "stored " + j.at("burn_in").dump() + ", derived " +
            std::to_string(spec.burn_in()));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// CSV traces.

inline std::string trace_to_csv(const DivergenceTrace& trace) {
  std::ostringstream out;
  out << "t,d_joint,d_mu,d_nu,progress\n";
  for (const TraceRow& r : trace.rows) {
    out << r.t << ',' << fmt_csv(r.d_joint) << ',' << fmt_csv(r.d_mu) << ','
        << fmt_csv(r.d_nu) << ',' << fmt_csv(r.progress) << '\n';
  }
  return out.str();
}

/// The `trace` subcommand's CSV: the run columns plus per-step report
/// columns, the relative Pythagorean residual of the step into row t and the
/// affine residual of log pi_t in the subspace of the kernel applied at that
/// step.
inline std::string extended_trace_to_csv(const AlternatingChainSpec& spec,
                                         const JointMeasure& pi0, int steps) {
  const std::vector<ChainState> states = run(spec, pi0, steps);
  const DivergenceTrace trace = trace_from_states(spec, states);
  const AffineSubspace sub1 = affine_subspace(spec.kernel_y_given_x());
  const AffineSubspace sub2 = affine_subspace(spec.kernel_x_given_y());
  std::ostringstream out;
  out << "t,d_joint,d_mu,d_nu,progress,pyth_resid,affine_resid\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    std::string pyth = "inf";
    std::string resid = "inf";
    if (i > 0 && r.d_joint.is_finite() &&
        trace.rows[i - 1].d_joint.is_finite()) {
      const double prev = trace.rows[i - 1].d_joint.value();
      const double v =
          std::abs(prev - r.d_joint.value() - r.progress.value()) /
          std::max(1.0, prev);
      pyth = fmt_g17(v);
    }
    if (i > 0 && has_full_support(states[i].pi)) {
      const AffineSubspace& sub = (states[i - 1].t % 2 == 0) ? sub1 : sub2;
      resid = fmt_g17(affine_residual(log_denormalize(states[i].pi), sub));
    }
    out << r.t << ',' << fmt_csv(r.d_joint) << ',' << fmt_csv(r.d_mu) << ','
        << fmt_csv(r.d_nu) << ',' << fmt_csv(r.progress) << ',' << pyth << ','
        << resid << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Reports.

inline json trace_to_json(const DivergenceTrace& trace) {
  json rows = json::array();
  for (const TraceRow& r : trace.rows) {
    json row = json::array();
    row.push_back(r.t);
    for (const DivergenceValue* v : {&r.d_joint, &r.d_mu, &r.d_nu, &r.progress}) {
      if (v->is_finite()) {
        row.push_back(v->value());
      } else {
        row.push_back("inf");
      }
    }
    rows.push_back(std::move(row));
  }
  return json{{"columns", {"t", "d_joint", "d_mu", "d_nu", "progress"}},
              {"rows", std::move(rows)}};
}

inline json report_to_json(const VerificationReport& report) {
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"max_violation", c.max_violation},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  }
  return json{{"all_pass", report.all_pass()},
              {"checks", std::move(checks)},
              {"trace", trace_to_json(report.trace)}};
}

// ---------------------------------------------------------------------------
// Small file helpers.

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

inline AlternatingChainSpec load_spec(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw SpecValidationError("spec file is valid JSON", e.what());
  }
  return spec_from_json(j);
}

}  // namespace altproj
