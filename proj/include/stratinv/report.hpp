#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stratinv/admm.hpp"
#include "stratinv/extensive.hpp"
#include "stratinv/instance_io.hpp"
#include "stratinv/reformulate.hpp"

// Machine-readable outputs of the command-line tool. Everything here is a
// pure function of its inputs; wall-clock fields are only emitted on request
// so that repeated runs produce identical files.

namespace stratinv {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string iterations_csv(const AdmmState& s, bool timings) {
  std::ostringstream out;
  out << "iter,gub,ub,abs_gap,rel_gap,max_residual_mw,wall_ms\n";
  for (const auto& h : s.history) {
    out << h.iter << ',';
    if (h.has_bounds)
      out << format_number(h.gub) << ',' << format_number(h.ub) << ',' << format_number(h.abs_gap) << ','
          << format_number(h.rel_gap);
    else
      out << ",,,";
    out << ',' << format_number(h.max_residual_mw) << ',';
    if (timings) out << format_number(h.wall_ms);
    out << '\n';
  }
  return out.str();
}

// Investments keyed by stage, tree class (named by its first long-term
// scenario) and candidate.
inline Json investments_json(const Instance& in, const Table3<double>& x) {
  Json out = Json::object();
  for (int t = 0; t < in.num_stages(); ++t) {
    Json stage = Json::object();
    const auto& part = in.tree.stage_partitions[t];
    for (std::size_t cls = 0; cls < part.size(); ++cls) {
      Json row = Json::object();
      for (int c = 0; c < in.num_candidates(); ++c) row[in.candidate_units[c].id] = x[t][cls][c];
      std::string key;
      for (int g : part[cls]) key += (key.empty() ? "" : "+") + in.long_term_scenarios[g].id;
      stage[key] = row;
    }
    out[in.stages[t].id] = stage;
  }
  return out;
}

inline Json config_json(const AdmmConfig& cfg) {
  return Json{{"rho", cfg.rho},
              {"epsilon_mw", cfg.epsilon_mw},
              {"max_iters", cfg.max_iters},
              {"anchor", to_string(cfg.anchor)},
              {"pwl_segments", cfg.pwl_segments},
              {"bound_cadence", cfg.bound_cadence}};
}

inline Json admm_report_json(const Instance& in, const AdmmConfig& cfg, const AdmmRunResult& r, bool timings,
                             double wall_s = 0.0) {
  Json j;
  j["command"] = "solve-admm";
  j["instance_fingerprint"] = fingerprint(in);
  j["config"] = config_json(cfg);
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["profit_estimate_usd"] = r.profit_estimate;
  j["gub_usd"] = r.gub;
  j["ub_usd"] = r.ub;
  j["abs_gap_usd"] = std::abs(r.gub - r.ub);
  j["rel_gap"] = std::abs(r.gub - r.ub) / std::max(1.0, std::abs(r.ub));
  j["certificate"] = r.certificate;
  j["max_residual_mw"] = r.state.history.empty() ? 0.0 : r.state.history.back().max_residual_mw;
  j["subproblem_nodes"] = r.subproblem_nodes;
  j["investments_mw"] = investments_json(in, r.consensus);
  if (timings) j["wall_s"] = wall_s;
  return j;
}

inline Json extensive_report_json(const Instance& in, const ExtensiveOptions& opt, const ExtensiveResult& r,
                                  bool timings) {
  Json j;
  j["command"] = "solve-extensive";
  j["instance_fingerprint"] = fingerprint(in);
  j["method"] = to_string(opt.method);
  j["status"] = to_string(r.status);
  const bool found = std::isfinite(r.objective);
  j["objective_usd"] = found ? Json(r.objective) : Json(nullptr);
  j["best_bound_usd"] = std::isfinite(r.best_bound) ? Json(r.best_bound) : Json(nullptr);
  j["nodes"] = r.nodes;
  j["scenario_solves"] = r.scenario_solves;
  j["investments_mw"] = found ? investments_json(in, r.x) : Json(nullptr);
  if (timings) j["wall_s"] = r.seconds;
  return j;
}

struct StatsRow {
  std::string model;
  ModelStats stats;
};

/// Size of the extensive form and of each decomposition subproblem.
inline std::vector<StatsRow> model_statistics(const Instance& in) {
  std::vector<StatsRow> rows;
  rows.push_back({"extensive", model_stats(build_extensive_form(in))});
  for (int g = 0; g < in.num_long_term(); ++g)
    for (int k = 0; k < in.num_short_term(); ++k)
      rows.push_back({"subproblem(" + in.long_term_scenarios[g].id + "," + in.short_term_scenarios[k].id + ")",
                      model_stats(build_scenario_mpcc(in, g, k))});
  return rows;
}

inline std::string statistics_csv(const std::vector<StatsRow>& rows) {
  std::ostringstream out;
  out << "model,variables,constraints,complementarity_pairs,investment_variables,clearings\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.stats.variables << ',' << r.stats.constraints << ',' << r.stats.complementarity_pairs
        << ',' << r.stats.investment_variables << ',' << r.stats.clearings << '\n';
  return out.str();
}

struct CompareRow {
  std::string method;  // "extensive" or "admm"
  double rho = 0.0;
  std::string status;
  int iterations = 0;
  double profit = 0.0;
  double gub = 0.0, ub = 0.0;  // extensive rows: gub is the best bound
  std::vector<double> first_stage;  // per candidate
  double wall_s = 0.0;
};

inline std::string compare_csv(const Instance& in, const std::vector<CompareRow>& rows, bool timings) {
  std::ostringstream out;
  out << "method,rho,status,iterations,profit_usd,gub_usd,ub_usd,abs_gap_usd,rel_gap";
  for (const auto& c : in.candidate_units) out << ",x1_" << c.id << "_mw";
  out << ",wall_s\n";
  for (const auto& r : rows) {
    const bool admm = r.method == "admm";
    out << r.method << ',' << (admm ? format_number(r.rho) : "") << ',' << r.status << ','
        << (admm ? std::to_string(r.iterations) : "") << ',' << format_number(r.profit) << ',';
    if (admm) {
      const double gap = std::abs(r.gub - r.ub);
      out << format_number(r.gub) << ',' << format_number(r.ub) << ',' << format_number(gap) << ','
          << format_number(gap / std::max(1.0, std::abs(r.ub)));
    } else {
      // The extensive row carries its best bound in the gub column.
      out << (std::isfinite(r.gub) ? format_number(r.gub) : "") << ",,,";
    }
    for (double v : r.first_stage) out << ',' << format_number(v);
    out << ',' << (timings ? format_number(r.wall_s) : "") << '\n';
  }
  return out.str();
}

}  // namespace stratinv
