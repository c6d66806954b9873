#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "stratinv/branch_bound.hpp"
#include "stratinv/error.hpp"
#include "stratinv/model.hpp"
#include "stratinv/reformulate.hpp"

namespace stratinv {

enum class AnchorMode { Local, Consensus };

inline const char* to_string(AnchorMode a) { return a == AnchorMode::Local ? "local" : "consensus"; }

struct AdmmConfig {
  double rho = 100.0;          // $/MW²
  double epsilon_mw = 0.5;
  int max_iters = 500;
  AnchorMode anchor = AnchorMode::Consensus;
  int pwl_segments = 100;
  // Compute GUB/UB every n iterations; 0 picks 1 for up to 16 scenario
  // pairs and 5 otherwise. Iteration 0 and the last iteration always get bounds.
  int bound_cadence = 0;
  int workers = 1;
  BnbOptions bnb;
  ReformulationOptions reform;

  void validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidArgument, "rho must be finite and >= 0");
    if (!(epsilon_mw > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
    if (max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 0");
    if (pwl_segments < 1) throw Error(ErrorKind::InvalidArgument, "pwl_segments must be >= 1");
    if (bound_cadence < 0) throw Error(ErrorKind::InvalidArgument, "bound_cadence must be >= 0");
    if (workers < 1) throw Error(ErrorKind::InvalidArgument, "workers must be >= 1");
  }

  int cadence_for(const Instance& in) const {
    if (bound_cadence > 0) return bound_cadence;
    return in.num_long_term() * in.num_short_term() <= 16 ? 1 : 5;
  }
};

// Per-(γ, k) values of a stage-by-candidate quantity: [γ][k][t][c].
using ScenarioTable = Table4<double>;

struct AdmmIteration {
  int iter = 0;
  bool has_bounds = false;
  double gub = 0.0;
  double ub = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double max_residual_mw = 0.0;
  // max over classes of |Σ w μ| / Σ w |μ| (0 when μ vanishes on a class)
  double dual_sum_residual = 0.0;
  bool certificate = false;
  double wall_ms = 0.0;
};

struct AdmmState {
  int iter = -1;
  ScenarioTable x, xbar, mu, residual;
  std::vector<AdmmIteration> history;
};

enum class AdmmStatus { Converged, IterLimit };

inline const char* to_string(AdmmStatus s) { return s == AdmmStatus::Converged ? "Converged" : "IterLimit"; }

struct AdmmRunResult {
  AdmmStatus status = AdmmStatus::IterLimit;
  AdmmState state;
  // Consensus investments per stage and tree class: [t][class][c].
  Table3<double> consensus;
  // Expected profit of the consensus investments (a feasible plan).
  double profit_estimate = 0.0;
  double gub = 0.0;
  double ub = 0.0;
  bool certificate = false;
  int iterations = 0;  // index of the last iteration run
  long subproblem_nodes = 0;
};

struct SubproblemResult {
  Table2<double> x;  // [t][c]
  double objective = 0.0;
  double bound = 0.0;
  long nodes = 0;
};

namespace detail {

inline std::string scenario_label(const Instance& in, int g, int k) {
  return "(" + in.long_term_scenarios[g].id + ", " + in.short_term_scenarios[k].id + ")";
}

inline BnbResult solve_or_throw(const MpccModel& m, const BnbOptions& opt, const std::string& what) {
  BnbResult r = solve_mpcc(m, opt);
  if (r.status == BnbStatus::Infeasible) throw Error(ErrorKind::SolverFailure, what + ": model is infeasible");
  if (r.status == BnbStatus::NodeLimit)
    throw Error(ErrorKind::SolverLimit, what + ": branch-and-bound limit reached");
  return r;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to slot i by fn, so the outcome does not depend on scheduling.
// The exception of the lowest failing index is rethrown.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    auto run = [&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline ScenarioTable zeros(const Instance& in) {
  return ScenarioTable(in.num_long_term(),
                       Table3<double>(in.num_short_term(), Table2<double>(in.num_stages(),
                                                                          std::vector<double>(in.num_candidates(), 0.0))));
}

}  // namespace detail

/// Solves the proximal subproblem of (γ, k) to global optimality.
inline SubproblemResult subproblem_step(const Instance& in, int g, int k, const Table2<double>& mu,
                                        const Table2<double>& anchor, double rho, const AdmmConfig& cfg) {
  // Extra tangents at anchor ± ε/2 keep the zero-penalty zone narrower than ε.
  const MpccModel m =
      build_admm_subproblem(in, g, k, mu, anchor, rho, cfg.pwl_segments, cfg.reform, 0.5 * cfg.epsilon_mw);
  const BnbResult r = detail::solve_or_throw(m, cfg.bnb, "subproblem " + detail::scenario_label(in, g, k));
  SubproblemResult out;
  out.x = investment_values(m, in, r.x);
  for (auto& row : out.x)
    for (auto& v : row) v = std::max(0.0, v);
  for (int t = 0; t < in.num_stages(); ++t)
    for (int c = 0; c < in.num_candidates(); ++c)
      out.x[t][c] = std::min(out.x[t][c], in.candidate_units[c].max_capacity_mw);
  out.objective = r.objective;
  out.bound = r.best_bound;
  out.nodes = r.nodes;
  return out;
}

/// Class-weighted average of x over every combined class, written back to
/// each member. Deviations from the first member are averaged so that equal
/// inputs reproduce themselves exactly.
inline ScenarioTable consensus_update(const Instance& in, const ScenarioTable& x) {
  ScenarioTable xbar = x;
  for (int t = 0; t < in.num_stages(); ++t)
    for (const auto& cls : in.tree.stage_partitions[t]) {
      const auto members = combined_class(in, t, cls.front(), 0);
      for (int c = 0; c < in.num_candidates(); ++c) {
        const double ref = x[members.front().gamma][members.front().k][t][c];
        double num = 0.0, den = 0.0;
        for (const auto& m : members) {
          num += m.weight * (x[m.gamma][m.k][t][c] - ref);
          den += m.weight;
        }
        const double v = ref + num / den;
        for (const auto& m : members) xbar[m.gamma][m.k][t][c] = v;
      }
    }
  return xbar;
}

/// μ + ρ (x - x̄), componentwise. In exact arithmetic the class-weighted
/// increments sum to zero; x̄ is rounded, so the heaviest member of each
/// class takes the increment that makes the weighted sum vanish. Throws if
/// that increment differs from ρ (x - x̄) by more than rounding, which would
/// mean x̄ is not the class-weighted mean of x.
inline ScenarioTable dual_update(const Instance& in, const ScenarioTable& mu, const ScenarioTable& x,
                                 const ScenarioTable& xbar, double rho) {
  ScenarioTable out = mu;
  for (int t = 0; t < in.num_stages(); ++t)
    for (const auto& cls : in.tree.stage_partitions[t]) {
      const auto members = combined_class(in, t, cls.front(), 0);
      std::size_t pivot = 0;
      for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].weight > members[pivot].weight) pivot = i;
      for (int c = 0; c < in.num_candidates(); ++c) {
        double acc = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
          const auto& m = members[i];
          scale = std::max(scale, std::abs(x[m.gamma][m.k][t][c]));
          if (i == pivot) continue;
          const double delta = rho * (x[m.gamma][m.k][t][c] - xbar[m.gamma][m.k][t][c]);
          out[m.gamma][m.k][t][c] += delta;
          acc += m.weight * delta;
        }
        const auto& p = members[pivot];
        const double delta = -acc / p.weight;
        const double plain = rho * (x[p.gamma][p.k][t][c] - xbar[p.gamma][p.k][t][c]);
        if (std::abs(delta - plain) > 1e-9 * rho * (1.0 + scale) / p.weight)
          throw Error(ErrorKind::Internal, "consensus is not the class-weighted mean of the iterates");
        out[p.gamma][p.k][t][c] += delta;
      }
    }
  return out;
}

/// Largest relative class-weighted dual sum |Σ w μ| / Σ w |μ| over all
/// stages, classes and candidates.
inline double dual_sum_residual(const Instance& in, const ScenarioTable& mu) {
  double worst = 0.0;
  for (int t = 0; t < in.num_stages(); ++t)
    for (const auto& cls : in.tree.stage_partitions[t]) {
      const auto members = combined_class(in, t, cls.front(), 0);
      for (int c = 0; c < in.num_candidates(); ++c) {
        double sum = 0.0, mag = 0.0;
        for (const auto& m : members) {
          sum += m.weight * mu[m.gamma][m.k][t][c];
          mag += m.weight * std::abs(mu[m.gamma][m.k][t][c]);
        }
        if (mag > 0.0) worst = std::max(worst, std::abs(sum) / mag);
      }
    }
  return worst;
}

/// Σ π^LT π^MS D_{γk}(μ), each D the Lagrangian subproblem without the
/// proximal term; each term uses the branch-and-bound upper bound so the
/// result stays a valid bound when a tree stops at its gap tolerance.
inline double compute_gub(const Instance& in, const ScenarioTable& mu, const AdmmConfig& cfg) {
  const double dsum = dual_sum_residual(in, mu);
  if (dsum > 1e-8)
    throw Error(ErrorKind::Internal, "duals violate the class-sum condition (residual " + std::to_string(dsum) + ")");
  const int K = in.num_short_term();
  const int n = in.num_long_term() * K;
  std::vector<double> d(n);
  const Table2<double> none(in.num_stages(), std::vector<double>(in.num_candidates(), 0.0));
  detail::parallel_for(n, cfg.workers, [&](int i) {
    const int g = i / K, k = i % K;
    const MpccModel m = build_admm_subproblem(in, g, k, mu[g][k], none, 0.0, 1, cfg.reform);
    d[i] = detail::solve_or_throw(m, cfg.bnb, "Lagrangian bound " + detail::scenario_label(in, g, k)).best_bound;
  });
  double gub = 0.0;
  for (int i = 0; i < n; ++i)
    gub += in.long_term_scenarios[i / K].probability * in.short_term_scenarios[i % K].probability * d[i];
  return gub;
}

/// Σ π^LT π^MS × optimum of the scenario problem with investments fixed to x.
inline double compute_ub(const Instance& in, const ScenarioTable& x, const AdmmConfig& cfg) {
  const int K = in.num_short_term();
  const int n = in.num_long_term() * K;
  std::vector<double> v(n);
  detail::parallel_for(n, cfg.workers, [&](int i) {
    const int g = i / K, k = i % K;
    const MpccModel m = build_fixed_investment_problem(in, g, k, x[g][k], cfg.reform);
    v[i] = detail::solve_or_throw(m, cfg.bnb, "fixed-investment problem " + detail::scenario_label(in, g, k)).objective;
  });
  double ub = 0.0;
  for (int i = 0; i < n; ++i)
    ub += in.long_term_scenarios[i / K].probability * in.short_term_scenarios[i % K].probability * v[i];
  return ub;
}

inline bool certificate_holds(double gub, double ub, double max_residual, double epsilon) {
  return std::abs(gub - ub) <= 1e-6 * (1.0 + std::abs(ub)) && max_residual <= epsilon;
}

/// (GUB, UB, |GUB - UB|, max residual) for the iterations that carry bounds.
struct GapRow {
  int iter = 0;
  double gub = 0.0, ub = 0.0, abs_gap = 0.0, max_residual_mw = 0.0;
  bool certificate = false;
};

inline std::vector<GapRow> gap_report(const AdmmState& s) {
  std::vector<GapRow> rows;
  for (const auto& h : s.history)
    if (h.has_bounds) rows.push_back({h.iter, h.gub, h.ub, h.abs_gap, h.max_residual_mw, h.certificate});
  return rows;
}

/// Consensus decomposition over both scenario trees.
/// `on_iteration` (optional) sees each finished iteration record.
inline AdmmRunResult admm_solve(const Instance& in, const AdmmConfig& cfg,
                                const std::function<void(const AdmmIteration&)>& on_iteration = {}) {
  cfg.validate();
  require_valid(in);
  const int G = in.num_long_term(), K = in.num_short_term(), n = G * K;
  const int cadence = cfg.cadence_for(in);

  AdmmRunResult res;
  AdmmState& s = res.state;
  s.mu = detail::zeros(in);
  s.x = s.mu;
  s.xbar = s.mu;
  s.residual = s.mu;

  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const ScenarioTable& anchor = cfg.anchor == AnchorMode::Local ? s.x : s.xbar;
    const double rho = iter == 0 ? 0.0 : cfg.rho;
    ScenarioTable x_new = s.x;
    std::vector<long> nodes(n, 0);
    detail::parallel_for(n, cfg.workers, [&](int i) {
      const int g = i / K, k = i % K;
      auto r = subproblem_step(in, g, k, s.mu[g][k], anchor[g][k], rho, cfg);
      x_new[g][k] = std::move(r.x);
      nodes[i] = r.nodes;
    });
    for (long v : nodes) res.subproblem_nodes += v;

    s.iter = iter;
    s.x = std::move(x_new);
    s.xbar = consensus_update(in, s.x);
    s.mu = dual_update(in, s.mu, s.x, s.xbar, cfg.rho);

    AdmmIteration rec;
    rec.iter = iter;
    for (int g = 0; g < G; ++g)
      for (int k = 0; k < K; ++k)
        for (int t = 0; t < in.num_stages(); ++t)
          for (int c = 0; c < in.num_candidates(); ++c) {
            s.residual[g][k][t][c] = std::abs(s.x[g][k][t][c] - s.xbar[g][k][t][c]);
            rec.max_residual_mw = std::max(rec.max_residual_mw, s.residual[g][k][t][c]);
          }
    rec.dual_sum_residual = dual_sum_residual(in, s.mu);
    const bool converged = rec.max_residual_mw <= cfg.epsilon_mw;
    const bool last = converged || iter == cfg.max_iters;
    if (iter == 0 || last || iter % cadence == 0) {
      rec.has_bounds = true;
      rec.gub = compute_gub(in, s.mu, cfg);
      rec.ub = compute_ub(in, s.x, cfg);
      rec.abs_gap = std::abs(rec.gub - rec.ub);
      rec.rel_gap = rec.abs_gap / std::max(1.0, std::abs(rec.ub));
      rec.certificate = certificate_holds(rec.gub, rec.ub, rec.max_residual_mw, cfg.epsilon_mw);
      res.gub = rec.gub;
      res.ub = rec.ub;
      res.certificate = rec.certificate;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    s.history.push_back(rec);
    if (on_iteration) on_iteration(rec);
    res.iterations = iter;
    if (converged) {
      res.status = AdmmStatus::Converged;
      break;
    }
  }

  // Consensus plan per tree class and its expected profit.
  res.consensus.resize(in.num_stages());
  ScenarioTable plan = s.xbar;
  for (int t = 0; t < in.num_stages(); ++t)
    for (const auto& cls : in.tree.stage_partitions[t]) {
      const int g = cls.front();
      double w = 0.0;
      std::vector<double> avg(in.num_candidates(), 0.0);
      for (int k = 0; k < K; ++k) {
        const double p = in.short_term_scenarios[k].probability;
        for (int c = 0; c < in.num_candidates(); ++c) avg[c] += p * s.xbar[g][k][t][c];
        w += p;
      }
      for (auto& v : avg) v /= w;
      for (int gg : cls)
        for (int k = 0; k < K; ++k) plan[gg][k][t] = avg;
      res.consensus[t].push_back(avg);
    }
  res.profit_estimate = compute_ub(in, plan, cfg);
  return res;
}

}  // namespace stratinv
