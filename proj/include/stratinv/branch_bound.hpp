#pragma once

#include <chrono>
#include <functional>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <queue>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/mpcc.hpp"
#include "stratinv/simplex.hpp"
#include "stratinv/tolerances.hpp"

namespace stratinv {

struct BnbResult;

struct BnbOptions {
  double rel_gap = tol::kRelativeGap;
  long node_limit = 2'000'000;
  double time_limit_s = std::numeric_limits<double>::infinity();
  // Pairs with (a/A)(b/B) <= comp_tol count as satisfied.
  double comp_tol = tol::kComplementarity;
  // Run the LP-rounding heuristic every this many nodes (and at the root).
  int heuristic_frequency = 10;
  // Split the model into independent blocks over its non-fixed columns.
  bool decompose = true;
  // CSV node log (node,bound,incumbent,open_nodes); null disables it.
  std::ostream* node_log = nullptr;
  // Called once per solve_mpcc call with the model and its result. Solves can
  // run on several threads, so the callback must be thread-safe.
  std::function<void(const MpccModel&, const BnbResult&)> on_solved;
  SimplexOptions lp;
};

enum class BnbStatus { Optimal, Infeasible, GapLimit, NodeLimit };

inline const char* to_string(BnbStatus s) {
  switch (s) {
    case BnbStatus::Optimal: return "Optimal";
    case BnbStatus::Infeasible: return "Infeasible";
    case BnbStatus::GapLimit: return "GapLimit";
    case BnbStatus::NodeLimit: return "NodeLimit";
  }
  return "?";
}

struct BnbResult {
  BnbStatus status = BnbStatus::Infeasible;
  bool has_incumbent = false;
  std::vector<double> x;
  double objective = -std::numeric_limits<double>::infinity();
  double best_bound = std::numeric_limits<double>::infinity();
  long nodes = 0;
  long lp_iterations = 0;
  int components = 1;
};

namespace detail {

// LP plus pairs; the subset of MpccModel the tree search needs.
struct PairProgram {
  LinearProgram lp;
  std::vector<ComplementarityPair> pairs;
};

class BnbTree {
 public:
  BnbTree(const PairProgram& prog, const BnbOptions& opt)
      : prog_(prog), opt_(opt), solver_(prog.lp), lo0_(prog.lp.lower), hi0_(prog.lp.upper) {
    for (int i = 0; i < static_cast<int>(prog.pairs.size()); ++i) {
      const auto& p = prog.pairs[i];
      const double ra = range(p.a), rb = range(p.b);
      if (ra > 0.0 && rb > 0.0 && std::isfinite(ra) && std::isfinite(rb)) active_.push_back(i);
    }
  }

  BnbResult run() {
    const auto start = std::chrono::steady_clock::now();
    BnbResult res;
    long next_id = 0;
    auto cmp = [](const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) {
      if (a->bound != b->bound) return a->bound < b->bound;
      return a->id > b->id;
    };
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, decltype(cmp)> open(cmp);
    auto root = std::make_shared<Node>();
    root->bound = std::numeric_limits<double>::infinity();
    root->id = next_id++;
    open.push(root);

    double pruned_max = -std::numeric_limits<double>::infinity();
    bool limited = false;
    if (opt_.node_log) *opt_.node_log << "node,bound,incumbent,open_nodes\n";

    while (!open.empty()) {
      if (res.nodes >= opt_.node_limit ||
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > opt_.time_limit_s) {
        limited = true;
        break;
      }
      auto node = open.top();
      open.pop();
      if (res.has_incumbent && node->bound <= res.objective + gap_abs(res.objective)) {
        pruned_max = std::max(pruned_max, node->bound);
        continue;
      }
      ++res.nodes;

      const LpSolution sol = solve_node(*node, res);
      if (sol.status == LpStatus::Optimal) {
        const double bound = std::min(sol.objective, node->bound);
        if (res.has_incumbent && bound <= res.objective + gap_abs(res.objective)) {
          pruned_max = std::max(pruned_max, bound);
        } else {
          const int branch = most_violated(sol.primal);
          if (branch < 0) {
            accept(res, sol.primal, sol.objective);
            pruned_max = std::max(pruned_max, bound);
          } else {
            auto basis = std::make_shared<const Basis>(solver_.basis());
            if (res.nodes == 1 || (opt_.heuristic_frequency > 0 && res.nodes % opt_.heuristic_frequency == 0))
              round_pairs(*node, sol.primal, res);
            for (std::uint8_t side = 0; side < 2; ++side) {
              auto child = std::make_shared<Node>();
              child->bound = bound;
              child->id = next_id++;
              child->fixes = node->fixes;
              child->fixes.push_back({branch, side});
              child->basis = basis;
              open.push(std::move(child));
            }
          }
        }
      } else if (sol.status == LpStatus::Unbounded) {
        throw Error(ErrorKind::SolverFailure, "MPCC relaxation is unbounded");
      } else if (sol.status == LpStatus::IterLimit) {
        throw Error(ErrorKind::SolverLimit, "LP iteration limit inside branch-and-bound");
      }

      const double open_max = open.empty() ? -std::numeric_limits<double>::infinity() : open.top()->bound;
      const double global = std::max({open_max, res.objective, pruned_max});
      res.best_bound = std::min(res.best_bound, global);
      if (opt_.node_log)
        *opt_.node_log << res.nodes << ',' << res.best_bound << ',' << res.objective << ',' << open.size() << '\n';
    }

    if (limited) {
      const double open_max = open.empty() ? -std::numeric_limits<double>::infinity() : open.top()->bound;
      res.best_bound = std::min(res.best_bound, std::max({open_max, res.objective, pruned_max}));
      res.status = BnbStatus::NodeLimit;
    } else if (!res.has_incumbent) {
      res.status = BnbStatus::Infeasible;
      res.best_bound = -std::numeric_limits<double>::infinity();
    } else {
      res.best_bound = std::min(res.best_bound, std::max(res.objective, pruned_max));
      res.status = opt_.rel_gap <= tol::kRelativeGap ? BnbStatus::Optimal : BnbStatus::GapLimit;
    }
    return res;
  }

 private:
  struct Node {
    double bound = 0.0;
    long id = 0;
    std::vector<std::pair<int, std::uint8_t>> fixes;  // (pair, side fixed at 0: 0 = a, 1 = b)
    std::shared_ptr<const Basis> basis;
  };

  double range(const PairSide& s) const { return prog_.lp.upper[s.var] - prog_.lp.lower[s.var]; }
  double value(const PairSide& s, const std::vector<double>& x) const {
    return s.side == BoundSide::Lower ? x[s.var] - lo0_[s.var] : hi0_[s.var] - x[s.var];
  }
  double gap_abs(double incumbent) const { return opt_.rel_gap * std::max(1.0, std::abs(incumbent)); }

  double violation(int i, const std::vector<double>& x) const {
    const auto& p = prog_.pairs[i];
    const double va = std::max(0.0, value(p.a, x)) / range(p.a);
    const double vb = std::max(0.0, value(p.b, x)) / range(p.b);
    return va * vb;
  }

  int most_violated(const std::vector<double>& x) const {
    int best = -1;
    double worst = opt_.comp_tol;
    for (int i : active_) {
      const double v = violation(i, x);
      if (v > worst) {
        worst = v;
        best = i;
      }
    }
    return best;
  }

  // Tightens [lo, hi] so that the given side sits at its bound.
  void fix_side(const PairSide& s, std::vector<double>& lo, std::vector<double>& hi) const {
    if (s.side == BoundSide::Lower) hi[s.var] = std::min(hi[s.var], lo0_[s.var]);
    else lo[s.var] = std::max(lo[s.var], hi0_[s.var]);
  }

  // Installs the bounds in the solver; false when they are contradictory.
  bool install(const std::vector<double>& lo, const std::vector<double>& hi) {
    for (int j : touched_) solver_.set_bounds(j, lo0_[j], hi0_[j]);
    touched_.clear();
    for (int j = 0; j < static_cast<int>(lo.size()); ++j) {
      if (lo[j] == lo0_[j] && hi[j] == hi0_[j]) continue;
      if (lo[j] > hi[j]) return false;
      solver_.set_bounds(j, lo[j], hi[j]);
      touched_.push_back(j);
    }
    return true;
  }

  LpSolution solve_node(const Node& node, BnbResult& res) {
    std::vector<double> lo = lo0_, hi = hi0_;
    for (const auto& [pair, side] : node.fixes) {
      const auto& p = prog_.pairs[pair];
      fix_side(side == 0 ? p.a : p.b, lo, hi);
    }
    LpSolution sol;
    if (!install(lo, hi)) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    if (node.basis) solver_.set_basis(*node.basis);
    sol = solver_.solve(opt_.lp);
    res.lp_iterations += sol.iterations;
    return sol;
  }

  void accept(BnbResult& res, const std::vector<double>& x, double obj) {
    if (res.has_incumbent && obj <= res.objective) return;
    res.has_incumbent = true;
    res.objective = obj;
    res.x = x;
  }

  // LP rounding: put every unfixed pair on its smaller side and re-solve.
  void round_pairs(const Node& node, const std::vector<double>& x, BnbResult& res) {
    std::vector<double> lo = lo0_, hi = hi0_;
    for (const auto& [pair, side] : node.fixes) {
      const auto& p = prog_.pairs[pair];
      fix_side(side == 0 ? p.a : p.b, lo, hi);
    }
    for (int i : active_) {
      const auto& p = prog_.pairs[i];
      const double va = std::max(0.0, value(p.a, x)) / range(p.a);
      const double vb = std::max(0.0, value(p.b, x)) / range(p.b);
      fix_side(va <= vb ? p.a : p.b, lo, hi);
    }
    if (!install(lo, hi)) return;
    const LpSolution sol = solver_.solve(opt_.lp);
    res.lp_iterations += sol.iterations;
    if (sol.status == LpStatus::Optimal && most_violated(sol.primal) < 0) accept(res, sol.primal, sol.objective);
  }

  const PairProgram& prog_;
  BnbOptions opt_;
  SimplexSolver solver_;
  std::vector<double> lo0_, hi0_;
  std::vector<int> active_;
  std::vector<int> touched_;
};

// Union-find over columns that are not fixed.
class Components {
 public:
  explicit Components(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace detail

namespace detail {

inline BnbResult solve_mpcc_blocks(const MpccModel& model, const BnbOptions& opt) {
  using detail::PairProgram;
  const LinearProgram& lp = model.lp;
  const int n = lp.num_vars();
  auto is_free = [&](int j) { return lp.lower[j] < lp.upper[j]; };

  if (!opt.decompose) {
    PairProgram prog{lp, model.pairs};
    return detail::BnbTree(prog, opt).run();
  }

  detail::Components comp(n);
  for (const auto& row : lp.rows) {
    int first = -1;
    for (int j : row.index) {
      if (!is_free(j)) continue;
      if (first < 0) first = j;
      else comp.unite(first, j);
    }
  }
  for (const auto& p : model.pairs)
    if (is_free(p.a.var) && is_free(p.b.var)) comp.unite(p.a.var, p.b.var);

  std::vector<int> label(n, -1), roots;
  for (int j = 0; j < n; ++j) {
    if (!is_free(j)) continue;
    const int r = comp.find(j);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      label[j] = static_cast<int>(roots.size());
      roots.push_back(r);
    } else {
      label[j] = static_cast<int>(it - roots.begin());
    }
  }
  const int ncomp = static_cast<int>(roots.size());
  if (ncomp <= 1) {
    PairProgram prog{lp, model.pairs};
    auto res = detail::BnbTree(prog, opt).run();
    res.components = 1;
    return res;
  }

  // Fixed columns become constants.
  std::vector<double> fixed_x(n, 0.0);
  double constant = 0.0;
  for (int j = 0; j < n; ++j)
    if (!is_free(j)) {
      fixed_x[j] = lp.lower[j];
      constant += lp.objective[j] * lp.lower[j];
    }

  std::vector<PairProgram> parts(ncomp);
  std::vector<std::vector<int>> cols(ncomp);
  std::vector<int> local(n, -1);
  for (int j = 0; j < n; ++j)
    if (label[j] >= 0) {
      local[j] = static_cast<int>(cols[label[j]].size());
      cols[label[j]].push_back(j);
      parts[label[j]].lp.add_variable(lp.lower[j], lp.upper[j], lp.objective[j]);
    }

  BnbResult infeasible;
  infeasible.status = BnbStatus::Infeasible;
  infeasible.components = ncomp;
  infeasible.best_bound = -std::numeric_limits<double>::infinity();

  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    double fixed_part = 0.0;
    int owner = -1;
    SparseVector sub;
    for (std::size_t p = 0; p < row.size(); ++p) {
      const int j = row.index[p];
      if (label[j] < 0) {
        fixed_part += row.value[p] * fixed_x[j];
      } else {
        owner = label[j];
        sub.add(local[j], row.value[p]);
      }
    }
    const double rhs = lp.rhs[i] - fixed_part;
    if (owner < 0) {
      const double slack_tol = tol::kPrimalFeasibility * (1.0 + std::abs(lp.rhs[i]));
      const bool ok = lp.senses[i] == RowSense::Equal       ? std::abs(rhs) <= slack_tol
                      : lp.senses[i] == RowSense::LessEqual ? rhs >= -slack_tol
                                                            : rhs <= slack_tol;
      if (!ok) return infeasible;
      continue;
    }
    parts[owner].lp.add_row(std::move(sub), lp.senses[i], rhs);
  }

  for (const auto& p : model.pairs) {
    const bool fa = !is_free(p.a.var), fb = !is_free(p.b.var);
    if (fa && fb) {
      const double va = model.side_value(p.a, fixed_x), vb = model.side_value(p.b, fixed_x);
      const double ra = model.side_range(p.a), rb = model.side_range(p.b);
      if (ra > 0.0 && rb > 0.0 && (va / ra) * (vb / rb) > opt.comp_tol) return infeasible;
      continue;
    }
    if (fa || fb) {
      // One side is a constant; if it is positive the other must vanish.
      const PairSide& fixed_side = fa ? p.a : p.b;
      const PairSide& other = fa ? p.b : p.a;
      const double ra = model.side_range(fixed_side);
      const double v = model.side_value(fixed_side, fixed_x);
      if (ra > 0.0 && v / ra > opt.comp_tol) {
        auto& sub = parts[label[other.var]].lp;
        const int j = local[other.var];
        if (other.side == BoundSide::Lower) sub.upper[j] = sub.lower[j];
        else sub.lower[j] = sub.upper[j];
      }
      continue;
    }
    const int owner = label[p.a.var];
    parts[owner].pairs.push_back({{local[p.a.var], p.a.side}, {local[p.b.var], p.b.side}});
  }

  BnbResult total;
  total.components = ncomp;
  total.has_incumbent = true;
  total.x = fixed_x;
  total.objective = constant;
  total.best_bound = constant;
  total.status = BnbStatus::Optimal;
  for (int c = 0; c < ncomp; ++c) {
    // Pair ranges must be measured in the component's own box, which equals
    // the model box for every column that stays free.
    auto res = detail::BnbTree(parts[c], opt).run();
    total.nodes += res.nodes;
    total.lp_iterations += res.lp_iterations;
    if (res.status == BnbStatus::Infeasible) {
      infeasible.nodes = total.nodes;
      return infeasible;
    }
    if (!res.has_incumbent) total.has_incumbent = false;
    if (res.status == BnbStatus::NodeLimit) total.status = BnbStatus::NodeLimit;
    if (res.status == BnbStatus::GapLimit && total.status == BnbStatus::Optimal) total.status = BnbStatus::GapLimit;
    total.best_bound += res.best_bound;
    if (res.has_incumbent) {
      total.objective += res.objective;
      for (std::size_t k = 0; k < cols[c].size(); ++k) total.x[cols[c][k]] = res.x[k];
    }
  }
  if (!total.has_incumbent) {
    total.objective = -std::numeric_limits<double>::infinity();
    total.x.clear();
  }
  return total;
}

}  // namespace detail

/// Global optimum of an MPCC by branching on complementarity pairs over LP
/// relaxations (maximization).
inline BnbResult solve_mpcc(const MpccModel& model, const BnbOptions& opt = {}) {
  BnbResult r = detail::solve_mpcc_blocks(model, opt);
  if (opt.on_solved) opt.on_solved(model, r);
  return r;
}

}  // namespace stratinv
