#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <queue>
#include <vector>

#include "stratinv/branch_bound.hpp"
#include "stratinv/error.hpp"
#include "stratinv/model.hpp"
#include "stratinv/reformulate.hpp"

namespace stratinv {

enum class ExtensiveMethod {
  Direct,         // one branch-and-bound tree over the whole extensive model
  ScenarioBoxes,  // branch on investment boxes, bound by independent scenario copies
};

inline const char* to_string(ExtensiveMethod m) {
  return m == ExtensiveMethod::Direct ? "direct" : "scenario-boxes";
}

struct ExtensiveOptions {
  ExtensiveMethod method = ExtensiveMethod::ScenarioBoxes;
  double rel_gap = tol::kRelativeGap;
  long box_limit = 100'000;
  double time_limit_s = std::numeric_limits<double>::infinity();
  BnbOptions bnb;  // used for the direct tree and for every scenario solve
  ReformulationOptions reform;
};

struct ExtensiveResult {
  BnbStatus status = BnbStatus::Infeasible;
  double objective = -std::numeric_limits<double>::infinity();
  double best_bound = std::numeric_limits<double>::infinity();
  Table3<double> x;  // [t][class][c]
  long nodes = 0;    // tree nodes (direct) or boxes (scenario boxes)
  long scenario_solves = 0;
  double seconds = 0.0;
};

namespace detail {

inline Table3<double> class_table(const Instance& in) {
  Table3<double> x(in.num_stages());
  for (int t = 0; t < in.num_stages(); ++t)
    x[t].assign(in.tree.stage_partitions[t].size(), std::vector<double>(in.num_candidates(), 0.0));
  return x;
}

inline ExtensiveResult solve_extensive_direct(const Instance& in, const ExtensiveOptions& opt) {
  const MpccModel m = build_extensive_form(in, opt.reform);
  BnbOptions b = opt.bnb;
  b.rel_gap = opt.rel_gap;
  b.time_limit_s = std::min(b.time_limit_s, opt.time_limit_s);
  const BnbResult r = solve_mpcc(m, b);
  ExtensiveResult out;
  out.status = r.status;
  out.objective = r.objective;
  out.best_bound = r.best_bound;
  out.nodes = r.nodes;
  out.x = class_table(in);
  if (r.has_incumbent)
    for (const auto& inv : m.investments) out.x[inv.t][inv.node][inv.c] = std::max(0.0, r.x[inv.col]);
  return out;
}

// Spatial branch-and-bound over the investment columns. A box is bounded by
// letting every scenario pick its own investments inside the box (the
// non-anticipativity rows are dropped, so the scenario problems separate) and
// a candidate is the probability-weighted mean of those copies, priced
// exactly with investments fixed. The bound of a box closes on the
// candidate once all copies agree.
class ScenarioBoxSearch {
 public:
  ScenarioBoxSearch(const Instance& in, const ExtensiveOptions& opt) : in_(in), opt_(opt) {
    const int T = in.num_stages(), C = in.num_candidates();
    for (int t = 0; t < T; ++t)
      for (std::size_t cls = 0; cls < in.tree.stage_partitions[t].size(); ++cls)
        for (int c = 0; c < C; ++c) {
          dims_.push_back({t, static_cast<int>(cls), c});
          hi0_.push_back(in.candidate_units[c].max_capacity_mw);
        }
    for (int g = 0; g < in.num_long_term(); ++g)
      for (int k = 0; k < in.num_short_term(); ++k) {
        Scenario s;
        s.g = g;
        s.weight = in.long_term_scenarios[g].probability * in.short_term_scenarios[k].probability;
        s.model = build_scenario_mpcc(in, g, k, opt.reform);
        for (const auto& inv : s.model.investments) s.dim_of_col.push_back({inv.col, dim_index(inv.t, in.tree.class_of(inv.t, g), inv.c)});
        scenarios_.push_back(std::move(s));
      }
  }

  ExtensiveResult run() {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    ExtensiveResult out;
    out.x = class_table(in_);

    std::vector<double> best_x;
    double incumbent = -std::numeric_limits<double>::infinity();
    std::priority_queue<std::shared_ptr<Box>, std::vector<std::shared_ptr<Box>>, BoxOrder> open;
    auto root = std::make_shared<Box>();
    root->lo.assign(dims_.size(), 0.0);
    root->hi = hi0_;
    root->bound = std::numeric_limits<double>::infinity();
    open.push(root);
    long next_id = 1;
    double pruned_max = -std::numeric_limits<double>::infinity();
    bool limit_hit = false;

    auto gap_ok = [&](double bound) {
      return std::isfinite(incumbent) && bound - incumbent <= opt_.rel_gap * std::max(1.0, std::abs(incumbent));
    };

    while (!open.empty()) {
      if (gap_ok(open.top()->bound)) break;
      if (out.nodes >= opt_.box_limit || elapsed() > opt_.time_limit_s) {
        limit_hit = true;
        break;
      }
      auto box = open.top();
      open.pop();
      ++out.nodes;

      Evaluation ev;
      if (!bound_box(*box, ev, out.scenario_solves)) continue;  // no feasible investments in the box
      const double bound = std::min(box->bound, ev.bound);
      if (bound == -std::numeric_limits<double>::infinity()) continue;

      const std::vector<double> cand = weighted_mean(ev.copies);
      const double value = price_candidate(cand, out.scenario_solves);
      if (value > incumbent) {
        incumbent = value;
        best_x = cand;
      }
      if (gap_ok(bound)) {
        pruned_max = std::max(pruned_max, bound);
        continue;
      }

      // Split the dimension where the copies disagree most, at their mean.
      int dim = -1;
      double spread = 0.0;
      for (std::size_t d = 0; d < dims_.size(); ++d) {
        const double s = dispersion(ev.copies, d, cand[d]) / std::max(1.0, hi0_[d]);
        if (s > spread) {
          spread = s;
          dim = static_cast<int>(d);
        }
      }
      double cut = dim >= 0 ? cand[dim] : 0.0;
      const double min_width = 1e-9;
      if (dim < 0 || cut - box->lo[dim] <= min_width * (1.0 + hi0_[dim]) ||
          box->hi[dim] - cut <= min_width * (1.0 + hi0_[dim])) {
        // Copies agree to rounding: halve the widest side instead.
        dim = -1;
        double width = 0.0;
        for (std::size_t d = 0; d < dims_.size(); ++d)
          if ((box->hi[d] - box->lo[d]) / std::max(1.0, hi0_[d]) > width) {
            width = (box->hi[d] - box->lo[d]) / std::max(1.0, hi0_[d]);
            dim = static_cast<int>(d);
          }
        if (dim < 0 || width <= min_width) {
          pruned_max = std::max(pruned_max, bound);
          continue;
        }
        cut = 0.5 * (box->lo[dim] + box->hi[dim]);
      }
      for (int side = 0; side < 2; ++side) {
        auto child = std::make_shared<Box>(*box);
        child->id = next_id++;
        child->bound = bound;
        (side == 0 ? child->hi[dim] : child->lo[dim]) = cut;
        open.push(child);
      }
    }

    double open_max = open.empty() ? -std::numeric_limits<double>::infinity() : open.top()->bound;
    out.best_bound = std::max({open_max, pruned_max, incumbent});
    out.objective = incumbent;
    if (best_x.empty()) {
      out.status = limit_hit ? BnbStatus::NodeLimit : BnbStatus::Infeasible;
      if (!limit_hit) out.best_bound = -std::numeric_limits<double>::infinity();
    } else {
      out.status = limit_hit ? BnbStatus::NodeLimit : BnbStatus::Optimal;
      for (std::size_t d = 0; d < dims_.size(); ++d) out.x[dims_[d].t][dims_[d].cls][dims_[d].c] = best_x[d];
    }
    out.seconds = elapsed();
    return out;
  }

 private:
  struct Dim {
    int t, cls, c;
  };
  struct Scenario {
    int g = 0;
    double weight = 0.0;
    MpccModel model;
    std::vector<std::pair<int, int>> dim_of_col;  // (model column, box dimension)
  };
  struct Box {
    std::vector<double> lo, hi;
    double bound = 0.0;
    long id = 0;
  };
  struct BoxOrder {
    bool operator()(const std::shared_ptr<Box>& a, const std::shared_ptr<Box>& b) const {
      if (a->bound != b->bound) return a->bound < b->bound;
      return a->id > b->id;
    }
  };
  struct Evaluation {
    double bound = 0.0;
    std::vector<std::vector<double>> copies;  // per scenario, indexed by dimension (NaN when unused)
  };

  int dim_index(int t, int cls, int c) const {
    for (std::size_t d = 0; d < dims_.size(); ++d)
      if (dims_[d].t == t && dims_[d].cls == cls && dims_[d].c == c) return static_cast<int>(d);
    throw Error(ErrorKind::Internal, "unknown investment dimension");
  }

  BnbResult solve_scenario(const Scenario& s, const std::vector<double>& lo, const std::vector<double>& hi,
                           long& solves) const {
    MpccModel m = s.model;
    for (const auto& [col, d] : s.dim_of_col) {
      m.lp.lower[col] = lo[d];
      m.lp.upper[col] = hi[d];
    }
    BnbOptions b = opt_.bnb;
    b.rel_gap = std::min(b.rel_gap, 0.1 * opt_.rel_gap);
    ++solves;
    return solve_mpcc(m, b);
  }

  bool bound_box(const Box& box, Evaluation& ev, long& solves) const {
    ev.bound = 0.0;
    ev.copies.assign(scenarios_.size(), std::vector<double>(dims_.size(), std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < scenarios_.size(); ++i) {
      const auto& s = scenarios_[i];
      const BnbResult r = solve_scenario(s, box.lo, box.hi, solves);
      if (r.status == BnbStatus::Infeasible) return false;
      ev.bound += s.weight * r.best_bound;
      if (!r.has_incumbent) {
        for (const auto& [col, d] : s.dim_of_col) ev.copies[i][d] = 0.5 * (box.lo[d] + box.hi[d]);
        continue;
      }
      for (const auto& [col, d] : s.dim_of_col) ev.copies[i][d] = std::clamp(r.x[col], box.lo[d], box.hi[d]);
    }
    return true;
  }

  std::vector<double> weighted_mean(const std::vector<std::vector<double>>& copies) const {
    std::vector<double> sum(dims_.size(), 0.0), w(dims_.size(), 0.0);
    for (std::size_t i = 0; i < scenarios_.size(); ++i)
      for (std::size_t d = 0; d < dims_.size(); ++d)
        if (!std::isnan(copies[i][d])) {
          sum[d] += scenarios_[i].weight * copies[i][d];
          w[d] += scenarios_[i].weight;
        }
    for (std::size_t d = 0; d < dims_.size(); ++d) sum[d] = w[d] > 0.0 ? sum[d] / w[d] : 0.0;
    return sum;
  }

  double dispersion(const std::vector<std::vector<double>>& copies, std::size_t d, double mean) const {
    double s = 0.0;
    for (std::size_t i = 0; i < scenarios_.size(); ++i)
      if (!std::isnan(copies[i][d])) s += scenarios_[i].weight * std::abs(copies[i][d] - mean);
    return s;
  }

  // Expected objective with every scenario's investments fixed to x.
  double price_candidate(const std::vector<double>& x, long& solves) const {
    double total = 0.0;
    for (const auto& s : scenarios_) {
      const BnbResult r = solve_scenario(s, x, x, solves);
      if (!r.has_incumbent) return -std::numeric_limits<double>::infinity();
      total += s.weight * r.objective;
    }
    return total;
  }

  const Instance& in_;
  ExtensiveOptions opt_;
  std::vector<Dim> dims_;
  std::vector<double> hi0_;
  std::vector<Scenario> scenarios_;
};

}  // namespace detail

/// Global optimum of the extensive form. Both methods return the same
/// optimum; the scenario-box search scales with the scenario count rather
/// than with the product of the clearings' branching.
inline ExtensiveResult solve_extensive(const Instance& in, const ExtensiveOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  ExtensiveResult r = opt.method == ExtensiveMethod::Direct ? detail::solve_extensive_direct(in, opt)
                                                           : detail::ScenarioBoxSearch(in, opt).run();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace stratinv
