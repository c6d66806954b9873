#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "stratinv/simplex.hpp"

namespace stratinv {

enum class VarRole : std::uint8_t {
  Investment,
  OfferQuantity,
  OfferPrice,
  Dispatch,
  ClearingPrice,
  BoundDual,
  OfferSlack,
  EpigraphAux,
};

struct VarInfo {
  std::string name;
  VarRole role = VarRole::Dispatch;
};

// A pair side is a variable measured from one of its bounds: Lower means
// x - lower, Upper means upper - x. Both are nonnegative on the model box.
enum class BoundSide : std::uint8_t { Lower, Upper };

struct PairSide {
  int var = -1;
  BoundSide side = BoundSide::Lower;
};

struct ComplementarityPair {
  PairSide a;
  PairSide b;
};

/// Columns of one strategic unit inside a clearing block.
struct StrategicColumns {
  int quantity = -1;  // offer quantity P̄
  int price = -1;     // offer price β
  int dispatch = -1;
  int slack = -1;     // P̄ - P
  int upper_dual = -1;
  int lower_dual = -1;
  double marginal_cost = 0.0;
};

/// Columns and data of one embedded lower-level clearing (t, γ, h, k).
struct ClearingBlock {
  int t = 0;
  int gamma = 0;
  int k = 0;
  int h = 0;
  double weight = 0.0;  // objective multiplier on the operating profit of this clearing
  int price = -1;       // λ
  std::vector<int> demand, demand_upper_dual, demand_lower_dual;
  std::vector<double> demand_cap, demand_utility;
  std::vector<int> rival, rival_upper_dual, rival_lower_dual;
  std::vector<double> rival_cap, rival_price;
  std::vector<StrategicColumns> existing, candidate;
};

struct InvestmentColumn {
  int t = 0;
  int c = 0;
  int node = 0;  // long-term tree class at stage t (0 for a single-scenario model)
  int col = -1;
};

/// Single-level equivalent of the bilevel problem: an LP (maximized) plus
/// complementarity pairs. Dropping the pairs gives the LP relaxation.
struct MpccModel {
  LinearProgram lp;
  std::vector<VarInfo> vars;
  std::vector<ComplementarityPair> pairs;
  std::vector<ClearingBlock> clearings;
  std::vector<InvestmentColumn> investments;
  // Epigraph columns of the proximal penalty, [t][c] (empty when off).
  std::vector<std::vector<int>> proximal;

  int add_var(std::string name, VarRole role, double lo, double hi, double cost = 0.0) {
    vars.push_back({std::move(name), role});
    return lp.add_variable(lo, hi, cost);
  }

  void add_cost(int col, double c) { lp.objective[col] += c; }

  int num_vars() const { return lp.num_vars(); }
  int num_rows() const { return lp.num_rows(); }
  int num_pairs() const { return static_cast<int>(pairs.size()); }

  // Distance of a side from its bound in the model box (not in a node box).
  double side_value(const PairSide& s, const std::vector<double>& x) const {
    return s.side == BoundSide::Lower ? x[s.var] - lp.lower[s.var] : lp.upper[s.var] - x[s.var];
  }
  double side_range(const PairSide& s) const { return lp.upper[s.var] - lp.lower[s.var]; }

  double objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < num_vars(); ++j) v += lp.objective[j] * x[j];
    return v;
  }

  /// Largest normalized complementarity product (a/A)(b/B) at x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& p : pairs) {
      const double ra = side_range(p.a), rb = side_range(p.b);
      if (ra <= 0.0 || rb <= 0.0) continue;
      const double va = std::max(0.0, side_value(p.a, x)) / ra;
      const double vb = std::max(0.0, side_value(p.b, x)) / rb;
      worst = std::max(worst, va * vb);
    }
    return worst;
  }
};

struct ModelStats {
  int variables = 0;
  int constraints = 0;
  int complementarity_pairs = 0;
  int investment_variables = 0;
  int clearings = 0;
};

inline ModelStats model_stats(const MpccModel& m) {
  return {m.num_vars(), m.num_rows(), m.num_pairs(), static_cast<int>(m.investments.size()),
          static_cast<int>(m.clearings.size())};
}

}  // namespace stratinv
