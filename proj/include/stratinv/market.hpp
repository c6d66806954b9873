#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/simplex.hpp"

namespace stratinv {

struct DemandBid {
  std::string id;
  double quantity_mw = 0.0;  // P̄^D K^D
  double utility = 0.0;      // $/MWh
};

struct SupplyOffer {
  std::string id;
  double quantity_mw = 0.0;  // already scaled by capacity factor where relevant
  double price = 0.0;        // $/MWh
};

/// One lower-level clearing for a fixed (t, γ, h, k).
struct ClearingInput {
  std::vector<DemandBid> demands;
  std::vector<SupplyOffer> rivals;
  std::vector<SupplyOffer> existing;
  std::vector<SupplyOffer> candidates;

  void validate() const {
    auto check = [](double v, const std::string& what) {
      if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorKind::InvalidArgument, what + " must be finite and nonnegative");
    };
    for (const auto& d : demands) {
      check(d.quantity_mw, "demand " + d.id + " quantity");
      check(d.utility, "demand " + d.id + " utility");
    }
    for (const auto* group : {&rivals, &existing, &candidates})
      for (const auto& s : *group) {
        check(s.quantity_mw, "offer " + s.id + " quantity");
        check(s.price, "offer " + s.id + " price");
      }
  }
};

/// Dispatch and duals per block, aligned with the order of the input
/// vectors. Upper duals belong to the dispatch <= quantity bounds, lower
/// duals to dispatch >= 0.
struct MarketOutcome {
  std::vector<double> demand;
  std::vector<double> rival;
  std::vector<double> existing;
  std::vector<double> candidate;
  std::vector<double> demand_upper_dual;
  std::vector<double> rival_upper_dual;
  std::vector<double> existing_upper_dual;
  std::vector<double> candidate_upper_dual;
  std::vector<double> demand_lower_dual;
  std::vector<double> rival_lower_dual;
  std::vector<double> existing_lower_dual;
  std::vector<double> candidate_lower_dual;
  double price = 0.0;
  double welfare = 0.0;

  double volume() const { return std::accumulate(demand.begin(), demand.end(), 0.0); }
};

namespace detail {

// Positions of a group's entries when sorted by id (stable for equal ids).
template <class T>
std::vector<int> order_by_id(const std::vector<T>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a].id < v[b].id; });
  return idx;
}

inline void resize_outcome(MarketOutcome& o, const ClearingInput& in) {
  o.demand.assign(in.demands.size(), 0.0);
  o.rival.assign(in.rivals.size(), 0.0);
  o.existing.assign(in.existing.size(), 0.0);
  o.candidate.assign(in.candidates.size(), 0.0);
  o.demand_upper_dual.assign(in.demands.size(), 0.0);
  o.rival_upper_dual.assign(in.rivals.size(), 0.0);
  o.existing_upper_dual.assign(in.existing.size(), 0.0);
  o.candidate_upper_dual.assign(in.candidates.size(), 0.0);
  o.demand_lower_dual.assign(in.demands.size(), 0.0);
  o.rival_lower_dual.assign(in.rivals.size(), 0.0);
  o.existing_lower_dual.assign(in.existing.size(), 0.0);
  o.candidate_lower_dual.assign(in.candidates.size(), 0.0);
}

// Bound duals implied by a clearing price: stationarity reads
// b - λ - μ̄ + μ̲ = 0 for demands and -c + λ - μ̄ + μ̲ = 0 for supply.
inline void duals_from_price(MarketOutcome& o, const ClearingInput& in) {
  const double lam = o.price;
  for (std::size_t i = 0; i < in.demands.size(); ++i) {
    o.demand_upper_dual[i] = std::max(0.0, in.demands[i].utility - lam);
    o.demand_lower_dual[i] = std::max(0.0, lam - in.demands[i].utility);
  }
  auto supply = [lam](const std::vector<SupplyOffer>& s, std::vector<double>& up, std::vector<double>& lo) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      up[i] = std::max(0.0, lam - s[i].price);
      lo[i] = std::max(0.0, s[i].price - lam);
    }
  };
  supply(in.rivals, o.rival_upper_dual, o.rival_lower_dual);
  supply(in.existing, o.existing_upper_dual, o.existing_lower_dual);
  supply(in.candidates, o.candidate_upper_dual, o.candidate_lower_dual);
}

inline double welfare_of(const MarketOutcome& o, const ClearingInput& in) {
  double w = 0.0;
  for (std::size_t i = 0; i < in.demands.size(); ++i) w += in.demands[i].utility * o.demand[i];
  for (std::size_t i = 0; i < in.rivals.size(); ++i) w -= in.rivals[i].price * o.rival[i];
  for (std::size_t i = 0; i < in.existing.size(); ++i) w -= in.existing[i].price * o.existing[i];
  for (std::size_t i = 0; i < in.candidates.size(); ++i) w -= in.candidates[i].price * o.candidate[i];
  return w;
}

}  // namespace detail

/// Welfare-maximizing clearing LP: variables ordered demands, rivals,
/// existing, candidates (each sorted by id); one equality row
/// supply - demand = 0 whose dual is -λ.
inline LinearProgram build_clearing_lp(const ClearingInput& in) {
  in.validate();
  LinearProgram lp;
  SparseVector balance;
  for (int i : detail::order_by_id(in.demands)) {
    const auto& d = in.demands[i];
    balance.add(lp.add_variable(0.0, d.quantity_mw, d.utility), -1.0);
  }
  for (const auto* group : {&in.rivals, &in.existing, &in.candidates})
    for (int i : detail::order_by_id(*group)) {
      const auto& s = (*group)[i];
      balance.add(lp.add_variable(0.0, s.quantity_mw, -s.price), 1.0);
    }
  lp.add_row(std::move(balance), RowSense::Equal, 0.0);
  return lp;
}

/// Valid clearing prices for a given dispatch: every λ in [low, high]
/// together with the dispatch satisfies the clearing KKT conditions.
struct PriceInterval {
  double low = 0.0;
  double high = kInf;
};

inline PriceInterval price_interval(const ClearingInput& in, const MarketOutcome& o, double tol = 1e-9) {
  PriceInterval iv;
  for (std::size_t i = 0; i < in.demands.size(); ++i) {
    const auto& d = in.demands[i];
    if (d.quantity_mw <= 0.0) continue;
    if (o.demand[i] > tol * (1.0 + d.quantity_mw)) iv.high = std::min(iv.high, d.utility);
    if (o.demand[i] < d.quantity_mw - tol * (1.0 + d.quantity_mw)) iv.low = std::max(iv.low, d.utility);
  }
  auto supply = [&](const std::vector<SupplyOffer>& s, const std::vector<double>& x) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].quantity_mw <= 0.0) continue;
      if (x[i] > tol * (1.0 + s[i].quantity_mw)) iv.low = std::max(iv.low, s[i].price);
      if (x[i] < s[i].quantity_mw - tol * (1.0 + s[i].quantity_mw)) iv.high = std::min(iv.high, s[i].price);
    }
  };
  supply(in.rivals, o.rival);
  supply(in.existing, o.existing);
  supply(in.candidates, o.candidate);
  return iv;
}

inline MarketOutcome clear_market_lp(const ClearingInput& in, const SimplexOptions& opt = {}) {
  const LinearProgram lp = build_clearing_lp(in);
  const LpSolution sol = solve_lp(lp, opt);
  if (sol.status == LpStatus::IterLimit)
    throw Error(ErrorKind::SolverLimit, "market clearing LP hit the iteration limit");
  if (sol.status != LpStatus::Optimal)
    throw Error(ErrorKind::Internal, std::string("market clearing LP returned ") + to_string(sol.status));

  MarketOutcome o;
  detail::resize_outcome(o, in);
  int col = 0;
  for (int i : detail::order_by_id(in.demands)) o.demand[i] = sol.primal[col++];
  for (int i : detail::order_by_id(in.rivals)) o.rival[i] = sol.primal[col++];
  for (int i : detail::order_by_id(in.existing)) o.existing[i] = sol.primal[col++];
  for (int i : detail::order_by_id(in.candidates)) o.candidate[i] = sol.primal[col++];

  // Snap the dual into the valid interval to wash out roundoff.
  o.price = -sol.row_duals[0];
  const auto iv = price_interval(in, o);
  if (iv.low <= iv.high) o.price = std::clamp(o.price, iv.low, iv.high);
  detail::duals_from_price(o, in);
  o.welfare = sol.objective;
  return o;
}

/// Independent oracle: stack supply by ascending price and demand by
/// descending utility, trade while the marginal price does not exceed the
/// marginal utility. Equal-price blocks share their dispatch in proportion to
/// capacity. λ is the lowest valid clearing price of the resulting dispatch;
/// with no trade that is the highest utility, or 0 without demand.
inline MarketOutcome clear_market_merit_order(const ClearingInput& in) {
  in.validate();
  MarketOutcome o;
  detail::resize_outcome(o, in);

  struct Block {
    double price;
    double cap;
    int group;  // 0 demand, 1 rival, 2 existing, 3 candidate
    int index;
  };
  std::vector<Block> supply, demand;
  for (std::size_t i = 0; i < in.demands.size(); ++i)
    if (in.demands[i].quantity_mw > 0.0)
      demand.push_back({in.demands[i].utility, in.demands[i].quantity_mw, 0, static_cast<int>(i)});
  const std::vector<SupplyOffer>* groups[] = {&in.rivals, &in.existing, &in.candidates};
  for (int g = 0; g < 3; ++g)
    for (std::size_t i = 0; i < groups[g]->size(); ++i) {
      const auto& s = (*groups[g])[i];
      if (s.quantity_mw > 0.0) supply.push_back({s.price, s.quantity_mw, g + 1, static_cast<int>(i)});
    }
  auto key = [](const Block& a, const Block& b) {
    if (a.group != b.group) return a.group < b.group;
    return a.index < b.index;
  };
  std::stable_sort(supply.begin(), supply.end(), [&](const Block& a, const Block& b) {
    return a.price != b.price ? a.price < b.price : key(a, b);
  });
  std::stable_sort(demand.begin(), demand.end(), [&](const Block& a, const Block& b) {
    return a.price != b.price ? a.price > b.price : key(a, b);
  });

  // Collapse equal prices into tie groups.
  struct Tier {
    double price;
    double cap;
    double used = 0.0;
    std::vector<int> members;
  };
  auto tiers_of = [](const std::vector<Block>& blocks) {
    std::vector<Tier> tiers;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (tiers.empty() || tiers.back().price != blocks[i].price) tiers.push_back({blocks[i].price, 0.0, 0.0, {}});
      tiers.back().cap += blocks[i].cap;
      tiers.back().members.push_back(static_cast<int>(i));
    }
    return tiers;
  };
  auto stiers = tiers_of(supply);
  auto dtiers = tiers_of(demand);

  std::size_t si = 0, di = 0;
  while (si < stiers.size() && di < dtiers.size() && stiers[si].price <= dtiers[di].price) {
    const double q = std::min(stiers[si].cap - stiers[si].used, dtiers[di].cap - dtiers[di].used);
    stiers[si].used += q;
    dtiers[di].used += q;
    if (stiers[si].used >= stiers[si].cap) ++si;
    if (dtiers[di].used >= dtiers[di].cap) ++di;
  }

  auto assign = [&](const std::vector<Tier>& tiers, const std::vector<Block>& blocks) {
    for (const auto& t : tiers) {
      if (t.used <= 0.0) continue;
      const bool full = t.used >= t.cap;
      for (int m : t.members) {
        const Block& b = blocks[m];
        const double x = full ? b.cap : t.used * (b.cap / t.cap);
        switch (b.group) {
          case 0: o.demand[b.index] = x; break;
          case 1: o.rival[b.index] = x; break;
          case 2: o.existing[b.index] = x; break;
          default: o.candidate[b.index] = x; break;
        }
      }
    }
  };
  assign(stiers, supply);
  assign(dtiers, demand);

  o.price = price_interval(in, o, 0.0).low;
  detail::duals_from_price(o, in);
  o.welfare = detail::welfare_of(o, in);
  return o;
}

}  // namespace stratinv
