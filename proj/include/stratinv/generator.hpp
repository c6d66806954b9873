#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/model.hpp"

namespace stratinv {

struct GeneratorParams {
  int stages = 2;
  int long_term = 2;
  int short_term = 2;
  int conditions = 2;
  int candidates = 2;
  int rivals = 3;
  int existing = 1;
  int demands = 1;
  double hours_per_stage = 8760.0;
  std::uint64_t seed = 1;
};

namespace detail {

inline void require_count(int v, int lo, int hi, const char* what) {
  if (v < lo || v > hi)
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

// Two-stage tree: one root, then one node per long-term scenario.
inline LongTermTree two_level_tree(int stages, int long_term) {
  LongTermTree tree;
  for (int t = 0; t < stages; ++t) {
    std::vector<std::vector<int>> part;
    if (t == 0) {
      part.emplace_back();
      for (int g = 0; g < long_term; ++g) part[0].push_back(g);
    } else {
      for (int g = 0; g < long_term; ++g) part.push_back({g});
    }
    tree.stage_partitions.push_back(part);
  }
  return tree;
}

inline std::string numbered(const char* prefix, int i) { return prefix + std::to_string(i + 1); }

inline double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace detail

/// Instance shaped like a single-area system with 1500 MW of conventional
/// capacity (5 rival units, 2 strategic), one 1050 MW demand, two stages,
/// three demand-growth and three rival-price scenarios, five wind
/// conditions, and CCGT/coal/wind candidates.
inline Instance generate_sec4() {
  Instance in;
  in.sos_factor = 1.0;
  const double hours = 3.0 * 8760.0;
  in.stages = {{"t1", 1.0, 0.24, 1e12, 3.0}, {"t2", 1.0 / std::pow(1.05, 3), 0.24, 1e12, 3.0}};
  in.demands = {{"d1"}};
  in.existing_units = {{"e1", 200.0, Technology::Conv}, {"e2", 150.0, Technology::Conv}};
  in.candidate_units = {{"ccgt", 200.0, Technology::Conv}, {"coal", 200.0, Technology::Conv},
                        {"wind", 200.0, Technology::WP}};
  const std::vector<double> rival_cap = {300.0, 250.0, 250.0, 200.0, 150.0};
  const std::vector<double> rival_price = {15.0, 20.0, 25.0, 30.0, 40.0};
  for (int r = 0; r < 5; ++r) in.rival_units.push_back({detail::numbered("r", r), Technology::Conv});

  const std::vector<double> wind_cf = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (int h = 0; h < 5; ++h) {
    OperatingCondition oc;
    oc.id = detail::numbered("h", h);
    oc.weight_hours = hours / 5.0;
    oc.existing_cf = {1.0, 1.0};
    oc.candidate_cf = {1.0, 1.0, wind_cf[h]};
    oc.rival_cf.assign(5, 1.0);
    oc.demand_factor = {1.0};
    in.operating_conditions.push_back(oc);
  }

  const std::vector<double> growth = {1.2, 1.0, 0.8};
  const std::vector<double> price_scale = {1.1, 1.0, 0.9};
  for (int g = 0; g < 3; ++g) {
    LongTermScenario s;
    s.id = detail::numbered("g", g);
    s.probability = 1.0 / 3.0;
    for (int t = 0; t < 2; ++t) {
      s.investment_cost.push_back({0.25e6, 0.3e6, 1.2e6});
      s.existing_marginal_cost.push_back({18.0, 28.0});
      s.candidate_marginal_cost.push_back({45.0, 22.0, 0.0});
      s.peak_load.push_back({t == 0 ? 1050.0 : 1050.0 * growth[g]});
      s.rival_offer_quantity.push_back(Table3<double>(5, Table2<double>(3, rival_cap)));
    }
    in.long_term_scenarios.push_back(s);
  }
  for (int k = 0; k < 3; ++k) {
    ShortTermScenario s;
    s.id = detail::numbered("k", k);
    s.probability = 1.0 / 3.0;
    for (int t = 0; t < 2; ++t) {
      Table2<double> prices;
      for (int g = 0; g < 3; ++g) {
        std::vector<double> p;
        for (double c : rival_price) p.push_back(c * price_scale[k]);
        prices.push_back(p);
      }
      s.rival_offer_price.push_back(prices);
      s.demand_utility.push_back({60.0});
    }
    in.short_term_scenarios.push_back(s);
  }
  in.tree = detail::two_level_tree(2, 3);
  return in;
}

/// The sec4-shaped system collapsed to one long-term and one short-term
/// scenario (the middle ones).
inline Instance generate_single() {
  Instance full = generate_sec4();
  Instance in = full;
  in.long_term_scenarios = {full.long_term_scenarios[1]};
  in.long_term_scenarios[0].probability = 1.0;
  in.short_term_scenarios = {full.short_term_scenarios[1]};
  in.short_term_scenarios[0].probability = 1.0;
  for (auto& s : in.short_term_scenarios)
    for (auto& per_t : s.rival_offer_price) per_t = {per_t[1]};
  for (auto& s : in.long_term_scenarios)
    for (auto& per_t : s.rival_offer_quantity)
      for (auto& per_h : per_t) per_h = {per_h[1]};
  in.tree = detail::two_level_tree(in.num_stages(), 1);
  return in;
}

/// Small random instance for oracle comparisons. Values are rounded so the
/// serialized form is short and stable.
inline Instance generate_random(const GeneratorParams& p) {
  detail::require_count(p.stages, 1, 4, "stages");
  detail::require_count(p.long_term, 1, 8, "long_term");
  detail::require_count(p.short_term, 1, 8, "short_term");
  detail::require_count(p.conditions, 1, 8, "conditions");
  detail::require_count(p.candidates, 0, 8, "candidates");
  detail::require_count(p.rivals, 1, 8, "rivals");
  detail::require_count(p.existing, 0, 8, "existing");
  detail::require_count(p.demands, 1, 4, "demands");

  std::mt19937_64 rng(p.seed);
  auto uni = [&](double lo, double hi, double step) {
    return detail::round_to(std::uniform_real_distribution<double>(lo, hi)(rng), step);
  };

  Instance in;
  in.sos_factor = uni(0.0, 0.5, 0.05);
  const double stage_hours = p.hours_per_stage;
  for (int t = 0; t < p.stages; ++t)
    in.stages.push_back({detail::numbered("t", t), t == 0 ? 1.0 : detail::round_to(std::pow(0.9, t), 1e-4), 0.1,
                         1e12, 1.0});
  for (int d = 0; d < p.demands; ++d) in.demands.push_back({detail::numbered("d", d)});
  for (int e = 0; e < p.existing; ++e) in.existing_units.push_back({detail::numbered("e", e), uni(20, 80, 1), Technology::Conv});
  for (int c = 0; c < p.candidates; ++c)
    in.candidate_units.push_back({detail::numbered("c", c), uni(20, 60, 1), c == p.candidates - 1 && c > 0 ? Technology::WP : Technology::Conv});
  for (int r = 0; r < p.rivals; ++r) in.rival_units.push_back({detail::numbered("r", r), Technology::Conv});

  for (int h = 0; h < p.conditions; ++h) {
    OperatingCondition oc;
    oc.id = detail::numbered("h", h);
    oc.weight_hours = detail::round_to(stage_hours / p.conditions, 1.0);
    oc.existing_cf.assign(p.existing, 1.0);
    for (int c = 0; c < p.candidates; ++c) oc.candidate_cf.push_back(uni(0.2, 1.0, 0.05));
    oc.rival_cf.assign(p.rivals, 1.0);
    for (int d = 0; d < p.demands; ++d) oc.demand_factor.push_back(uni(0.6, 1.0, 0.05));
    in.operating_conditions.push_back(oc);
  }

  std::vector<double> inv_cost, cand_mc, exist_mc, base_load, base_rival_q, base_rival_c;
  for (int c = 0; c < p.candidates; ++c) {
    inv_cost.push_back(uni(1.0e5, 4.0e5, 1e3));
    cand_mc.push_back(in.candidate_units[c].technology == Technology::WP ? 0.0 : uni(5, 30, 0.5));
  }
  for (int e = 0; e < p.existing; ++e) exist_mc.push_back(uni(5, 30, 0.5));
  for (int d = 0; d < p.demands; ++d) base_load.push_back(uni(80, 200, 1));
  for (int r = 0; r < p.rivals; ++r) {
    base_rival_q.push_back(uni(20, 80, 1));
    base_rival_c.push_back(uni(10, 45, 0.5));
  }

  for (int g = 0; g < p.long_term; ++g) {
    LongTermScenario s;
    s.id = detail::numbered("g", g);
    s.probability = 1.0 / p.long_term;
    const double growth = uni(0.8, 1.2, 0.05);
    for (int t = 0; t < p.stages; ++t) {
      s.investment_cost.push_back(inv_cost);
      s.existing_marginal_cost.push_back(exist_mc);
      s.candidate_marginal_cost.push_back(cand_mc);
      std::vector<double> load;
      for (double l : base_load) load.push_back(detail::round_to(t == 0 ? l : l * growth, 0.1));
      s.peak_load.push_back(load);
      Table3<double> q(p.conditions, Table2<double>(p.short_term, base_rival_q));
      s.rival_offer_quantity.push_back(q);
    }
    in.long_term_scenarios.push_back(s);
  }
  for (int k = 0; k < p.short_term; ++k) {
    ShortTermScenario s;
    s.id = detail::numbered("k", k);
    s.probability = 1.0 / p.short_term;
    const double scale = uni(0.85, 1.15, 0.05);
    for (int t = 0; t < p.stages; ++t) {
      Table2<double> prices(p.long_term);
      for (auto& row : prices)
        for (double c : base_rival_c) row.push_back(detail::round_to(c * scale, 0.01));
      s.rival_offer_price.push_back(prices);
      std::vector<double> util;
      for (int d = 0; d < p.demands; ++d) util.push_back(uni(50, 70, 1));
      s.demand_utility.push_back(util);
    }
    in.short_term_scenarios.push_back(s);
  }
  in.tree = detail::two_level_tree(p.stages, p.long_term);
  return in;
}

}  // namespace stratinv
