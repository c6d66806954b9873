#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/market.hpp"
#include "stratinv/model.hpp"
#include "stratinv/mpcc.hpp"

// Builders for the single-level equivalent of the bilevel investment problem.
//
// Each lower-level clearing (t, γ, h, k) is replaced by its KKT system:
//   primal feasibility   balance, 0 <= P <= cap, P̄ - P - s = 0 for strategic units
//   stationarity         demand:    b - λ - μ̄ + μ̲ = 0
//                        rival:    -c + λ - μ̄ + μ̲ = 0
//                        strategic: -β + λ - κ̄ + κ̲ = 0
//   complementarity      P ⟂ μ̲, (cap - P) ⟂ μ̄, P ⟂ κ̲, s ⟂ κ̄
// The bilinear strategic revenue λ Σ P^{E,C} is replaced by
//   Σ b P^D - Σ c^R P^R - Σ μ̄^D cap^D - Σ μ̄^R cap^R,
// which equals it at every KKT point (docs/derivation.md).
//
// All variables get finite boxes. λ is capped by a merit-order ceiling and
// dual variables by the ranges stationarity allows inside that price range;
// neither cap removes a KKT point with nonzero trade (docs/derivation.md).

namespace stratinv {

struct ReformulationOptions {
  // Upper bound on offer prices β; <= 0 selects 2 x the largest utility.
  double price_cap = 0.0;
  // Add a/A + b/B <= 1 for every pair with finite ranges A, B.
  bool hull_cuts = true;
  // Add residual-demand and McCormick bounds on the linearized revenue.
  bool revenue_cuts = true;
};

inline double default_price_cap(const Instance& in) {
  double mx = 0.0;
  for (const auto& s : in.short_term_scenarios)
    for (const auto& row : s.demand_utility)
      for (double b : row) mx = std::max(mx, b);
  return std::max(1.0, 2.0 * mx);
}

/// Highest price any clearing with nonzero trade can support: the largest
/// utility, lowered to the price of the first rival block (ascending price)
/// whose cumulative capacity strictly exceeds total demand.
inline double clearing_price_ceiling(const std::vector<double>& demand_cap, const std::vector<double>& utility,
                                     const std::vector<double>& rival_cap, const std::vector<double>& rival_price) {
  double ceiling = 0.0, total_demand = 0.0;
  for (std::size_t d = 0; d < demand_cap.size(); ++d)
    if (demand_cap[d] > 0.0) {
      ceiling = std::max(ceiling, utility[d]);
      total_demand += demand_cap[d];
    }
  std::vector<std::size_t> order(rival_cap.size());
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rival_price[a] < rival_price[b]; });
  double cum = 0.0;
  for (auto r : order) {
    cum += rival_cap[r];
    if (cum > total_demand) {
      ceiling = std::min(ceiling, rival_price[r]);
      break;
    }
  }
  return ceiling;
}

inline SparseVector revenue_linearization_terms(const ClearingBlock& b);

namespace detail {

inline std::string tag(const Instance& in, int t, int g, int k, int h) {
  return "[" + in.stages[t].id + "," + in.long_term_scenarios[g].id + "," + in.short_term_scenarios[k].id + "," +
         in.operating_conditions[h].id + "]";
}

inline void add_hull_cut(MpccModel& m, const ComplementarityPair& p) {
  const double ra = m.side_range(p.a), rb = m.side_range(p.b);
  if (!(ra > 0.0) || !(rb > 0.0) || !std::isfinite(ra) || !std::isfinite(rb)) return;
  SparseVector row;
  double rhs = 1.0;
  for (const auto* s : {&p.a, &p.b}) {
    const double r = m.side_range(*s);
    if (s->side == BoundSide::Lower) {
      row.add(s->var, 1.0 / r);
      rhs += m.lp.lower[s->var] / r;
    } else {
      row.add(s->var, -1.0 / r);
      rhs -= m.lp.upper[s->var] / r;
    }
  }
  m.lp.add_row(std::move(row), RowSense::LessEqual, rhs);
}

inline void add_pair(MpccModel& m, PairSide a, PairSide b, bool hull) {
  m.pairs.push_back({a, b});
  if (hull) add_hull_cut(m, m.pairs.back());
}

// Highest clearing price compatible with strategic dispatch S: the largest
// step price p with (demand at or above p) - (rival supply below p) >= S.
// Returns -1 when no price supports S.
inline double max_price_for_dispatch(const ClearingBlock& b, const std::vector<double>& steps, double S) {
  double best = -1.0;
  for (double p : steps) {
    double room = 0.0;
    for (std::size_t d = 0; d < b.demand_cap.size(); ++d)
      if (b.demand_utility[d] >= p) room += b.demand_cap[d];
    for (std::size_t r = 0; r < b.rival_cap.size(); ++r)
      if (b.rival_price[r] < p) room -= b.rival_cap[r];
    if (room >= S - 1e-9 * (1.0 + S)) best = std::max(best, p);
  }
  return best;
}

// Valid inequalities on L = λ S, where L is the linearized revenue and S the
// total strategic dispatch of one clearing (docs/derivation.md). At a KKT
// point λ <= λmax(S), so L lies under the concave envelope of λmax(S) S over
// [0, S̄]; one row per envelope segment. McCormick rows tie L to λ.
inline void add_revenue_cuts(MpccModel& m, const ClearingBlock& b, const SparseVector& revenue, double lam_max) {
  SparseVector strat;
  double s_max = 0.0;
  for (const auto* group : {&b.existing, &b.candidate})
    for (const auto& s : *group) {
      strat.add(s.dispatch, 1.0);
      s_max += m.lp.upper[s.dispatch];
    }
  if (strat.size() == 0 || s_max <= 0.0) return;
  auto combine = [](const SparseVector& l, double lf, const SparseVector& r, double rf) {
    SparseVector out;
    for (std::size_t i = 0; i < l.size(); ++i) out.add(l.index[i], lf * l.value[i]);
    for (std::size_t i = 0; i < r.size(); ++i) out.add(r.index[i], rf * r.value[i]);
    return out;
  };

  std::vector<double> steps = {0.0, lam_max};
  for (double c : b.rival_price)
    if (c < lam_max) steps.push_back(c);
  for (double u : b.demand_utility)
    if (u < lam_max) steps.push_back(u);
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  // λmax(S) S is linear through the origin between consecutive dispatch
  // breakpoints and drops after each, so its envelope is spanned by the
  // right ends of the pieces.
  std::vector<double> knots = {0.0, s_max};
  for (double p : steps) {
    double room = 0.0;
    for (std::size_t d = 0; d < b.demand_cap.size(); ++d)
      if (b.demand_utility[d] >= p) room += b.demand_cap[d];
    for (std::size_t r = 0; r < b.rival_cap.size(); ++r)
      if (b.rival_price[r] < p) room -= b.rival_cap[r];
    if (room > 0.0 && room < s_max) knots.push_back(room);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<std::pair<double, double>> pts;
  for (double S : knots) {
    const double p = max_price_for_dispatch(b, steps, S);
    pts.push_back({S, p < 0.0 ? 0.0 : p * S});
  }
  std::vector<std::pair<double, double>> hull;
  for (const auto& q : pts) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross = (a.first - o.first) * (q.second - o.second) - (a.second - o.second) * (q.first - o.first);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(q);
  }
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const double slope = (hull[i + 1].second - hull[i].second) / (hull[i + 1].first - hull[i].first);
    const double icpt = hull[i].second - slope * hull[i].first;
    m.lp.add_row(combine(revenue, 1.0, strat, -slope), RowSense::LessEqual, icpt);
  }

  SparseVector price;
  price.add(b.price, 1.0);
  m.lp.add_row(combine(revenue, 1.0, price, -s_max), RowSense::LessEqual, 0.0);
  SparseVector lower = combine(strat, lam_max, price, s_max);
  m.lp.add_row(combine(lower, 1.0, revenue, -1.0), RowSense::LessEqual, lam_max * s_max);
}

// Appends the KKT blocks of every (t, h) clearing of scenario (γ, k).
// x[t][c] are the investment columns seen by this scenario.
inline void append_clearings(MpccModel& m, const Instance& in, int g, int k, const std::vector<std::vector<int>>& x,
                             double probability, double price_cap, const ReformulationOptions& opt) {
  const bool hull = opt.hull_cuts;
  const auto& lt = in.long_term_scenarios[g];
  const auto& st = in.short_term_scenarios[k];
  const int D = in.num_demands(), R = in.num_rivals(), E = in.num_existing(), C = in.num_candidates();
  for (int t = 0; t < in.num_stages(); ++t) {
    for (int h = 0; h < in.num_conditions(); ++h) {
      const auto& oc = in.operating_conditions[h];
      const std::string sfx = tag(in, t, g, k, h);
      ClearingBlock b;
      b.t = t;
      b.gamma = g;
      b.k = k;
      b.h = h;
      b.weight = probability * in.stages[t].discount_factor * oc.weight_hours;
      const double w = b.weight;

      for (int d = 0; d < D; ++d) {
        b.demand_cap.push_back(lt.peak_load[t][d] * oc.demand_factor[d]);
        b.demand_utility.push_back(st.demand_utility[t][d]);
      }
      std::vector<double> rival_nominal(R);
      for (int r = 0; r < R; ++r) {
        rival_nominal[r] = lt.rival_offer_quantity[t][h][k][r];
        b.rival_cap.push_back(rival_nominal[r] * in.rival_cf(h, r));
        b.rival_price.push_back(st.rival_offer_price[t][g][r]);
      }
      const double lam_max = clearing_price_ceiling(b.demand_cap, b.demand_utility, b.rival_cap, b.rival_price);

      b.price = m.add_var("lambda" + sfx, VarRole::ClearingPrice, 0.0, lam_max);
      SparseVector balance;

      for (int d = 0; d < D; ++d) {
        const std::string id = in.demands[d].id + sfx;
        const double cap = b.demand_cap[d], u = b.demand_utility[d];
        const int p = m.add_var("P_D_" + id, VarRole::Dispatch, 0.0, cap, w * u);
        const int up = m.add_var("mu_up_D_" + id, VarRole::BoundDual, 0.0, u, -w * cap);
        const int lo = m.add_var("mu_lo_D_" + id, VarRole::BoundDual, 0.0, std::max(0.0, lam_max - u));
        SparseVector st_row;
        st_row.add(b.price, 1.0);
        st_row.add(up, 1.0);
        st_row.add(lo, -1.0);
        m.lp.add_row(std::move(st_row), RowSense::Equal, u);
        balance.add(p, -1.0);
        add_pair(m, {p, BoundSide::Lower}, {lo, BoundSide::Lower}, hull);
        add_pair(m, {p, BoundSide::Upper}, {up, BoundSide::Lower}, hull);
        b.demand.push_back(p);
        b.demand_upper_dual.push_back(up);
        b.demand_lower_dual.push_back(lo);
      }

      for (int r = 0; r < R; ++r) {
        const std::string id = in.rival_units[r].id + sfx;
        const double cap = b.rival_cap[r], c = b.rival_price[r];
        const int p = m.add_var("P_R_" + id, VarRole::Dispatch, 0.0, cap, -w * c);
        const int up = m.add_var("mu_up_R_" + id, VarRole::BoundDual, 0.0, std::max(0.0, lam_max - c), -w * cap);
        const int lo = m.add_var("mu_lo_R_" + id, VarRole::BoundDual, 0.0, c);
        SparseVector st_row;
        st_row.add(b.price, 1.0);
        st_row.add(up, -1.0);
        st_row.add(lo, 1.0);
        m.lp.add_row(std::move(st_row), RowSense::Equal, c);
        balance.add(p, 1.0);
        add_pair(m, {p, BoundSide::Lower}, {lo, BoundSide::Lower}, hull);
        add_pair(m, {p, BoundSide::Upper}, {up, BoundSide::Lower}, hull);
        b.rival.push_back(p);
        b.rival_upper_dual.push_back(up);
        b.rival_lower_dual.push_back(lo);
      }

      SparseVector sos;
      auto strategic = [&](const std::string& id, double qmax, double mc) {
        StrategicColumns s;
        s.marginal_cost = mc;
        s.quantity = m.add_var("Pbar_" + id, VarRole::OfferQuantity, 0.0, qmax);
        s.price = m.add_var("beta_" + id, VarRole::OfferPrice, 0.0, price_cap);
        s.dispatch = m.add_var("P_" + id, VarRole::Dispatch, 0.0, qmax, -w * mc);
        s.slack = m.add_var("s_" + id, VarRole::OfferSlack, 0.0, qmax);
        s.upper_dual = m.add_var("kappa_up_" + id, VarRole::BoundDual, 0.0, lam_max);
        s.lower_dual = m.add_var("kappa_lo_" + id, VarRole::BoundDual, 0.0, price_cap);
        SparseVector link;
        link.add(s.quantity, 1.0);
        link.add(s.dispatch, -1.0);
        link.add(s.slack, -1.0);
        m.lp.add_row(std::move(link), RowSense::Equal, 0.0);
        SparseVector st_row;
        st_row.add(b.price, 1.0);
        st_row.add(s.price, -1.0);
        st_row.add(s.upper_dual, -1.0);
        st_row.add(s.lower_dual, 1.0);
        m.lp.add_row(std::move(st_row), RowSense::Equal, 0.0);
        balance.add(s.dispatch, 1.0);
        sos.add(s.quantity, 1.0);
        add_pair(m, {s.dispatch, BoundSide::Lower}, {s.lower_dual, BoundSide::Lower}, hull);
        add_pair(m, {s.slack, BoundSide::Lower}, {s.upper_dual, BoundSide::Lower}, hull);
        return s;
      };
      for (int e = 0; e < E; ++e) {
        const double qmax = in.existing_units[e].capacity_mw * in.existing_cf(h, e);
        b.existing.push_back(strategic("E_" + in.existing_units[e].id + sfx, qmax, lt.existing_marginal_cost[t][e]));
      }
      for (int c = 0; c < C; ++c) {
        // Offers are limited by capacity installed up to and including stage t.
        const double cf = in.candidate_cf(h, c);
        const double qmax = cf * in.candidate_units[c].max_capacity_mw * (t + 1);
        auto s = strategic("C_" + in.candidate_units[c].id + sfx, qmax, lt.candidate_marginal_cost[t][c]);
        SparseVector lim;
        lim.add(s.quantity, 1.0);
        for (int tau = 0; tau <= t; ++tau)
          if (cf != 0.0) lim.add(x[tau][c], -cf);
        m.lp.add_row(std::move(lim), RowSense::LessEqual, 0.0);
        b.candidate.push_back(s);
      }
      m.lp.add_row(std::move(balance), RowSense::Equal, 0.0);

      double required = 0.0;
      for (int d = 0; d < D; ++d) required += in.sos_factor * lt.peak_load[t][d] * oc.demand_factor[d];
      for (int r = 0; r < R; ++r) required -= rival_nominal[r];
      m.lp.add_row(std::move(sos), RowSense::GreaterEqual, required);

      if (opt.revenue_cuts) add_revenue_cuts(m, b, revenue_linearization_terms(b), lam_max);
      m.clearings.push_back(std::move(b));
    }
  }
}

// Budget rows Σ_c c^inv X_{tc} <= Ī_t and the amortized investment cost
// DF_t a_t Σ_c c^inv Σ_{τ<=t} X_{τc}, weighted by `probability`.
inline void append_investment_terms(MpccModel& m, const Instance& in, int g, const std::vector<std::vector<int>>& x,
                                    double probability) {
  const auto& lt = in.long_term_scenarios[g];
  for (int t = 0; t < in.num_stages(); ++t) {
    SparseVector budget;
    for (int c = 0; c < in.num_candidates(); ++c) {
      budget.add(x[t][c], lt.investment_cost[t][c]);
      const double per_mw = probability * in.stages[t].discount_factor * in.stages[t].amortization_rate *
                            lt.investment_cost[t][c];
      for (int tau = 0; tau <= t; ++tau) m.add_cost(x[tau][c], -per_mw);
    }
    if (in.num_candidates() > 0) m.lp.add_row(std::move(budget), RowSense::LessEqual, in.stages[t].budget_usd);
  }
}

inline std::vector<std::vector<int>> add_scenario_investments(MpccModel& m, const Instance& in) {
  std::vector<std::vector<int>> x(in.num_stages(), std::vector<int>(in.num_candidates(), -1));
  for (int t = 0; t < in.num_stages(); ++t)
    for (int c = 0; c < in.num_candidates(); ++c) {
      x[t][c] = m.add_var("X_" + in.candidate_units[c].id + "[" + in.stages[t].id + "]", VarRole::Investment, 0.0,
                          in.candidate_units[c].max_capacity_mw);
      m.investments.push_back({t, c, 0, x[t][c]});
    }
  return x;
}

inline double resolve_price_cap(const Instance& in, const ReformulationOptions& opt) {
  return opt.price_cap > 0.0 ? opt.price_cap : default_price_cap(in);
}

}  // namespace detail

/// Scenario (γ, k) single-level model, all probability weights excluded.
inline MpccModel build_scenario_mpcc(const Instance& in, int g, int k, const ReformulationOptions& opt = {}) {
  if (g < 0 || g >= in.num_long_term() || k < 0 || k >= in.num_short_term())
    throw Error(ErrorKind::InvalidArgument, "scenario index out of range");
  MpccModel m;
  const auto x = detail::add_scenario_investments(m, in);
  detail::append_investment_terms(m, in, g, x, 1.0);
  detail::append_clearings(m, in, g, k, x, 1.0, detail::resolve_price_cap(in, opt), opt);
  return m;
}

/// Extensive form: investment columns per (t, long-term class), shared by
/// all (γ, k) in the class; clearings weighted by π^LT π^MS and investment
/// cost by π^LT.
inline MpccModel build_extensive_form(const Instance& in, const ReformulationOptions& opt = {}) {
  MpccModel m;
  const int T = in.num_stages(), C = in.num_candidates();
  std::vector<std::vector<std::vector<int>>> node_cols(T);  // [t][class][c]
  for (int t = 0; t < T; ++t) {
    const auto& part = in.tree.stage_partitions[t];
    node_cols[t].resize(part.size());
    for (std::size_t cls = 0; cls < part.size(); ++cls)
      for (int c = 0; c < C; ++c) {
        const int col = m.add_var("X_" + in.candidate_units[c].id + "[" + in.stages[t].id + ",n" +
                                      std::to_string(cls) + "]",
                                  VarRole::Investment, 0.0, in.candidate_units[c].max_capacity_mw);
        node_cols[t][cls].push_back(col);
        m.investments.push_back({t, c, static_cast<int>(cls), col});
      }
  }
  const double cap = detail::resolve_price_cap(in, opt);
  for (int g = 0; g < in.num_long_term(); ++g) {
    std::vector<std::vector<int>> x(T);
    for (int t = 0; t < T; ++t) x[t] = node_cols[t][in.tree.class_of(t, g)];
    const double pg = in.long_term_scenarios[g].probability;
    detail::append_investment_terms(m, in, g, x, pg);
    for (int k = 0; k < in.num_short_term(); ++k)
      detail::append_clearings(m, in, g, k, x, pg * in.short_term_scenarios[k].probability, cap, opt);
  }
  return m;
}

/// Per-(γ, k) decomposition subproblem: scenario objective minus μᵀX minus a
/// tangent-cut lower envelope of (ρ/2)||X - anchor||², both on investment
/// columns only. mu and anchor are indexed [t][c]. Tangents are cut at
/// pwl_segments+1 uniform breakpoints over [0, X̄], at the anchor, and at
/// anchor ± anchor_halfwidth when that is positive.
inline MpccModel build_admm_subproblem(const Instance& in, int g, int k, const std::vector<std::vector<double>>& mu,
                                       const std::vector<std::vector<double>>& anchor, double rho, int pwl_segments,
                                       const ReformulationOptions& opt = {}, double anchor_halfwidth = 0.0) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidArgument, "rho must be finite and >= 0");
  if (pwl_segments < 1) throw Error(ErrorKind::InvalidArgument, "pwl_segments must be >= 1");
  if (!(anchor_halfwidth >= 0.0)) throw Error(ErrorKind::InvalidArgument, "anchor_halfwidth must be >= 0");
  const int T = in.num_stages(), C = in.num_candidates();
  auto dims_ok = [&](const std::vector<std::vector<double>>& v) {
    if (static_cast<int>(v.size()) != T) return false;
    for (const auto& row : v)
      if (static_cast<int>(row.size()) != C) return false;
    return true;
  };
  if (!dims_ok(mu) || !dims_ok(anchor)) throw Error(ErrorKind::InvalidArgument, "mu/anchor must be [stages][candidates]");

  MpccModel m = build_scenario_mpcc(in, g, k, opt);
  for (const auto& inv : m.investments) m.add_cost(inv.col, -mu[inv.t][inv.c]);
  if (rho == 0.0) return m;

  m.proximal.assign(T, std::vector<int>(C, -1));
  for (const auto& inv : m.investments) {
    const double xmax = in.candidate_units[inv.c].max_capacity_mw;
    if (xmax <= 0.0) continue;
    const double a = anchor[inv.t][inv.c];
    const double far = std::max(std::abs(a), std::abs(xmax - a));
    const int z = m.add_var("z_" + in.candidate_units[inv.c].id + "[" + in.stages[inv.t].id + "]",
                            VarRole::EpigraphAux, 0.0, 0.5 * rho * far * far, -1.0);
    m.proximal[inv.t][inv.c] = z;
    // Uniform breakpoints plus a, a ± anchor_halfwidth. Tangents leave a
    // zero-penalty zone around a as wide as the spacing of the breakpoints next
    // to it, and X is free to drift anywhere inside that zone.
    std::vector<double> points;
    for (int i = 0; i <= pwl_segments; ++i) points.push_back(xmax * i / pwl_segments);
    auto on_grid = [&](double v) {
      const double pos = v / xmax * pwl_segments;
      return std::abs(pos - std::round(pos)) <= 1e-9;
    };
    std::vector<double> extra = {a};
    if (anchor_halfwidth > 0.0) extra.insert(extra.end(), {a - anchor_halfwidth, a + anchor_halfwidth});
    for (double v : extra)
      if (v > 0.0 && v < xmax && !on_grid(v)) points.push_back(v);
    for (double xi : points) {
      const double slope = rho * (xi - a);
      // z >= (ρ/2)(xi - a)² + slope (X - xi)
      SparseVector cut;
      cut.add(z, 1.0);
      if (slope != 0.0) cut.add(inv.col, -slope);
      m.lp.add_row(std::move(cut), RowSense::GreaterEqual, 0.5 * rho * (xi - a) * (xi - a) - slope * xi);
    }
  }
  return m;
}

/// Scenario model with investments fixed; x is indexed [t][c]. Throws when x
/// violates the capacity limits or a stage budget.
inline MpccModel build_fixed_investment_problem(const Instance& in, int g, int k,
                                                const std::vector<std::vector<double>>& x,
                                                const ReformulationOptions& opt = {}) {
  const int T = in.num_stages(), C = in.num_candidates();
  if (static_cast<int>(x.size()) != T) throw Error(ErrorKind::InvalidArgument, "x must be [stages][candidates]");
  const auto& lt = in.long_term_scenarios.at(g);
  for (int t = 0; t < T; ++t) {
    if (static_cast<int>(x[t].size()) != C) throw Error(ErrorKind::InvalidArgument, "x must be [stages][candidates]");
    double spend = 0.0;
    for (int c = 0; c < C; ++c) {
      const double xmax = in.candidate_units[c].max_capacity_mw;
      if (!(x[t][c] >= -1e-9 * (1.0 + xmax) && x[t][c] <= xmax + 1e-9 * (1.0 + xmax)))
        throw Error(ErrorKind::InvalidArgument, "investment in " + in.candidate_units[c].id + " at stage " +
                                                    in.stages[t].id + " is outside [0, max capacity]");
      spend += lt.investment_cost[t][c] * x[t][c];
    }
    if (spend > in.stages[t].budget_usd + 1e-9 * (1.0 + in.stages[t].budget_usd))
      throw Error(ErrorKind::InvalidArgument, "investment exceeds the budget of stage " + in.stages[t].id);
  }
  MpccModel m = build_scenario_mpcc(in, g, k, opt);
  for (const auto& inv : m.investments) {
    const double v = std::clamp(x[inv.t][inv.c], 0.0, in.candidate_units[inv.c].max_capacity_mw);
    m.lp.lower[inv.col] = v;
    m.lp.upper[inv.col] = v;
  }
  return m;
}

/// Linear substitute for λ Σ (P^E + P^C) of one clearing (unweighted).
inline SparseVector revenue_linearization_terms(const ClearingBlock& b) {
  SparseVector e;
  for (std::size_t d = 0; d < b.demand.size(); ++d) {
    e.add(b.demand[d], b.demand_utility[d]);
    e.add(b.demand_upper_dual[d], -b.demand_cap[d]);
  }
  for (std::size_t r = 0; r < b.rival.size(); ++r) {
    e.add(b.rival[r], -b.rival_price[r]);
    e.add(b.rival_upper_dual[r], -b.rival_cap[r]);
  }
  return e;
}

inline double evaluate(const SparseVector& e, const std::vector<double>& x) {
  double v = 0.0;
  for (std::size_t p = 0; p < e.size(); ++p) v += e.value[p] * x[e.index[p]];
  return v;
}

/// λ Σ (P^E + P^C) computed from the solution values directly.
inline double strategic_revenue(const ClearingBlock& b, const std::vector<double>& x) {
  double q = 0.0;
  for (const auto* group : {&b.existing, &b.candidate})
    for (const auto& s : *group) q += x[s.dispatch];
  return x[b.price] * q;
}

/// Welfare of the embedded clearing at the solution, with strategic units
/// valued at their offer prices.
inline double embedded_welfare(const ClearingBlock& b, const std::vector<double>& x) {
  double w = 0.0;
  for (std::size_t d = 0; d < b.demand.size(); ++d) w += b.demand_utility[d] * x[b.demand[d]];
  for (std::size_t r = 0; r < b.rival.size(); ++r) w -= b.rival_price[r] * x[b.rival[r]];
  for (const auto* group : {&b.existing, &b.candidate})
    for (const auto& s : *group) w -= x[s.price] * x[s.dispatch];
  return w;
}

/// Lower-level input implied by the solution's offers, for re-clearing.
inline ClearingInput clearing_input_from_solution(const ClearingBlock& b, const std::vector<double>& x) {
  ClearingInput in;
  auto nonneg = [](double v) { return std::max(0.0, v); };
  for (std::size_t d = 0; d < b.demand.size(); ++d)
    in.demands.push_back({"d" + std::to_string(d), b.demand_cap[d], b.demand_utility[d]});
  for (std::size_t r = 0; r < b.rival.size(); ++r)
    in.rivals.push_back({"r" + std::to_string(r), b.rival_cap[r], b.rival_price[r]});
  for (std::size_t e = 0; e < b.existing.size(); ++e)
    in.existing.push_back(
        {"e" + std::to_string(e), nonneg(x[b.existing[e].quantity]), nonneg(x[b.existing[e].price])});
  for (std::size_t c = 0; c < b.candidate.size(); ++c)
    in.candidates.push_back(
        {"c" + std::to_string(c), nonneg(x[b.candidate[c].quantity]), nonneg(x[b.candidate[c].price])});
  return in;
}

/// Investment values of a scenario-shaped model, [t][c].
inline std::vector<std::vector<double>> investment_values(const MpccModel& m, const Instance& in,
                                                          const std::vector<double>& x) {
  std::vector<std::vector<double>> out(in.num_stages(), std::vector<double>(in.num_candidates(), 0.0));
  for (const auto& inv : m.investments) out[inv.t][inv.c] = x[inv.col];
  return out;
}

}  // namespace stratinv
