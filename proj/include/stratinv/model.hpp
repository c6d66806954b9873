#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/tolerances.hpp"

namespace stratinv {

enum class Technology { Conv, WP };

inline const char* to_string(Technology t) { return t == Technology::WP ? "WP" : "Conv"; }

// Tables below are dense and indexed by position in the owning Instance
// lists. Missing data is stored as NaN and reported by validate_instance.
template <class T>
using Table2 = std::vector<std::vector<T>>;
template <class T>
using Table3 = std::vector<Table2<T>>;
template <class T>
using Table4 = std::vector<Table3<T>>;

struct Stage {
  std::string id;
  double discount_factor = 1.0;
  double amortization_rate = 0.0;
  double budget_usd = 0.0;
  double duration_years = 1.0;
};

struct ExistingUnit {
  std::string id;
  double capacity_mw = 0.0;
  Technology technology = Technology::Conv;
};

struct CandidateUnit {
  std::string id;
  double max_capacity_mw = 0.0;
  Technology technology = Technology::Conv;
};

struct RivalUnit {
  std::string id;
  Technology technology = Technology::Conv;
};

struct Demand {
  std::string id;
};

struct LongTermScenario {
  std::string id;
  double probability = 0.0;
  Table2<double> investment_cost;           // [t][c] $/MW
  Table2<double> existing_marginal_cost;    // [t][e] $/MWh
  Table2<double> candidate_marginal_cost;   // [t][c] $/MWh
  Table2<double> peak_load;                 // [t][d] MW
  Table4<double> rival_offer_quantity;      // [t][h][k][r] MW
};

struct ShortTermScenario {
  std::string id;
  double probability = 0.0;
  Table3<double> rival_offer_price;  // [t][γ][r] $/MWh
  Table2<double> demand_utility;     // [t][d] $/MWh
};

struct OperatingCondition {
  std::string id;
  double weight_hours = 0.0;
  // Capacity factors per unit; only read for WP units.
  std::vector<double> existing_cf;
  std::vector<double> candidate_cf;
  std::vector<double> rival_cf;
  std::vector<double> demand_factor;  // [d]
};

/// Per-stage partition of the long-term scenarios into tree nodes.
struct LongTermTree {
  // stage_partitions[t] is a list of classes, each a list of γ positions.
  std::vector<std::vector<std::vector<int>>> stage_partitions;

  // Class position of γ at stage t, or -1.
  int class_of(int t, int g) const {
    const auto& part = stage_partitions.at(t);
    for (std::size_t c = 0; c < part.size(); ++c)
      if (std::find(part[c].begin(), part[c].end(), g) != part[c].end()) return static_cast<int>(c);
    return -1;
  }
};

struct Instance {
  std::vector<Stage> stages;
  std::vector<LongTermScenario> long_term_scenarios;
  std::vector<ShortTermScenario> short_term_scenarios;
  std::vector<OperatingCondition> operating_conditions;
  std::vector<ExistingUnit> existing_units;
  std::vector<CandidateUnit> candidate_units;
  std::vector<RivalUnit> rival_units;
  std::vector<Demand> demands;
  double sos_factor = 0.0;
  LongTermTree tree;

  int num_stages() const { return static_cast<int>(stages.size()); }
  int num_long_term() const { return static_cast<int>(long_term_scenarios.size()); }
  int num_short_term() const { return static_cast<int>(short_term_scenarios.size()); }
  int num_conditions() const { return static_cast<int>(operating_conditions.size()); }
  int num_existing() const { return static_cast<int>(existing_units.size()); }
  int num_candidates() const { return static_cast<int>(candidate_units.size()); }
  int num_rivals() const { return static_cast<int>(rival_units.size()); }
  int num_demands() const { return static_cast<int>(demands.size()); }

  double existing_cf(int h, int e) const {
    return existing_units[e].technology == Technology::WP ? operating_conditions[h].existing_cf[e] : 1.0;
  }
  double candidate_cf(int h, int c) const {
    return candidate_units[c].technology == Technology::WP ? operating_conditions[h].candidate_cf[c] : 1.0;
  }
  double rival_cf(int h, int r) const {
    return rival_units[r].technology == Technology::WP ? operating_conditions[h].rival_cf[r] : 1.0;
  }
};

struct ValidationIssue {
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& e : errors) os << "error: " << e.path << ": " << e.message << "\n";
    for (const auto& w : warnings) os << "warning: " << w.path << ": " << w.message << "\n";
    return os.str();
  }
};

namespace detail {

class Validator {
 public:
  explicit Validator(ValidationReport& r) : report_(r) {}

  void error(const std::string& path, const std::string& msg) { report_.errors.push_back({path, msg}); }
  void warn(const std::string& path, const std::string& msg) { report_.warnings.push_back({path, msg}); }

  // Returns false (and reports) when the value is missing or non-finite.
  bool present(double v, const std::string& path) {
    if (std::isnan(v)) {
      error(path, "missing entry");
      return false;
    }
    if (!std::isfinite(v)) {
      error(path, "value is not finite");
      return false;
    }
    return true;
  }

  void nonneg(double v, const std::string& path) {
    if (present(v, path) && v < 0.0) error(path, "must be >= 0, got " + fmt(v));
  }

  void unit_interval(double v, const std::string& path) {
    if (present(v, path) && (v < 0.0 || v > 1.0)) error(path, "must lie in [0, 1], got " + fmt(v));
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

 private:
  ValidationReport& report_;
};

template <class F>
bool table_shape(Validator& v, std::size_t got, std::size_t want, const std::string& path, F&& each) {
  if (got != want) {
    v.error(path, "expected " + std::to_string(want) + " entries, got " + std::to_string(got));
    return false;
  }
  for (std::size_t i = 0; i < want; ++i) each(i);
  return true;
}

}  // namespace detail

/// Checks every structural invariant and reports all violations; never throws.
inline ValidationReport validate_instance(const Instance& in) {
  ValidationReport report;
  detail::Validator v(report);
  using detail::table_shape;
  using detail::Validator;

  const std::size_t T = in.stages.size(), G = in.long_term_scenarios.size(), K = in.short_term_scenarios.size(),
                    H = in.operating_conditions.size(), E = in.existing_units.size(), C = in.candidate_units.size(),
                    R = in.rival_units.size(), D = in.demands.size();

  if (T == 0) v.error("stages", "at least one stage is required");
  if (G == 0) v.error("long_term_scenarios", "at least one long-term scenario is required");
  if (K == 0) v.error("short_term_scenarios", "at least one short-term scenario is required");
  if (H == 0) v.error("operating_conditions", "at least one operating condition is required");

  auto unique_ids = [&](const auto& list, const std::string& path) {
    std::vector<std::string> ids;
    for (const auto& x : list) ids.push_back(x.id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i].empty()) v.error(path, "empty id");
      if (i > 0 && ids[i] == ids[i - 1]) v.error(path, "duplicate id '" + ids[i] + "'");
    }
  };
  unique_ids(in.stages, "stages");
  unique_ids(in.long_term_scenarios, "long_term_scenarios");
  unique_ids(in.short_term_scenarios, "short_term_scenarios");
  unique_ids(in.operating_conditions, "operating_conditions");
  unique_ids(in.existing_units, "existing_units");
  unique_ids(in.candidate_units, "candidate_units");
  unique_ids(in.rival_units, "rival_units");
  unique_ids(in.demands, "demands");

  for (const auto& s : in.stages) {
    const std::string p = "stages[" + s.id + "]";
    if (v.present(s.discount_factor, p + ".discount_factor") && !(s.discount_factor > 0.0 && s.discount_factor <= 1.0))
      v.error(p + ".discount_factor", "must lie in (0, 1], got " + Validator::fmt(s.discount_factor));
    v.unit_interval(s.amortization_rate, p + ".amortization_rate");
    v.nonneg(s.budget_usd, p + ".budget_usd");
    if (v.present(s.duration_years, p + ".duration_years") && s.duration_years <= 0.0)
      v.error(p + ".duration_years", "must be > 0");
  }

  auto probabilities = [&](const auto& list, const std::string& path, const char* label) {
    double sum = 0.0;
    for (const auto& x : list) {
      const std::string p = path + "[" + x.id + "].probability";
      if (v.present(x.probability, p) && x.probability <= 0.0) v.error(p, "must be > 0");
      sum += x.probability;
    }
    if (!list.empty() && std::isfinite(sum) && std::abs(sum - 1.0) > tol::kProbabilitySum)
      v.error(path, std::string(label) + " probabilities sum to " + Validator::fmt(sum));
  };
  probabilities(in.long_term_scenarios, "long_term_scenarios", "long-term");
  probabilities(in.short_term_scenarios, "short_term_scenarios", "short-term");

  for (const auto& e : in.existing_units) v.nonneg(e.capacity_mw, "existing_units[" + e.id + "].capacity_mw");
  for (const auto& c : in.candidate_units)
    v.nonneg(c.max_capacity_mw, "candidate_units[" + c.id + "].max_capacity_mw");
  v.unit_interval(in.sos_factor, "sos_factor");

  for (std::size_t g = 0; g < G; ++g) {
    const auto& s = in.long_term_scenarios[g];
    const std::string p = "long_term_scenarios[" + s.id + "]";
    auto tbl2 = [&](const Table2<double>& tab, const std::string& name, std::size_t inner, auto&& inner_id) {
      table_shape(v, tab.size(), T, p + "." + name, [&](std::size_t t) {
        const std::string pt = p + "." + name + "." + in.stages[t].id;
        table_shape(v, tab[t].size(), inner, pt,
                    [&](std::size_t j) { v.nonneg(tab[t][j], pt + "." + inner_id(j)); });
      });
    };
    auto cand_id = [&](std::size_t j) { return in.candidate_units[j].id; };
    tbl2(s.investment_cost, "investment_cost_usd_per_mw", C, cand_id);
    tbl2(s.existing_marginal_cost, "existing_marginal_cost_usd_per_mwh", E,
         [&](std::size_t j) { return in.existing_units[j].id; });
    tbl2(s.candidate_marginal_cost, "candidate_marginal_cost_usd_per_mwh", C, cand_id);
    tbl2(s.peak_load, "peak_load_mw", D, [&](std::size_t j) { return in.demands[j].id; });
    const std::string pq = p + ".rival_offer_quantity_mw";
    table_shape(v, s.rival_offer_quantity.size(), T, pq, [&](std::size_t t) {
      const std::string pt = pq + "." + in.stages[t].id;
      table_shape(v, s.rival_offer_quantity[t].size(), H, pt, [&](std::size_t h) {
        const std::string ph = pt + "." + in.operating_conditions[h].id;
        table_shape(v, s.rival_offer_quantity[t][h].size(), K, ph, [&](std::size_t k) {
          const std::string pk = ph + "." + in.short_term_scenarios[k].id;
          table_shape(v, s.rival_offer_quantity[t][h][k].size(), R, pk, [&](std::size_t r) {
            v.nonneg(s.rival_offer_quantity[t][h][k][r], pk + "." + in.rival_units[r].id);
          });
        });
      });
    });
  }

  for (const auto& s : in.short_term_scenarios) {
    const std::string p = "short_term_scenarios[" + s.id + "]";
    const std::string pp = p + ".rival_offer_price_usd_per_mwh";
    table_shape(v, s.rival_offer_price.size(), T, pp, [&](std::size_t t) {
      const std::string pt = pp + "." + in.stages[t].id;
      table_shape(v, s.rival_offer_price[t].size(), G, pt, [&](std::size_t g) {
        const std::string pg = pt + "." + in.long_term_scenarios[g].id;
        table_shape(v, s.rival_offer_price[t][g].size(), R, pg, [&](std::size_t r) {
          v.nonneg(s.rival_offer_price[t][g][r], pg + "." + in.rival_units[r].id);
        });
      });
    });
    const std::string pu = p + ".demand_utility_usd_per_mwh";
    table_shape(v, s.demand_utility.size(), T, pu, [&](std::size_t t) {
      const std::string pt = pu + "." + in.stages[t].id;
      table_shape(v, s.demand_utility[t].size(), D, pt,
                  [&](std::size_t d) { v.nonneg(s.demand_utility[t][d], pt + "." + in.demands[d].id); });
    });
  }

  double total_hours = 0.0;
  for (const auto& oc : in.operating_conditions) {
    const std::string p = "operating_conditions[" + oc.id + "]";
    if (v.present(oc.weight_hours, p + ".weight_hours") && oc.weight_hours <= 0.0)
      v.error(p + ".weight_hours", "must be > 0");
    total_hours += oc.weight_hours;
    auto factors = [&](const std::vector<double>& f, std::size_t n, const std::string& name, auto&& is_wp,
                       auto&& id_of) {
      table_shape(v, f.size(), n, p + "." + name, [&](std::size_t j) {
        if (is_wp(j)) v.unit_interval(f[j], p + "." + name + "." + id_of(j));
      });
    };
    factors(oc.existing_cf, E, "capacity_factors",
            [&](std::size_t j) { return in.existing_units[j].technology == Technology::WP; },
            [&](std::size_t j) { return in.existing_units[j].id; });
    factors(oc.candidate_cf, C, "capacity_factors",
            [&](std::size_t j) { return in.candidate_units[j].technology == Technology::WP; },
            [&](std::size_t j) { return in.candidate_units[j].id; });
    factors(oc.rival_cf, R, "capacity_factors",
            [&](std::size_t j) { return in.rival_units[j].technology == Technology::WP; },
            [&](std::size_t j) { return in.rival_units[j].id; });
    factors(oc.demand_factor, D, "demand_factors", [](std::size_t) { return true; },
            [&](std::size_t j) { return in.demands[j].id; });
  }
  // Operating conditions describe one stage; compare with its shortest length.
  double min_years = 0.0;
  for (const auto& s : in.stages)
    if (std::isfinite(s.duration_years) && s.duration_years > 0.0)
      min_years = min_years == 0.0 ? s.duration_years : std::min(min_years, s.duration_years);
  if (min_years > 0.0 && total_hours > 8760.0 * min_years)
    v.warn("operating_conditions", "weights sum to " + Validator::fmt(total_hours) + " h, more than " +
                                       Validator::fmt(8760.0 * min_years) + " h in a stage");

  // Tree.
  const auto& parts = in.tree.stage_partitions;
  if (parts.size() != T) {
    v.error("tree.stage_partitions", "expected one partition per stage (" + std::to_string(T) + "), got " +
                                         std::to_string(parts.size()));
  } else {
    for (std::size_t t = 0; t < T; ++t) {
      const std::string p = "tree.stage_partitions." + in.stages[t].id;
      std::vector<int> seen(G, 0);
      bool well_formed = true;
      for (const auto& cls : parts[t]) {
        if (cls.empty()) {
          v.error(p, "empty class");
          well_formed = false;
        }
        for (int g : cls) {
          if (g < 0 || static_cast<std::size_t>(g) >= G) {
            v.error(p, "unknown long-term scenario");
            well_formed = false;
            continue;
          }
          ++seen[g];
        }
      }
      for (std::size_t g = 0; g < G; ++g)
        if (seen[g] != 1) {
          v.error(p, "scenario '" + in.long_term_scenarios[g].id + "' appears " + std::to_string(seen[g]) +
                         " times, expected exactly once");
          well_formed = false;
        }
      if (t == 0 && well_formed && parts[0].size() != 1) v.error(p, "first stage must be a single root class");
      if (t > 0 && well_formed) {
        for (const auto& cls : parts[t]) {
          const int root = in.tree.class_of(static_cast<int>(t - 1), cls.front());
          for (int g : cls)
            if (in.tree.class_of(static_cast<int>(t - 1), g) != root) {
              v.error(p, "partition not nested in the previous stage");
              break;
            }
        }
      }
    }
  }
  return report;
}

inline void require_valid(const Instance& in) {
  const auto report = validate_instance(in);
  if (!report.ok()) throw Error(ErrorKind::Validation, "invalid instance:\n" + report.summary());
}

struct ClassMember {
  int gamma = 0;
  int k = 0;
  double weight = 0.0;
};

/// Members of the combined stage-t class of (γ, k): the long-term class of γ
/// crossed with every short-term scenario, weights renormalized to 1. Sorted
/// by (γ, k).
inline std::vector<ClassMember> combined_class(const Instance& in, int t, int gamma, int k) {
  if (t < 0 || t >= in.num_stages()) throw Error(ErrorKind::InvalidArgument, "unknown stage index");
  if (gamma < 0 || gamma >= in.num_long_term()) throw Error(ErrorKind::InvalidArgument, "unknown long-term scenario");
  if (k < 0 || k >= in.num_short_term()) throw Error(ErrorKind::InvalidArgument, "unknown short-term scenario");
  const int cls = in.tree.class_of(t, gamma);
  if (cls < 0) throw Error(ErrorKind::InvalidArgument, "scenario missing from stage partition");
  std::vector<int> gammas = in.tree.stage_partitions[t][cls];
  std::sort(gammas.begin(), gammas.end());
  std::vector<ClassMember> out;
  double total = 0.0;
  for (int g : gammas)
    for (int kk = 0; kk < in.num_short_term(); ++kk) {
      const double w = in.long_term_scenarios[g].probability * in.short_term_scenarios[kk].probability;
      out.push_back({g, kk, w});
      total += w;
    }
  for (auto& m : out) m.weight /= total;
  return out;
}

}  // namespace stratinv
