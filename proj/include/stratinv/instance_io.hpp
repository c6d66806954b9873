#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "stratinv/error.hpp"
#include "stratinv/model.hpp"

// Structured-text (JSON) instance format. The schema is documented in
// docs/instance_schema.md; every object is closed, so unknown keys are errors.

namespace stratinv {

using Json = nlohmann::ordered_json;

namespace detail {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Parse, path + ": " + msg);
}

inline void closed_object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) parse_fail(path, "unknown key '" + it.key() + "'");
  }
}

inline const Json& field(const Json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(path, std::string("missing key '") + key + "'");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

inline std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) parse_fail(path, "expected a string");
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  return j;
}

inline Technology technology(const Json& j, const std::string& path) {
  const std::string s = text(j, path);
  if (s == "Conv") return Technology::Conv;
  if (s == "WP") return Technology::WP;
  parse_fail(path, "technology must be \"Conv\" or \"WP\", got \"" + s + "\"");
}

template <class T>
std::map<std::string, int> index_of(const std::vector<T>& v) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < v.size(); ++i) m.emplace(v[i].id, static_cast<int>(i));
  return m;
}

// Object keyed by the ids in `ids`; unknown keys are rejected, missing keys
// leave the slot untouched (reported later by validation).
template <class F>
void keyed(const Json& j, const std::string& path, const std::map<std::string, int>& ids, F&& each) {
  if (!j.is_object()) parse_fail(path, "expected an object keyed by id");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto f = ids.find(it.key());
    if (f == ids.end()) parse_fail(path, "unknown key '" + it.key() + "'");
    each(f->second, it.value(), path + "." + it.key());
  }
}

inline std::pair<int, int> line_col(const std::string& s, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < s.size() && i + 1 < byte; ++i) {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses the JSON text into an Instance without semantic validation.
/// Syntax, type and unknown-key problems throw Error(Parse).
inline Instance parse_instance_text(const std::string& src) {
  using namespace detail;
  Json root;
  try {
    root = Json::parse(src);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(src, e.byte);
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  closed_object(root, "$", {"sos_factor", "stages", "demands", "existing_units", "candidate_units", "rival_units",
                            "operating_conditions", "long_term_scenarios", "short_term_scenarios", "tree"});
  Instance in;
  in.sos_factor = number(field(root, "$", "sos_factor"), "sos_factor");

  for (const auto& s : array(field(root, "$", "stages"), "stages")) {
    const std::string p = "stages[" + std::to_string(in.stages.size()) + "]";
    closed_object(s, p, {"id", "discount_factor", "amortization_rate", "budget_usd", "duration_years"});
    Stage st;
    st.id = text(field(s, p, "id"), p + ".id");
    st.discount_factor = number(field(s, p, "discount_factor"), p + ".discount_factor");
    st.amortization_rate = number(field(s, p, "amortization_rate"), p + ".amortization_rate");
    st.budget_usd = number(field(s, p, "budget_usd"), p + ".budget_usd");
    st.duration_years = number(field(s, p, "duration_years"), p + ".duration_years");
    in.stages.push_back(st);
  }
  for (const auto& d : array(field(root, "$", "demands"), "demands")) {
    const std::string p = "demands[" + std::to_string(in.demands.size()) + "]";
    closed_object(d, p, {"id"});
    in.demands.push_back({text(field(d, p, "id"), p + ".id")});
  }
  for (const auto& e : array(field(root, "$", "existing_units"), "existing_units")) {
    const std::string p = "existing_units[" + std::to_string(in.existing_units.size()) + "]";
    closed_object(e, p, {"id", "capacity_mw", "technology"});
    in.existing_units.push_back({text(field(e, p, "id"), p + ".id"),
                                 number(field(e, p, "capacity_mw"), p + ".capacity_mw"),
                                 technology(field(e, p, "technology"), p + ".technology")});
  }
  for (const auto& c : array(field(root, "$", "candidate_units"), "candidate_units")) {
    const std::string p = "candidate_units[" + std::to_string(in.candidate_units.size()) + "]";
    closed_object(c, p, {"id", "max_capacity_mw", "technology"});
    in.candidate_units.push_back({text(field(c, p, "id"), p + ".id"),
                                  number(field(c, p, "max_capacity_mw"), p + ".max_capacity_mw"),
                                  technology(field(c, p, "technology"), p + ".technology")});
  }
  for (const auto& r : array(field(root, "$", "rival_units"), "rival_units")) {
    const std::string p = "rival_units[" + std::to_string(in.rival_units.size()) + "]";
    closed_object(r, p, {"id", "technology"});
    in.rival_units.push_back({text(field(r, p, "id"), p + ".id"), technology(field(r, p, "technology"), p + ".technology")});
  }

  const auto stage_ids = index_of(in.stages);
  const auto demand_ids = index_of(in.demands);
  const auto existing_ids = index_of(in.existing_units);
  const auto candidate_ids = index_of(in.candidate_units);
  const auto rival_ids = index_of(in.rival_units);
  const int T = in.num_stages(), D = in.num_demands(), E = in.num_existing(), C = in.num_candidates(),
            R = in.num_rivals();

  // Capacity factors are keyed by the id of any WP unit.
  std::map<std::string, std::pair<int, int>> wp_ids;  // id -> (group, index)
  for (int e = 0; e < E; ++e)
    if (in.existing_units[e].technology == Technology::WP) wp_ids.emplace(in.existing_units[e].id, std::pair{0, e});
  for (int c = 0; c < C; ++c)
    if (in.candidate_units[c].technology == Technology::WP) wp_ids.emplace(in.candidate_units[c].id, std::pair{1, c});
  for (int r = 0; r < R; ++r)
    if (in.rival_units[r].technology == Technology::WP) wp_ids.emplace(in.rival_units[r].id, std::pair{2, r});

  for (const auto& o : array(field(root, "$", "operating_conditions"), "operating_conditions")) {
    const std::string p = "operating_conditions[" + std::to_string(in.operating_conditions.size()) + "]";
    closed_object(o, p, {"id", "weight_hours", "capacity_factors", "demand_factors"});
    OperatingCondition oc;
    oc.id = text(field(o, p, "id"), p + ".id");
    oc.weight_hours = number(field(o, p, "weight_hours"), p + ".weight_hours");
    auto fill = [](int n, auto&& is_wp) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = is_wp(i) ? kMissing : 1.0;
      return v;
    };
    oc.existing_cf = fill(E, [&](int i) { return in.existing_units[i].technology == Technology::WP; });
    oc.candidate_cf = fill(C, [&](int i) { return in.candidate_units[i].technology == Technology::WP; });
    oc.rival_cf = fill(R, [&](int i) { return in.rival_units[i].technology == Technology::WP; });
    oc.demand_factor.assign(D, kMissing);
    const Json& cf = field(o, p, "capacity_factors");
    if (!cf.is_object()) parse_fail(p + ".capacity_factors", "expected an object keyed by WP unit id");
    for (auto it = cf.begin(); it != cf.end(); ++it) {
      auto f = wp_ids.find(it.key());
      if (f == wp_ids.end()) parse_fail(p + ".capacity_factors", "unknown key '" + it.key() + "' (not a WP unit)");
      const double v = number(it.value(), p + ".capacity_factors." + it.key());
      auto& target = f->second.first == 0 ? oc.existing_cf : f->second.first == 1 ? oc.candidate_cf : oc.rival_cf;
      target[f->second.second] = v;
    }
    keyed(field(o, p, "demand_factors"), p + ".demand_factors", demand_ids,
          [&](int d, const Json& v, const std::string& path) { oc.demand_factor[d] = number(v, path); });
    in.operating_conditions.push_back(std::move(oc));
  }
  const auto condition_ids = index_of(in.operating_conditions);
  const int H = in.num_conditions();

  // Short-term ids are needed by long-term tables and vice versa; read ids first.
  const Json& lt_list = array(field(root, "$", "long_term_scenarios"), "long_term_scenarios");
  const Json& st_list = array(field(root, "$", "short_term_scenarios"), "short_term_scenarios");
  for (std::size_t i = 0; i < lt_list.size(); ++i) {
    const std::string p = "long_term_scenarios[" + std::to_string(i) + "]";
    closed_object(lt_list[i], p,
                  {"id", "probability", "investment_cost_usd_per_mw", "existing_marginal_cost_usd_per_mwh",
                   "candidate_marginal_cost_usd_per_mwh", "peak_load_mw", "rival_offer_quantity_mw"});
    LongTermScenario s;
    s.id = text(field(lt_list[i], p, "id"), p + ".id");
    s.probability = number(field(lt_list[i], p, "probability"), p + ".probability");
    in.long_term_scenarios.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < st_list.size(); ++i) {
    const std::string p = "short_term_scenarios[" + std::to_string(i) + "]";
    closed_object(st_list[i], p, {"id", "probability", "rival_offer_price_usd_per_mwh", "demand_utility_usd_per_mwh"});
    ShortTermScenario s;
    s.id = text(field(st_list[i], p, "id"), p + ".id");
    s.probability = number(field(st_list[i], p, "probability"), p + ".probability");
    in.short_term_scenarios.push_back(std::move(s));
  }
  const auto lt_ids = index_of(in.long_term_scenarios);
  const auto st_ids = index_of(in.short_term_scenarios);
  const int G = in.num_long_term(), K = in.num_short_term();

  auto table2 = [&](const Json& j, const std::string& path, int inner, const std::map<std::string, int>& inner_ids) {
    Table2<double> tab(T, std::vector<double>(inner, kMissing));
    keyed(j, path, stage_ids, [&](int t, const Json& row, const std::string& pt) {
      keyed(row, pt, inner_ids, [&](int x, const Json& v, const std::string& px) { tab[t][x] = number(v, px); });
    });
    return tab;
  };

  for (int g = 0; g < G; ++g) {
    const Json& j = lt_list[g];
    auto& s = in.long_term_scenarios[g];
    const std::string p = "long_term_scenarios[" + s.id + "]";
    s.investment_cost = table2(field(j, p, "investment_cost_usd_per_mw"), p + ".investment_cost_usd_per_mw", C,
                               candidate_ids);
    s.existing_marginal_cost = table2(field(j, p, "existing_marginal_cost_usd_per_mwh"),
                                      p + ".existing_marginal_cost_usd_per_mwh", E, existing_ids);
    s.candidate_marginal_cost = table2(field(j, p, "candidate_marginal_cost_usd_per_mwh"),
                                       p + ".candidate_marginal_cost_usd_per_mwh", C, candidate_ids);
    s.peak_load = table2(field(j, p, "peak_load_mw"), p + ".peak_load_mw", D, demand_ids);
    s.rival_offer_quantity.assign(T, Table3<double>(H, Table2<double>(K, std::vector<double>(R, kMissing))));
    keyed(field(j, p, "rival_offer_quantity_mw"), p + ".rival_offer_quantity_mw", stage_ids,
          [&](int t, const Json& jt, const std::string& pt) {
            keyed(jt, pt, condition_ids, [&](int h, const Json& jh, const std::string& ph) {
              keyed(jh, ph, st_ids, [&](int k, const Json& jk, const std::string& pk) {
                keyed(jk, pk, rival_ids, [&](int r, const Json& v, const std::string& pr) {
                  s.rival_offer_quantity[t][h][k][r] = number(v, pr);
                });
              });
            });
          });
  }
  for (int k = 0; k < K; ++k) {
    const Json& j = st_list[k];
    auto& s = in.short_term_scenarios[k];
    const std::string p = "short_term_scenarios[" + s.id + "]";
    s.rival_offer_price.assign(T, Table2<double>(G, std::vector<double>(R, kMissing)));
    keyed(field(j, p, "rival_offer_price_usd_per_mwh"), p + ".rival_offer_price_usd_per_mwh", stage_ids,
          [&](int t, const Json& jt, const std::string& pt) {
            keyed(jt, pt, lt_ids, [&](int g, const Json& jg, const std::string& pg) {
              keyed(jg, pg, rival_ids,
                    [&](int r, const Json& v, const std::string& pr) { s.rival_offer_price[t][g][r] = number(v, pr); });
            });
          });
    s.demand_utility =
        table2(field(j, p, "demand_utility_usd_per_mwh"), p + ".demand_utility_usd_per_mwh", D, demand_ids);
  }

  const Json& tree = field(root, "$", "tree");
  closed_object(tree, "tree", {"stage_partitions"});
  in.tree.stage_partitions.assign(T, {});
  std::vector<bool> stage_seen(T, false);
  keyed(field(tree, "tree", "stage_partitions"), "tree.stage_partitions", stage_ids,
        [&](int t, const Json& classes, const std::string& pt) {
          stage_seen[t] = true;
          for (const auto& cls : array(classes, pt)) {
            std::vector<int> members;
            for (const auto& g : array(cls, pt)) {
              const std::string id = text(g, pt);
              auto f = lt_ids.find(id);
              if (f == lt_ids.end()) parse_fail(pt, "unknown long-term scenario '" + id + "'");
              members.push_back(f->second);
            }
            in.tree.stage_partitions[t].push_back(std::move(members));
          }
        });
  for (int t = 0; t < T; ++t)
    if (!stage_seen[t]) parse_fail("tree.stage_partitions", "missing partition for stage '" + in.stages[t].id + "'");
  return in;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

/// Reads, parses and validates an instance file. Validation failures throw
/// Error(Validation) listing every issue.
inline Instance parse_instance(const std::string& path) {
  Instance in = parse_instance_text(read_file(path));
  require_valid(in);
  return in;
}

inline Json instance_to_json(const Instance& in) {
  Json root;
  root["sos_factor"] = in.sos_factor;
  root["stages"] = Json::array();
  for (const auto& s : in.stages)
    root["stages"].push_back({{"id", s.id},
                              {"discount_factor", s.discount_factor},
                              {"amortization_rate", s.amortization_rate},
                              {"budget_usd", s.budget_usd},
                              {"duration_years", s.duration_years}});
  root["demands"] = Json::array();
  for (const auto& d : in.demands) root["demands"].push_back({{"id", d.id}});
  root["existing_units"] = Json::array();
  for (const auto& e : in.existing_units)
    root["existing_units"].push_back(
        {{"id", e.id}, {"capacity_mw", e.capacity_mw}, {"technology", to_string(e.technology)}});
  root["candidate_units"] = Json::array();
  for (const auto& c : in.candidate_units)
    root["candidate_units"].push_back(
        {{"id", c.id}, {"max_capacity_mw", c.max_capacity_mw}, {"technology", to_string(c.technology)}});
  root["rival_units"] = Json::array();
  for (const auto& r : in.rival_units) root["rival_units"].push_back({{"id", r.id}, {"technology", to_string(r.technology)}});

  root["operating_conditions"] = Json::array();
  for (const auto& oc : in.operating_conditions) {
    Json cf = Json::object();
    for (int e = 0; e < in.num_existing(); ++e)
      if (in.existing_units[e].technology == Technology::WP) cf[in.existing_units[e].id] = oc.existing_cf[e];
    for (int c = 0; c < in.num_candidates(); ++c)
      if (in.candidate_units[c].technology == Technology::WP) cf[in.candidate_units[c].id] = oc.candidate_cf[c];
    for (int r = 0; r < in.num_rivals(); ++r)
      if (in.rival_units[r].technology == Technology::WP) cf[in.rival_units[r].id] = oc.rival_cf[r];
    Json df = Json::object();
    for (int d = 0; d < in.num_demands(); ++d) df[in.demands[d].id] = oc.demand_factor[d];
    root["operating_conditions"].push_back(
        {{"id", oc.id}, {"weight_hours", oc.weight_hours}, {"capacity_factors", cf}, {"demand_factors", df}});
  }

  auto table2 = [&](const Table2<double>& tab, auto&& inner_id) {
    Json j = Json::object();
    for (int t = 0; t < in.num_stages(); ++t) {
      Json row = Json::object();
      for (std::size_t x = 0; x < tab[t].size(); ++x) row[inner_id(x)] = tab[t][x];
      j[in.stages[t].id] = row;
    }
    return j;
  };
  auto cand = [&](std::size_t x) { return in.candidate_units[x].id; };
  root["long_term_scenarios"] = Json::array();
  for (const auto& s : in.long_term_scenarios) {
    Json q = Json::object();
    for (int t = 0; t < in.num_stages(); ++t) {
      Json jt = Json::object();
      for (int h = 0; h < in.num_conditions(); ++h) {
        Json jh = Json::object();
        for (int k = 0; k < in.num_short_term(); ++k) {
          Json jk = Json::object();
          for (int r = 0; r < in.num_rivals(); ++r) jk[in.rival_units[r].id] = s.rival_offer_quantity[t][h][k][r];
          jh[in.short_term_scenarios[k].id] = jk;
        }
        jt[in.operating_conditions[h].id] = jh;
      }
      q[in.stages[t].id] = jt;
    }
    root["long_term_scenarios"].push_back(
        {{"id", s.id},
         {"probability", s.probability},
         {"investment_cost_usd_per_mw", table2(s.investment_cost, cand)},
         {"existing_marginal_cost_usd_per_mwh",
          table2(s.existing_marginal_cost, [&](std::size_t x) { return in.existing_units[x].id; })},
         {"candidate_marginal_cost_usd_per_mwh", table2(s.candidate_marginal_cost, cand)},
         {"peak_load_mw", table2(s.peak_load, [&](std::size_t x) { return in.demands[x].id; })},
         {"rival_offer_quantity_mw", q}});
  }
  root["short_term_scenarios"] = Json::array();
  for (const auto& s : in.short_term_scenarios) {
    Json p = Json::object();
    for (int t = 0; t < in.num_stages(); ++t) {
      Json jt = Json::object();
      for (int g = 0; g < in.num_long_term(); ++g) {
        Json jg = Json::object();
        for (int r = 0; r < in.num_rivals(); ++r) jg[in.rival_units[r].id] = s.rival_offer_price[t][g][r];
        jt[in.long_term_scenarios[g].id] = jg;
      }
      p[in.stages[t].id] = jt;
    }
    root["short_term_scenarios"].push_back(
        {{"id", s.id},
         {"probability", s.probability},
         {"rival_offer_price_usd_per_mwh", p},
         {"demand_utility_usd_per_mwh", table2(s.demand_utility, [&](std::size_t x) { return in.demands[x].id; })}});
  }
  Json parts = Json::object();
  for (int t = 0; t < in.num_stages(); ++t) {
    Json classes = Json::array();
    for (const auto& cls : in.tree.stage_partitions[t]) {
      Json members = Json::array();
      for (int g : cls) members.push_back(in.long_term_scenarios[g].id);
      classes.push_back(members);
    }
    parts[in.stages[t].id] = classes;
  }
  root["tree"] = {{"stage_partitions", parts}};
  return root;
}

inline std::string instance_to_text(const Instance& in) { return instance_to_json(in).dump(2) + "\n"; }

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string fingerprint(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string fingerprint(const Instance& in) { return fingerprint(instance_to_json(in).dump()); }

}  // namespace stratinv
