#include <gtest/gtest.h>

#include <random>

#include "stratinv/admm.hpp"
#include "stratinv/extensive.hpp"
#include "stratinv/generator.hpp"

using namespace stratinv;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Instance small_tree(std::uint64_t seed, int long_term = 2, int short_term = 2) {
  GeneratorParams p;
  p.seed = seed;
  p.stages = 2;
  p.long_term = long_term;
  p.short_term = short_term;
  p.conditions = 1;
  p.candidates = 1;
  p.rivals = 2;
  p.existing = 1;
  return generate_random(p);
}

ScenarioTable random_table(const Instance& in, std::mt19937_64& rng, double hi) {
  ScenarioTable x = detail::zeros(in);
  std::uniform_real_distribution<double> u(0.0, hi);
  for (auto& g : x)
    for (auto& k : g)
      for (auto& t : k)
        for (auto& v : t) v = u(rng);
  return x;
}

}  // namespace

TEST(Consensus, WeightedPairClass) {
  GeneratorParams p;
  p.long_term = 3;
  p.short_term = 1;
  p.candidates = 1;
  Instance in = generate_random(p);
  in.long_term_scenarios[0].probability = 0.2;
  in.long_term_scenarios[1].probability = 0.3;
  in.long_term_scenarios[2].probability = 0.5;
  in.tree.stage_partitions[1] = {{0, 1}, {2}};
  ScenarioTable x = detail::zeros(in);
  x[0][0][1][0] = 10.0;
  x[1][0][1][0] = 20.0;
  x[2][0][1][0] = 7.0;
  const ScenarioTable xbar = consensus_update(in, x);
  EXPECT_DOUBLE_EQ(xbar[0][0][1][0], 16.0);
  EXPECT_DOUBLE_EQ(xbar[1][0][1][0], 16.0);
  EXPECT_DOUBLE_EQ(xbar[2][0][1][0], 7.0);
}

TEST(Consensus, RootClassOfEqualValues) {
  const Instance in = generate_sec4();
  ScenarioTable x = detail::zeros(in);
  for (auto& g : x)
    for (auto& k : g) k[0] = {12.5, 0.1, 77.0};
  const ScenarioTable xbar = consensus_update(in, x);
  for (const auto& g : xbar)
    for (const auto& k : g) EXPECT_EQ(k[0], (std::vector<double>{12.5, 0.1, 77.0}));
}

TEST(Consensus, LeafClassMean) {
  const Instance in = generate_sec4();
  ScenarioTable x = detail::zeros(in);
  x[1][0][1][2] = 0.0;
  x[1][1][1][2] = 30.0;
  x[1][2][1][2] = 60.0;
  const ScenarioTable xbar = consensus_update(in, x);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(xbar[1][k][1][2], 30.0);
  // Other leaves are untouched by γ2's values.
  EXPECT_DOUBLE_EQ(xbar[0][0][1][2], 0.0);
}

TEST(Consensus, Idempotent) {
  std::mt19937_64 rng(3);
  const Instance in = generate_sec4();
  for (int trial = 0; trial < 20; ++trial) {
    const ScenarioTable xbar = consensus_update(in, random_table(in, rng, 200.0));
    EXPECT_EQ(consensus_update(in, xbar), xbar);
  }
}

TEST(DualUpdate, ByHand) {
  const Instance in = generate_sec4();
  ScenarioTable x = detail::zeros(in);
  x[1][0][1][0] = 10.0;
  x[1][1][1][0] = 14.0;
  x[1][2][1][0] = 12.0;
  const ScenarioTable xbar = consensus_update(in, x);
  ASSERT_DOUBLE_EQ(xbar[1][1][1][0], 12.0);
  const ScenarioTable mu = dual_update(in, detail::zeros(in), x, xbar, 100.0);
  EXPECT_DOUBLE_EQ(mu[1][0][1][0], -200.0);
  EXPECT_DOUBLE_EQ(mu[1][1][1][0], 200.0);
  EXPECT_DOUBLE_EQ(mu[1][2][1][0], 0.0);
}

TEST(DualUpdate, AgreementLeavesDualsAlone) {
  std::mt19937_64 rng(5);
  const Instance in = generate_sec4();
  const ScenarioTable xbar = consensus_update(in, random_table(in, rng, 100.0));
  ScenarioTable mu0 = random_table(in, rng, 1.0);
  mu0 = dual_update(in, detail::zeros(in), mu0, consensus_update(in, mu0), 1.0);
  EXPECT_EQ(dual_update(in, mu0, xbar, xbar, 100.0), mu0);
}

TEST(DualUpdate, RejectsForeignConsensus) {
  std::mt19937_64 rng(6);
  const Instance in = generate_sec4();
  const ScenarioTable x = random_table(in, rng, 100.0);
  ScenarioTable xbar = consensus_update(in, x);
  for (auto& g : xbar)
    for (auto& k : g) k[0][0] += 1.0;
  EXPECT_THROW(dual_update(in, detail::zeros(in), x, xbar, 100.0), Error);
}

TEST(DualUpdate, ClassSumsStayZero) {
  std::mt19937_64 rng(8);
  Instance in = small_tree(2, 3, 3);
  in.long_term_scenarios[0].probability = 0.17;
  in.long_term_scenarios[1].probability = 0.5;
  in.long_term_scenarios[2].probability = 0.33;
  in.short_term_scenarios[0].probability = 0.1;
  in.short_term_scenarios[1].probability = 0.6;
  in.short_term_scenarios[2].probability = 0.3;
  ASSERT_TRUE(validate_instance(in).ok());
  ScenarioTable mu = detail::zeros(in);
  for (int round = 0; round < 200; ++round) {
    const ScenarioTable x = random_table(in, rng, 300.0);
    mu = dual_update(in, mu, x, consensus_update(in, x), round % 2 ? 1e5 : 100.0);
    ASSERT_LE(dual_sum_residual(in, mu), 1e-8) << "round " << round;
  }
}

TEST(Admm, ConfigValidation) {
  AdmmConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rho = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.epsilon_mw = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.workers = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  EXPECT_EQ(c.cadence_for(generate_sec4()), 1);
  EXPECT_EQ(c.cadence_for(small_tree(1, 5, 4)), 5);
  c.bound_cadence = 3;
  EXPECT_EQ(c.cadence_for(generate_sec4()), 3);
}

TEST(Admm, CertificatePredicate) {
  EXPECT_TRUE(certificate_holds(100.0, 100.0, 0.1, 0.5));
  EXPECT_FALSE(certificate_holds(100.0, 100.0, 0.6, 0.5));
  EXPECT_TRUE(certificate_holds(1e8 + 50.0, 1e8, 0.0, 0.5));
  EXPECT_FALSE(certificate_holds(1e8 + 200.0, 1e8, 0.0, 0.5));
}

TEST(Admm, LargePenaltyPinsToAnchor) {
  const Instance in = small_tree(4, 1, 1);
  AdmmConfig cfg;
  cfg.pwl_segments = 100;
  const double xmax = in.candidate_units[0].max_capacity_mw;
  const double spacing = xmax / cfg.pwl_segments;
  const Table2<double> mu(2, std::vector<double>(1, 0.0));
  for (double a : {0.0, 0.37 * xmax, xmax}) {
    const Table2<double> anchor(2, std::vector<double>(1, a));
    const auto r = subproblem_step(in, 0, 0, mu, anchor, 1e8, cfg);
    for (const auto& row : r.x) EXPECT_LE(std::abs(row[0] - a), spacing + 1e-9) << "anchor " << a;
  }
}

TEST(Admm, GubAtZeroDualsIsWaitAndSee) {
  const Instance in = small_tree(3);
  AdmmConfig cfg;
  double ws = 0.0;
  for (int g = 0; g < 2; ++g)
    for (int k = 0; k < 2; ++k)
      ws += in.long_term_scenarios[g].probability * in.short_term_scenarios[k].probability *
            solve_mpcc(build_scenario_mpcc(in, g, k)).objective;
  EXPECT_LE(rel(compute_gub(in, detail::zeros(in), cfg), ws), 1e-6);
}

TEST(Admm, GubBoundsTheOptimumForAnyBalancedDuals) {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Instance in = small_tree(seed);
    const auto ext = solve_extensive(in);
    ASSERT_EQ(ext.status, BnbStatus::Optimal);
    AdmmConfig cfg;
    for (int trial = 0; trial < 5; ++trial) {
      const ScenarioTable x = random_table(in, rng, in.candidate_units[0].max_capacity_mw);
      const ScenarioTable mu = dual_update(in, detail::zeros(in), x, consensus_update(in, x), 1e4);
      EXPECT_GE(compute_gub(in, mu, cfg), ext.objective - 1e-6 * (1.0 + std::abs(ext.objective)));
    }
  }
}

TEST(Admm, UnbalancedDualsRejected) {
  const Instance in = small_tree(1);
  ScenarioTable mu = detail::zeros(in);
  mu[0][0][0][0] = 5.0;
  try {
    compute_gub(in, mu, AdmmConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Internal);
  }
}

TEST(Admm, UbAtZeroInvestment) {
  const Instance in = small_tree(2);
  double want = 0.0;
  const Table2<double> zero(2, std::vector<double>(1, 0.0));
  for (int g = 0; g < 2; ++g)
    for (int k = 0; k < 2; ++k)
      want += in.long_term_scenarios[g].probability * in.short_term_scenarios[k].probability *
              solve_mpcc(build_fixed_investment_problem(in, g, k, zero)).objective;
  EXPECT_LE(rel(compute_ub(in, detail::zeros(in), AdmmConfig{}), want), 1e-12);
}

TEST(Admm, TrivialScenarioCollapse) {
  const Instance in = generate_single();
  AdmmConfig cfg;
  const auto r = admm_solve(in, cfg);
  EXPECT_EQ(r.status, AdmmStatus::Converged);
  EXPECT_EQ(r.iterations, 0);
  const auto ext = solve_extensive(in);
  ASSERT_EQ(ext.status, BnbStatus::Optimal);
  EXPECT_LE(rel(r.gub, ext.objective), 1e-6);
  EXPECT_LE(rel(r.ub, ext.objective), 1e-6);
  EXPECT_LE(rel(r.profit_estimate, ext.objective), 1e-6);
  EXPECT_TRUE(r.certificate);
}

TEST(Admm, WorkerCountDoesNotChangeTheRun) {
  const Instance in = small_tree(5, 2, 3);
  AdmmConfig a;
  a.max_iters = 15;
  a.epsilon_mw = 0.01;
  AdmmConfig b = a;
  b.workers = 3;
  const auto ra = admm_solve(in, a);
  const auto rb = admm_solve(in, b);
  ASSERT_EQ(ra.state.history.size(), rb.state.history.size());
  for (std::size_t i = 0; i < ra.state.history.size(); ++i) {
    EXPECT_EQ(ra.state.history[i].gub, rb.state.history[i].gub);
    EXPECT_EQ(ra.state.history[i].ub, rb.state.history[i].ub);
    EXPECT_EQ(ra.state.history[i].max_residual_mw, rb.state.history[i].max_residual_mw);
  }
  EXPECT_EQ(ra.consensus, rb.consensus);
  EXPECT_EQ(ra.state.mu, rb.state.mu);
}

TEST(Admm, HistoryCarriesBoundsOnCadence) {
  const Instance in = small_tree(15, 3, 3);
  AdmmConfig cfg;
  cfg.max_iters = 7;
  cfg.bound_cadence = 3;
  cfg.epsilon_mw = 1e-6;
  const auto r = admm_solve(in, cfg);
  for (const auto& h : r.state.history) {
    const bool expect = h.iter == 0 || h.iter % 3 == 0 || h.iter == r.iterations;
    EXPECT_EQ(h.has_bounds, expect) << "iteration " << h.iter;
    EXPECT_LE(h.dual_sum_residual, 1e-8);
  }
  for (const auto& row : gap_report(r.state)) EXPECT_NEAR(row.abs_gap, std::abs(row.gub - row.ub), 1e-9);
}
