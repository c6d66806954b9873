#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "stratinv/generator.hpp"
#include "stratinv/instance_io.hpp"
#include "stratinv/model.hpp"

using namespace stratinv;

namespace {

bool has_error(const ValidationReport& r, const std::string& needle) {
  for (const auto& e : r.errors)
    if (e.message.find(needle) != std::string::npos || e.path.find(needle) != std::string::npos) return true;
  return false;
}

Instance three_by_one(std::vector<double> pi) {
  GeneratorParams p;
  p.long_term = 3;
  p.short_term = 1;
  p.stages = 2;
  Instance in = generate_random(p);
  for (int g = 0; g < 3; ++g) in.long_term_scenarios[g].probability = pi[g];
  return in;
}

}  // namespace

TEST(Validate, Sec4ShapeIsClean) {
  const Instance in = generate_sec4();
  const auto r = validate_instance(in);
  EXPECT_TRUE(r.ok()) << r.summary();
  EXPECT_TRUE(r.warnings.empty()) << r.summary();
  EXPECT_EQ(in.num_long_term(), 3);
  EXPECT_EQ(in.num_short_term(), 3);
  EXPECT_EQ(in.num_conditions(), 5);
  EXPECT_EQ(in.num_stages(), 2);
  double total = 0.0;
  for (const auto& e : in.existing_units) total += e.capacity_mw;
  const auto& q = in.long_term_scenarios[0].rival_offer_quantity[0][0][0];
  for (double v : q) total += v;
  EXPECT_DOUBLE_EQ(total, 1500.0);
}

TEST(Validate, ProbabilitySumReported) {
  const Instance in = three_by_one({0.5, 0.5, 0.1});
  const auto r = validate_instance(in);
  EXPECT_TRUE(has_error(r, "long-term probabilities sum to 1.1")) << r.summary();
}

TEST(Validate, ProbabilityOffByMoreThanTolerance) {
  Instance in = three_by_one({0.2, 0.3, 0.5});
  EXPECT_TRUE(validate_instance(in).ok());
  in.long_term_scenarios[2].probability += 1e-10;
  EXPECT_FALSE(validate_instance(in).ok());
}

TEST(Validate, NonNestedPartition) {
  Instance in = three_by_one({0.2, 0.3, 0.5});
  // Stage 1 split, stage 2 merged: not a refinement.
  in.tree.stage_partitions[0] = {{0}, {1, 2}};
  in.tree.stage_partitions[1] = {{0, 1}, {2}};
  const auto r = validate_instance(in);
  EXPECT_TRUE(has_error(r, "partition not nested")) << r.summary();
}

TEST(Validate, RootMustBeSingleClass) {
  Instance in = three_by_one({0.2, 0.3, 0.5});
  in.tree.stage_partitions[0] = {{0}, {1}, {2}};
  EXPECT_FALSE(validate_instance(in).ok());
}

TEST(Validate, NegativeCapacityHasPath) {
  Instance in = generate_sec4();
  in.existing_units[1].capacity_mw = -5.0;
  const auto r = validate_instance(in);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "existing_units[e2].capacity_mw")) << r.summary();
}

TEST(Validate, MissingTableEntry) {
  Instance in = generate_sec4();
  in.long_term_scenarios[0].peak_load[1][0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(has_error(validate_instance(in), "missing")) << validate_instance(in).summary();
}

TEST(Validate, CapacityFactorOutOfRange) {
  Instance in = generate_sec4();
  in.operating_conditions[2].candidate_cf[2] = 1.5;
  EXPECT_FALSE(validate_instance(in).ok());
}

TEST(Validate, HoursAboveStageLengthWarnOnly) {
  Instance in = generate_sec4();
  for (auto& oc : in.operating_conditions) oc.weight_hours *= 2.0;
  const auto r = validate_instance(in);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(CombinedClass, RootHoldsEverything) {
  const Instance in = generate_sec4();
  const auto cls = combined_class(in, 0, 1, 2);
  ASSERT_EQ(cls.size(), 9u);
  for (const auto& m : cls) EXPECT_NEAR(m.weight, 1.0 / 9.0, 1e-15);
}

TEST(CombinedClass, LeafTimesAllShortTerm) {
  const Instance in = generate_sec4();
  const auto cls = combined_class(in, 1, 1, 0);
  ASSERT_EQ(cls.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(cls[i].gamma, 1);
    EXPECT_EQ(cls[i].k, i);
    EXPECT_NEAR(cls[i].weight, 1.0 / 3.0, 1e-15);
  }
}

TEST(CombinedClass, RenormalizedWeights) {
  Instance in = three_by_one({0.2, 0.3, 0.5});
  in.tree.stage_partitions[1] = {{0, 1}, {2}};
  const auto cls = combined_class(in, 1, 0, 0);
  ASSERT_EQ(cls.size(), 2u);
  EXPECT_NEAR(cls[0].weight, 0.4, 1e-15);
  EXPECT_NEAR(cls[1].weight, 0.6, 1e-15);
}

TEST(CombinedClass, BadIndicesThrow) {
  const Instance in = generate_sec4();
  EXPECT_THROW(combined_class(in, 2, 0, 0), Error);
  EXPECT_THROW(combined_class(in, 0, 3, 0), Error);
  EXPECT_THROW(combined_class(in, 0, 0, -1), Error);
}

TEST(CombinedClass, PartitionProperties) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorParams p;
    p.seed = seed;
    p.stages = 1 + seed % 3;
    p.long_term = 1 + seed % 4;
    p.short_term = 1 + (seed / 2) % 3;
    const Instance in = generate_random(p);
    ASSERT_TRUE(validate_instance(in).ok()) << validate_instance(in).summary();
    for (int t = 0; t < in.num_stages(); ++t) {
      std::set<std::pair<int, int>> seen;
      for (int g = 0; g < in.num_long_term(); ++g)
        for (int k = 0; k < in.num_short_term(); ++k) {
          const auto cls = combined_class(in, t, g, k);
          double sum = 0.0;
          bool self = false;
          for (const auto& m : cls) {
            EXPECT_GE(m.weight, 0.0);
            sum += m.weight;
            self |= m.gamma == g && m.k == k;
            // Membership is symmetric, so classes are disjoint.
            const auto back = combined_class(in, t, m.gamma, m.k);
            EXPECT_EQ(back.size(), cls.size());
          }
          EXPECT_TRUE(self);
          EXPECT_NEAR(sum, 1.0, 1e-12);
          seen.insert({g, k});
        }
      EXPECT_EQ(static_cast<int>(seen.size()), in.num_long_term() * in.num_short_term());
      if (t + 1 < in.num_stages())
        for (const auto& child : in.tree.stage_partitions[t + 1]) {
          const int parent = in.tree.class_of(t, child.front());
          for (int g : child) EXPECT_EQ(in.tree.class_of(t, g), parent);
        }
    }
  }
}

TEST(InstanceIo, RoundTrip) {
  const Instance in = generate_sec4();
  const std::string text = instance_to_text(in);
  const Instance back = parse_instance_text(text);
  EXPECT_EQ(instance_to_text(back), text);
  EXPECT_EQ(fingerprint(back), fingerprint(in));
  EXPECT_TRUE(validate_instance(back).ok());
}

TEST(InstanceIo, RandomRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorParams p;
    p.seed = seed;
    p.candidates = 3;
    const Instance in = generate_random(p);
    EXPECT_EQ(instance_to_text(parse_instance_text(instance_to_text(in))), instance_to_text(in));
  }
}

TEST(InstanceIo, UnknownKeyNamed) {
  auto j = instance_to_json(generate_sec4());
  j["stages"][0]["colour"] = "red";
  try {
    parse_instance_text(j.dump());
    FAIL() << "accepted unknown key";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, SyntaxErrorHasLine) {
  try {
    parse_instance_text("{\n  \"stages\": [\n  oops\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, NegativeCapacityFromFile) {
  auto j = instance_to_json(generate_sec4());
  j["existing_units"][0]["capacity_mw"] = -1.0;
  const std::string path = testing::TempDir() + "neg_cap.json";
  std::ofstream(path) << j.dump(2);
  try {
    parse_instance(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find("existing_units[e1].capacity_mw"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, BundledFixtureParses) {
  const Instance in = parse_instance("data/instance_sec4_shape.json");
  EXPECT_EQ(fingerprint(in), fingerprint(generate_sec4()));
}

TEST(Generator, SeedDeterminism) {
  GeneratorParams p;
  p.seed = 42;
  EXPECT_EQ(instance_to_text(generate_random(p)), instance_to_text(generate_random(p)));
  p.seed = 43;
  GeneratorParams q;
  q.seed = 42;
  EXPECT_NE(instance_to_text(generate_random(p)), instance_to_text(generate_random(q)));
}

TEST(Generator, SingleScenarioPreset) {
  const Instance in = generate_single();
  EXPECT_TRUE(validate_instance(in).ok()) << validate_instance(in).summary();
  EXPECT_EQ(in.num_long_term(), 1);
  EXPECT_EQ(in.num_short_term(), 1);
}

TEST(Generator, RejectsBadCounts) {
  GeneratorParams p;
  p.stages = 0;
  EXPECT_THROW(generate_random(p), Error);
}
