#include <gtest/gtest.h>

#include <cstdlib>

#include "rcu/config.hpp"

using namespace rcu;

namespace {

json minimal() {
  return json::parse(R"({
    "system": {"n": 64, "k": 6, "ebn0_db": 12.0, "pprime_ratio": 0.9},
    "activity": {"kind": "fixed", "count": 2},
    "decoder": {"estimator": "oracle"}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MissingAndInvalidFields) {
  json d = minimal();
  d["system"].erase("n");
  EXPECT_EQ(error_of(d), "missing field: n");
  d = minimal();
  d.erase("activity");
  EXPECT_EQ(error_of(d), "missing field: activity");
  d = minimal();
  d["system"]["k"] = "many";
  EXPECT_EQ(error_of(d), "invalid field: k");
  d = minimal();
  d["decoder"]["estimator"] = "guess";
  EXPECT_EQ(error_of(d), "invalid field: estimator");
  d = minimal();
  d["system"]["pprime_ratio"] = "best";
  EXPECT_EQ(error_of(d), "invalid field: pprime_ratio");
  d = minimal();
  d["activity"] = {{"kind", "poisson"}};
  EXPECT_EQ(error_of(d), "missing field: mean");
}

TEST(Config, Defaults) {
  const RunConfig c = parse_config(minimal());
  EXPECT_EQ(c.policy.estimator, Estimator::oracle);
  EXPECT_EQ(c.policy.radius, 0);
  EXPECT_EQ(c.radii, std::vector<int>{0});
  EXPECT_TRUE(c.qpolicy.enabled);
  EXPECT_EQ(c.qpolicy.samples, 20000);
  EXPECT_EQ(c.scheme, Scheme::theorem1);
  EXPECT_DOUBLE_EQ(c.target, 0.1);
  const auto sys = c.fixed_system();
  ASSERT_TRUE(sys.has_value());
  EXPECT_NEAR(sys->ebn0_db(), 12.0, 1e-12);
  EXPECT_NEAR(sys->codebook_power / sys->power, 0.9, 1e-15);
}

TEST(Config, OptimizeRatioAndMissingEbN0) {
  json d = minimal();
  d["system"]["pprime_ratio"] = "optimize";
  RunConfig c = parse_config(d);
  EXPECT_FALSE(c.pprime_ratio.has_value());
  EXPECT_FALSE(c.fixed_system().has_value());
  d["system"].erase("ebn0_db");
  c = parse_config(d);
  try {
    c.resolved_ebn0();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "missing field: ebn0_db");
  }
}

TEST(Config, ExplicitPmf) {
  json d = minimal();
  d["activity"] = {{"kind", "explicit"}, {"pmf", {{"1", 0.5}, {"3", 0.5}}}, {"tail_threshold", 0.01}};
  const RunConfig c = parse_config(d);
  const auto a = c.activity();
  EXPECT_EQ(a.lower(), 1);
  EXPECT_EQ(a.upper(), 3);
  EXPECT_DOUBLE_EQ(a.pmf(2), 0.0);
}

TEST(Config, EffectiveConfigIsAFixedPoint) {
  json d = minimal();
  d["decoder"]["radii"] = {0, 1};
  d["solver"] = {{"scheme", "sampr"}, {"slots", {1, 2}}};
  d["activity"] = {{"kind", "poisson"}, {"mean", 3.5}, {"tail_threshold", 1e-6}};
  const json once = effective_config(parse_config(d));
  const json twice = effective_config(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once["solver"]["scheme"], "sampr");
  EXPECT_EQ(once["decoder"]["radii"], json({0, 1}));
}

TEST(Config, SeedOverrideFromEnvironment) {
  ::setenv("RCU_SEED", "77", 1);
  const RunConfig c = parse_config(minimal());
  ::unsetenv("RCU_SEED");
  EXPECT_EQ(c.qpolicy.seed, 77u);
  EXPECT_EQ(c.sim_seed, 77u);
  ::setenv("RCU_SEED", "x1", 1);
  EXPECT_EQ(error_of(minimal()), "RCU_SEED must be an unsigned integer");
  ::unsetenv("RCU_SEED");
}
