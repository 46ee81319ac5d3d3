#include <gtest/gtest.h>

#include "rcu/solver.hpp"

using namespace rcu;

namespace {

SolveRequest small_request(Scheme scheme) {
  SolveRequest r;
  r.n = 400;
  r.k = 16;
  r.activity = truncate_activity(PoissonActivity{4}, 1e-4);
  r.scheme = scheme;
  r.radii = {0, 1};
  r.slots = {1, 2, 4};
  r.target = 0.1;
  r.low_db = 0.0;
  r.high_db = 8.0;
  r.tolerance_db = 0.05;
  r.ratio_grid = {0.8, 0.9, 1.0};
  r.ratio_tolerance = 0.02;
  r.qpolicy.enabled = false;
  return r;
}

double worst_at(const SolveRequest& r, const SolvePoint& p) {
  DecoderPolicy pol = r.policy;
  pol.radius = p.radius;
  if (r.scheme == Scheme::known_ka) pol.estimator = Estimator::oracle;
  const auto cfg = SystemConfig::from_ebn0(r.n, r.k, p.ebn0_db, p.ratio);
  return sampr_bound(cfg, r.activity, pol, {p.slots, r.slot_index_coding}, r.qpolicy, r.options).worst();
}

}  // namespace

TEST(Solver, SchemeNames) {
  for (Scheme s : {Scheme::theorem1, Scheme::known_ka, Scheme::sampr})
    EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_THROW(scheme_from_string("bogus"), ConfigError);
}

TEST(Solver, ValidatesRequest) {
  SolveRequest r = small_request(Scheme::theorem1);
  r.target = 1.5;
  EXPECT_THROW(required_ebn0(r), ConfigError);
  r = small_request(Scheme::theorem1);
  r.low_db = r.high_db;
  EXPECT_THROW(required_ebn0(r), ConfigError);
  r = small_request(Scheme::theorem1);
  r.ratio_grid = {1.2};
  EXPECT_THROW(optimize_knobs(r, 3.0), ConfigError);
}

TEST(Solver, KnobSearchBeatsEveryGridCell) {
  const SolveRequest r = small_request(Scheme::theorem1);
  const SolvePoint best = optimize_knobs(r, 4.0);
  EXPECT_NEAR(worst_at(r, best), best.worst(), 1e-15);
  for (int radius : r.radii)
    for (double ratio : r.ratio_grid) {
      SolvePoint p = best;
      p.radius = radius;
      p.ratio = ratio;
      EXPECT_LE(best.worst(), worst_at(r, p)) << radius << " " << ratio;
    }
}

TEST(Solver, KnownCountBracketsTheTarget) {
  const SolveRequest r = small_request(Scheme::known_ka);
  const SolveResult s = required_ebn0(r);
  EXPECT_TRUE(s.point.feasible);
  EXPECT_LE(s.point.worst(), r.target);
  EXPECT_FALSE(s.below.feasible);
  EXPECT_LE(s.ebn0_db - s.below.ebn0_db, r.tolerance_db);
  EXPECT_FALSE(s.monotonicity_violated);
  EXPECT_NEAR(worst_at(r, s.point), s.point.worst(), 1e-15);
}

TEST(Solver, UnknownCountNeedsMorePower) {
  const SolveResult known = required_ebn0(small_request(Scheme::known_ka));
  const SolveResult full = required_ebn0(small_request(Scheme::theorem1));
  EXPECT_GE(full.ebn0_db, known.ebn0_db - 0.05);
  EXPECT_TRUE(full.point.feasible);
}

TEST(Solver, SlottedSchemeChoosesAmongSlots) {
  SolveRequest r = small_request(Scheme::sampr);
  const SolvePoint p = optimize_knobs(r, 6.0);
  EXPECT_TRUE(p.slots == 1 || p.slots == 2 || p.slots == 4);
  EXPECT_NEAR(worst_at(r, p), p.worst(), 1e-15);
}

TEST(Solver, BracketExhaustedReportsBest) {
  SolveRequest r = small_request(Scheme::theorem1);
  r.n = 16;
  r.k = 8;
  r.activity = truncate_activity(PoissonActivity{2}, 0.3);
  r.target = 0.01;
  r.low_db = 0.0;
  r.high_db = 1.0;
  r.max_expansions = 1;
  try {
    required_ebn0(r);
    FAIL() << "expected BracketExhausted";
  } catch (const BracketExhausted& e) {
    EXPECT_NE(std::string(e.what()).find("bracket exhausted"), std::string::npos);
    EXPECT_GT(e.best().worst(), r.target);
  }
}
