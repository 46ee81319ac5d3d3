#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "e0_grid.hpp"
#include "rcu/exponents.hpp"

using namespace rcu;

namespace {

struct E0Case {
  E0Objective obj;
  double value;
};

// sup over lambda from scripts/oracles.py.
const E0Case kE0[] = {
    {{0.05, 1.0, 1, 1, 1.0, 1.0}, 0.024692612590371502},
    {{0.05, 1.1, 1, 2, 0.6, 0.8}, 0.018575536584077337},
    {{0.02, 1.06, 2, 3, 0.3, 0.5}, 0.0048482286501584233},
    {{0.5, 2.0, 3, 0, 0.7, 0.9}, 0.15569763994212292},
    {{0.1, 1.0, 0, 2, 0.9, 0.4}, 0.017827570593769825},
};

ExponentContext fig_context(double db) {
  const auto s = SystemConfig::from_ebn0(19200, 128, db, 0.97);
  return ExponentContext(s.n, 50, {50, 50}, s.codebook_power, s.codebook());
}

}  // namespace

TEST(E0, MatchesReference) {
  for (const auto& c : kE0) EXPECT_NEAR(e0_solve(c.obj).value, c.value, 1e-10) << c.obj.t << " " << c.obj.tp;
  EXPECT_NEAR(e0_solve(kE0[0].obj).lambda, 0.5, 1e-9);
}

TEST(E0, TrivialCollapses) {
  EXPECT_DOUBLE_EQ(e0_solve({0.1, 1.2, 0, 0, 0.5, 0.5}).value, 0.0);
  EXPECT_DOUBLE_EQ(e0_solve({0.1, 1.2, 2, 3, 0.0, 0.5}).value, 0.0);
  const auto ctx = fig_context(4.0);
  EXPECT_DOUBLE_EQ(exponent_E(ctx, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ln_p_tt(ctx, 0, 0).probability(), 1.0);
}

TEST(E0, CubicRootMatchesGrid) {
  SeededStream rng(2024, 5);
  for (int i = 0; i < 60; ++i) {
    const E0Objective o = reference::random_e0(rng);
    const double grid = reference::e0_by_grid(o);
    const double cubic = e0_solve(o).value;
    EXPECT_NEAR(cubic, grid, 1e-6) << i;
    EXPECT_GE(cubic, grid - 1e-12) << i;
  }
}

TEST(Exponent, NonNegativeAndRefinedAboveGrid) {
  const CodebookSize m(128);
  for (double db : {0.0, 2.0, 6.0}) {
    const auto s = SystemConfig::from_ebn0(19200, 128, db, 0.9);
    for (ListWindow w : {ListWindow{50, 50}, ListWindow{48, 52}, ListWindow{53, 55}}) {
      const ExponentContext ctx(s.n, 50, w, s.codebook_power, m);
      for (int t : set_T(50, w, m))
        for (int tp : set_Tbar_t(50, w, t, m)) {
          if (t > 4) continue;
          const ExponentPoint p = optimize_exponent(ctx, t, tp);
          EXPECT_GE(p.value, 0.0);
          EXPECT_NEAR(p.value, exponent_at(ctx, t, tp, p.rho, p.rho1), 1e-12);
          for (double r : {0.25, 0.5, 1.0})
            for (double r1 : {0.25, 0.5, 1.0}) EXPECT_GE(p.value, exponent_at(ctx, t, tp, r, r1) - 1e-12);
        }
    }
  }
}

TEST(Exponent, OperatingPointMagnitudes) {
  const auto ctx = fig_context(4.0);
  const double p = ln_p_tt(ctx, 1, 1).probability();
  EXPECT_LE(p, 1e-2);
  EXPECT_GT(p, 0.0);
}

TEST(Exponent, LongerFramesNeverHurt) {
  const auto s = SystemConfig::from_ebn0(19200, 128, 2.0, 0.95);
  const ExponentContext a(s.n, 50, {50, 50}, s.codebook_power, s.codebook());
  const ExponentContext b(2 * s.n, 50, {50, 50}, s.codebook_power, s.codebook());
  for (int t = 1; t <= 5; ++t) EXPECT_LE(ln_p_tt(b, t, t).value(), ln_p_tt(a, t, t).value());
}

TEST(Exponent, StableRateForm) {
  const auto s = SystemConfig::from_ebn0(19200, 128, 2.0, 0.95);
  const ExponentContext ctx(s.n, 50, {48, 52}, s.codebook_power, s.codebook());
  for (int tp = 1; tp <= 6; ++tp)
    EXPECT_NEAR(ctx.ln_c1(tp) / (ctx.n * tp),
                (128 * std::numbers::ln2) / ctx.n - std::lgamma(tp + 1.0) / (ctx.n * tp), 1e-12);
}

TEST(Exponent, PtSumsOverFalseAlarms) {
  const auto ctx = fig_context(2.0);
  for (int t = 0; t <= 4; ++t) EXPECT_DOUBLE_EQ(ln_p_t(ctx, t).value(), ln_p_tt(ctx, t, t).value());
  EXPECT_DOUBLE_EQ(ln_p_t(ctx, 0).probability(), 1.0);
  const ExponentContext wide(ctx.n, 50, {48, 52}, ctx.pprime, ctx.codebook);
  for (int t = 1; t <= 3; ++t) {
    LogWeight acc = LogWeight::zero();
    for (int tp : set_Tbar_t(50, wide.window, t, wide.codebook)) acc += ln_p_tt(wide, t, tp);
    EXPECT_DOUBLE_EQ(ln_p_t(wide, t).value(), acc.value());
  }
}
