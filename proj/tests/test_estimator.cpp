#include <gtest/gtest.h>

#include <cmath>

#include "rcu/estimator.hpp"

using namespace rcu;

namespace {

constexpr int kN = 19200;
constexpr double kPprime = 0.008141050996268948;  // 0.97 P at 1 dB, k = 128

struct XiCase {
  int k, ka, kp;
  double ml, energy;
};

const XiCase kXi[] = {
    {50, 50, 51, 0.34380228905725879, 0.34351922687679455},
    {49, 50, 50, 0.65528033439848468, 0.65499415507172078},
    {51, 50, 50, 0.65619771094274121, 0.65648077312320545},
    {45, 45, 50, 0.020862899373202252, 0.019879500338577156},
    {55, 55, 50, 0.024223459137184272, 0.025307270762652292},
    {50, 52, 49, 0.023336693639908205, 0.023379414539248545},
};

double metric(Estimator e, double energy, int k) {
  const double v = 1.0 + k * kPprime;
  return e == Estimator::ml ? energy / v + kN * std::log(v) : std::abs(energy - kN * v);
}

}  // namespace

TEST(Zeta, MlRequiresDistinctCounts) {
  EXPECT_THROW(zeta_ml(5, 5, 5, 0.1, 10), std::domain_error);
  EXPECT_TRUE(std::isfinite(zeta_ml(4, 5, 5, 0.1, 10)));
}

TEST(Zeta, EnergyCollapses) {
  EXPECT_DOUBLE_EQ(zeta_energy(7, 7, 7, 0.0, 300), 300.0);
  EXPECT_DOUBLE_EQ(zeta_energy(7, 3, 5, 0.0, 300), 300.0);
}

TEST(Zeta, LargePowerLimits) {
  for (auto [k, ka, kp] : {std::tuple{3, 4, 5}, {9, 4, 5}, {50, 52, 49}}) {
    EXPECT_NEAR(zeta_ml(k, ka, kp, 1e7, kN) / zeta_ml_asymptotic(k, ka, kp, kN), 1.0, 1e-5);
    EXPECT_NEAR(zeta_energy(k, ka, kp, 1e9, kN) / zeta_energy_asymptotic(k, ka, kp, kN), 1.0, 1e-7);
  }
  EXPECT_NEAR(zeta_energy_asymptotic(4, 6, 8, 100), 100.0, 1e-12);
}

TEST(Zeta, SwapChangesValue) {
  // Independent transcription: ln(vk/vp) / (1/vp - 1/vk) is symmetric, the K_a factor is not.
  const double a = zeta_ml(48, 50, 52, kPprime, kN), b = zeta_ml(52, 50, 48, kPprime, kN);
  EXPECT_NEAR(a, b, 1e-9 * a);
  const double vk = 1 + 48 * kPprime, vp = 1 + 52 * kPprime;
  EXPECT_NEAR(a, kN * std::log(vp / vk) / (1 + 50 * kPprime) / (1 / vk - 1 / vp), 1e-9 * a);
}

TEST(Xi, PairwiseMatchesReference) {
  for (const auto& c : kXi) {
    EXPECT_NEAR(xi_pairwise(Estimator::ml, c.k, c.ka, c.kp, kPprime, kN) / c.ml, 1.0, 1e-9);
    EXPECT_NEAR(xi_pairwise(Estimator::energy, c.k, c.ka, c.kp, kPprime, kN) / c.energy, 1.0, 1e-9);
  }
}

TEST(Xi, EmptyCandidateSetIsVacuous) {
  XiSettings s;
  EXPECT_DOUBLE_EQ(xi(7, 7, 7, 7, s, kPprime, kN), 1.0);
  s.mode = XiMode::min_over_counts;
  EXPECT_DOUBLE_EQ(xi(7, 7, 7, 7, s, kPprime, kN), 1.0);
}

TEST(Xi, DiagonalIsSmallAndFarIsTiny) {
  XiSettings s;
  // Correct estimate: the vacuous pairwise event falls back to the nearest competitors.
  const double diag = xi(50, 50, 13, 98, s, kPprime, kN);
  EXPECT_NEAR(diag, 0.65528033439848468, 1e-9);
  s.mode = XiMode::min_over_counts;
  EXPECT_DOUBLE_EQ(xi(50, 50, 13, 98, s, kPprime, kN), diag);
  s.mode = XiMode::versus_true_count;
  for (Estimator e : {Estimator::ml, Estimator::energy}) {
    s.estimator = e;
    for (int d : {-8, -5, 5, 8}) EXPECT_LT(xi(50, 50 + d, 13, 98, s, 2.0, kN), 1e-10) << d;
  }
}

TEST(Xi, OracleIsIndicator) {
  XiSettings s{Estimator::oracle};
  EXPECT_DOUBLE_EQ(xi(4, 4, 1, 9, s, kPprime, kN), 1.0);
  EXPECT_DOUBLE_EQ(xi(4, 5, 1, 9, s, kPprime, kN), 0.0);
}

TEST(Xi, TableEntriesAreProbabilities) {
  const XiTable t(40, 60, XiSettings{}, kPprime, kN);
  for (int a = 40; a <= 60; ++a)
    for (int b = 40; b <= 60; ++b) {
      EXPECT_GE(t(a, b), 0.0);
      EXPECT_LE(t(a, b), 1.0);
      EXPECT_DOUBLE_EQ(t(a, b), xi(a, b, 40, 60, XiSettings{}, kPprime, kN));
    }
}

TEST(Xi, MonteCarloAgreement) {
  // ||y0||^2 for y0 ~ CN(0, v I_n) is v times a Gamma(n, 1) variable.
  constexpr int kDraws = 20000;
  for (Estimator e : {Estimator::ml, Estimator::energy}) {
    for (const auto& c : kXi) {
      SeededStream rng(11, static_cast<std::uint64_t>(c.k * 1000 + c.kp));
      int hits = 0;
      for (int i = 0; i < kDraws; ++i) {
        const double energy = (1 + c.ka * kPprime) * rng.gamma(kN);
        hits += metric(e, energy, c.kp) < metric(e, energy, c.k);
      }
      const double p = xi_pairwise(e, c.k, c.ka, c.kp, kPprime, kN);
      const double sigma = std::sqrt(p * (1 - p) / kDraws);
      EXPECT_NEAR(hits / double(kDraws), p, 4 * sigma) << to_string(e) << " " << c.k << " " << c.kp;
    }
  }
}
