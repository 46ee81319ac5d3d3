#pragma once

#include <cmath>
#include <vector>

#include "rcu/model.hpp"
#include "rcu/numerics.hpp"

namespace rcu {

/// Which competitor the count-estimation penalty is measured against.
enum class XiMode {
  /// Pairwise event against the true count K_a (min-over-counts when K_a' = K_a).
  versus_true_count,
  /// Minimum over every competitor K in the truncation window.
  min_over_counts,
};

inline const char* to_string(XiMode m) {
  return m == XiMode::versus_true_count ? "versus_true_count" : "min_over_counts";
}

/// Threshold of the ML count metric, scaled by the received-energy variance.
inline double zeta_ml(int k, int ka, int ka_prime, double pprime, int n) {
  if (k == ka_prime) throw std::domain_error("zeta_ml: K must differ from K_a'");
  const double vk = 1.0 + k * pprime;
  const double vp = 1.0 + ka_prime * pprime;
  return n * std::log(vk / vp) / (1.0 + ka * pprime) / (1.0 / vp - 1.0 / vk);
}

/// Limit of zeta_ml as P' grows without bound.
inline double zeta_ml_asymptotic(int k, int ka, int ka_prime, int n) {
  if (k == ka_prime) throw std::domain_error("zeta_ml: K must differ from K_a'");
  if (ka == 0) return kInf;
  if (k == 0 || ka_prime == 0) return 0.0;
  const double kd = k, pd = ka_prime;
  return n * std::log(kd / pd) / ka / (1.0 / pd - 1.0 / kd);
}

inline double zeta_energy(int k, int ka, int ka_prime, double pprime, int n) {
  return n / (1.0 + ka * pprime) * (1.0 + 0.5 * (k + ka_prime) * pprime);
}

inline double zeta_energy_asymptotic(int k, int ka, int ka_prime, int n) {
  if (ka == 0) return kInf;
  return n * (k + ka_prime) / (2.0 * ka);
}

/// P[m(y0, K_a') < m(y0, K)] for y0 ~ CN(0, (1 + K_a P') I_n).
inline double xi_pairwise(Estimator est, int k, int ka, int ka_prime, double pprime, int n,
                          bool asymptotic = false) {
  if (est == Estimator::oracle) return ka_prime == ka ? 1.0 : 0.0;
  double zeta = 0.0;
  if (est == Estimator::ml) {
    zeta = asymptotic ? zeta_ml_asymptotic(k, ka, ka_prime, n) : zeta_ml(k, ka, ka_prime, pprime, n);
  } else {
    zeta = asymptotic ? zeta_energy_asymptotic(k, ka, ka_prime, n) : zeta_energy(k, ka, ka_prime, pprime, n);
  }
  zeta = std::max(zeta, 0.0);
  return k < ka_prime ? reg_gamma_upper(n, zeta) : reg_gamma_lower(n, zeta);
}

struct XiSettings {
  Estimator estimator = Estimator::ml;
  XiMode mode = XiMode::versus_true_count;
  bool asymptotic = false;
};

/// Estimation penalty for true count K_a and estimate K_a' with competitors in [k_low, k_high].
inline double xi(int ka, int ka_prime, int k_low, int k_high, const XiSettings& s, double pprime, int n) {
  if (s.estimator == Estimator::oracle) return ka_prime == ka ? 1.0 : 0.0;
  if (s.mode == XiMode::versus_true_count && ka != ka_prime && ka >= k_low && ka <= k_high)
    return xi_pairwise(s.estimator, ka, ka, ka_prime, pprime, n, s.asymptotic);
  double best = 1.0;
  for (int k = k_low; k <= k_high; ++k) {
    if (k == ka_prime) continue;
    best = std::min(best, xi_pairwise(s.estimator, k, ka, ka_prime, pprime, n, s.asymptotic));
  }
  return best;
}

/// xi over the truncation window, indexed [K_a - K_l][K_a' - K_l].
class XiTable {
 public:
  XiTable(int k_low, int k_high, const XiSettings& s, double pprime, int n)
      : k_low_(k_low), width_(k_high - k_low + 1), values_(static_cast<std::size_t>(width_ * width_)) {
    for (int a = k_low; a <= k_high; ++a)
      for (int b = k_low; b <= k_high; ++b) values_[index(a, b)] = xi(a, b, k_low, k_high, s, pprime, n);
  }

  double operator()(int ka, int ka_prime) const { return values_[index(ka, ka_prime)]; }

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>((a - k_low_) * width_ + (b - k_low_)); }
  int k_low_;
  int width_;
  std::vector<double> values_;
};

}  // namespace rcu
