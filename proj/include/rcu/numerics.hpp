#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace rcu {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Natural-log representation of a nonnegative weight; -inf encodes zero.
class LogWeight {
 public:
  constexpr LogWeight() = default;
  constexpr explicit LogWeight(double log_value) : value_(log_value) {}

  static constexpr LogWeight zero() { return LogWeight(kNegInf); }
  static constexpr LogWeight one() { return LogWeight(0.0); }
  static LogWeight from_probability(double p) { return LogWeight(std::log(p)); }

  constexpr double value() const { return value_; }
  double probability() const { return std::exp(value_); }
  constexpr bool is_zero() const { return value_ == kNegInf; }

  friend LogWeight operator*(LogWeight a, LogWeight b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogWeight(a.value_ + b.value_);
  }
  friend LogWeight operator+(LogWeight a, LogWeight b) {
    if (a.value_ < b.value_) std::swap(a, b);
    if (b.is_zero()) return a;
    return LogWeight(a.value_ + std::log1p(std::exp(b.value_ - a.value_)));
  }
  LogWeight& operator+=(LogWeight other) { return *this = *this + other; }
  friend constexpr bool operator<(LogWeight a, LogWeight b) { return a.value_ < b.value_; }
  friend constexpr bool operator==(LogWeight a, LogWeight b) = default;

 private:
  double value_ = kNegInf;
};

inline double log_sum_exp(double a, double b) {
  return (LogWeight(a) + LogWeight(b)).value();
}

namespace detail {

// lgamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2]
inline double stirling_correction(double a) {
  if (a >= 10.0) {
    const double r = 1.0 / a;
    const double r2 = r * r;
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))));
  }
  return std::lgamma(a) - ((a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * std::numbers::pi));
}

// u - ln(1 + u), accurate near u = 0.
inline double log1pmx_neg(double u) {
  if (std::abs(u) < 0.1) {
    // alternating series u^2/2 - u^3/3 + ...
    double term = u * u;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      const double contrib = term / k;
      sum += (k % 2 == 0) ? contrib : -contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
      term *= u;
    }
    return sum;
  }
  return u - std::log1p(u);
}

// x^a e^{-x} / Gamma(a), in log form.
inline double log_gamma_prefix(double a, double x) {
  if (x == 0.0) return kNegInf;
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double u = (x - a) / a;
  return -a * log1pmx_neg(u) + 0.5 * std::log(a / (2.0 * std::numbers::pi)) - stirling_correction(a);
}

inline void check_gamma_domain(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("incomplete gamma: require shape > 0 and x >= 0");
}

// P(a,x) by power series; valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(log_gamma_prefix(a, x)) * sum;
}

// Q(a,x) by modified Lentz continued fraction; valid for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_gamma_prefix(a, x)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double reg_gamma_upper(double shape, double x) {
  detail::check_gamma_domain(shape, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < shape + 1.0) return 1.0 - detail::gamma_p_series(shape, x);
  return detail::gamma_q_fraction(shape, x);
}

/// Regularized lower incomplete gamma P(a, x).
inline double reg_gamma_lower(double shape, double x) {
  detail::check_gamma_domain(shape, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < shape + 1.0) return detail::gamma_p_series(shape, x);
  return 1.0 - detail::gamma_q_fraction(shape, x);
}

/// A count that is either a machine integer or known only through its logarithm.
class Count {
 public:
  static Count exact(std::uint64_t v) { return Count(v, v == 0 ? kNegInf : std::log(static_cast<double>(v)), true); }
  static Count from_log(double ln_value) { return Count(0, ln_value, false); }

  bool is_exact() const { return exact_; }
  std::uint64_t value() const {
    if (!exact_) throw std::logic_error("Count::value on a log-only count");
    return value_;
  }
  double log() const { return log_; }

 private:
  Count(std::uint64_t v, double l, bool e) : value_(v), log_(l), exact_(e) {}
  std::uint64_t value_;
  double log_;
  bool exact_;
};

struct BinomialLog {
  LogWeight value;
  bool upper_bound = false;
};

/// Exact ln C(n, k); -inf when k > n.
inline LogWeight ln_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return LogWeight::zero();
  k = std::min(k, n - k);
  if (k <= 2000) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < k; ++i)
      s += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
    return LogWeight(s);
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return LogWeight(std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1));
}

/// ln C(n, k) for a possibly log-only n. Log-only n gives k ln n - ln k!, flagged as an upper bound.
inline BinomialLog ln_binomial(const Count& n, std::uint64_t k) {
  if (n.is_exact()) return {ln_binomial(n.value(), k), false};
  if (k == 0) return {LogWeight::one(), false};
  const double kd = static_cast<double>(k);
  return {LogWeight(kd * n.log() - std::lgamma(kd + 1)), true};
}

/// ln of the Poisson probability mass at k.
inline LogWeight ln_poisson_pmf(double mean, std::uint64_t k) {
  if (!(mean > 0.0)) throw std::domain_error("poisson mean must be positive");
  const double kd = static_cast<double>(k);
  return LogWeight(kd * std::log(mean) - mean - std::lgamma(kd + 1));
}

/// c1 x^3 + c2 x^2 + c3 x + c4
struct Cubic {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;

  double operator()(double x) const { return ((c1 * x + c2) * x + c3) * x + c4; }
  double derivative(double x) const { return (3 * c1 * x + 2 * c2) * x + c3; }
  double max_abs_coefficient() const {
    return std::max({std::abs(c1), std::abs(c2), std::abs(c3), std::abs(c4)});
  }
};

struct RealRoots {
  std::array<double, 3> values{};
  int count = 0;

  const double* begin() const { return values.data(); }
  const double* end() const { return values.data() + count; }
};

namespace detail {

inline double newton_polish(const Cubic& c, double x) {
  for (int i = 0; i < 3; ++i) {
    const double fx = c(x);
    const double d = c.derivative(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - fx / d;
    if (!std::isfinite(next) || std::abs(c(next)) >= std::abs(fx)) break;
    x = next;
  }
  return x;
}

}  // namespace detail

/// All real roots in ascending order. Throws on the all-zero polynomial.
inline RealRoots real_roots(const Cubic& c) {
  RealRoots out;
  auto push = [&](double r) { out.values[out.count++] = r; };
  if (c.c1 == 0.0) {
    if (c.c2 == 0.0) {
      if (c.c3 == 0.0) throw std::domain_error("degenerate polynomial");
      push(-c.c4 / c.c3);
      return out;
    }
    const double disc = c.c3 * c.c3 - 4 * c.c2 * c.c4;
    if (disc < 0) return out;
    const double q = -0.5 * (c.c3 + std::copysign(std::sqrt(disc), c.c3));
    double r1 = q / c.c2;
    double r2 = q != 0.0 ? c.c4 / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    push(r1);
    push(r2);
    return out;
  }

  const double a = c.c2 / c.c1;
  const double b = c.c3 / c.c1;
  const double d = c.c4 / c.c1;
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  if (disc > 0.0) {
    const double big = -std::copysign(std::cbrt(std::abs(q) / 2.0 + std::sqrt(disc)), q);
    const double y = big != 0.0 ? big - p / (3.0 * big) : 0.0;
    push(detail::newton_polish(c, y - shift));
    return out;
  }
  if (p == 0.0) {
    push(detail::newton_polish(c, -shift));
    return out;
  }
  const double m = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;
  for (int k = 0; k < 3; ++k)
    push(detail::newton_polish(c, m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift));
  std::sort(out.values.begin(), out.values.begin() + out.count);
  return out;
}

inline double largest_real_root(const Cubic& c) {
  const RealRoots roots = real_roots(c);
  if (roots.count == 0) throw std::domain_error("polynomial has no real root");
  return roots.values[roots.count - 1];
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic random stream keyed by (seed, stream_id).
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::uint64_t state = seed ^ (stream_id * 0xd1342543de82ef95ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(detail::splitmix64(state)),
                      static_cast<std::uint32_t>(detail::splitmix64(state)),
                      static_cast<std::uint32_t>(detail::splitmix64(state)),
                      static_cast<std::uint32_t>(detail::splitmix64(state))};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }
  double gamma(double shape) {
    return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
  }
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::gamma_distribution<double> gamma_;
};

}  // namespace rcu
