#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rcu/model.hpp"
#include "rcu/numerics.hpp"

namespace rcu {

/// Everything the exponent terms need about one (K_a, list window) pair.
struct ExponentContext {
  int n = 0;
  int ka = 0;
  ListWindow window;
  double pprime = 0.0;
  CodebookSize codebook{1};

  ExponentContext(int n_, int ka_, ListWindow w, double pprime_, CodebookSize m)
      : n(n_), ka(ka_), window(w), pprime(pprime_), codebook(m) {}

  int missed() const { return forced_misses(ka, window); }
  int extra() const { return forced_false_alarms(ka, window); }
  double p2() const { return 1.0 + (missed() + extra()) * pprime; }

  /// ln C(M - max(K_a, lower), t'), i.e. n t' R1.
  double ln_c1(int tp) const {
    return ln_binomial(codebook.minus(std::max(ka, window.lower)), static_cast<std::uint64_t>(tp)).value.value();
  }
  /// ln C(min(K_a, upper), t), i.e. n R2.
  double ln_c2(int t) const {
    return ln_binomial(static_cast<std::uint64_t>(std::min(ka, window.upper)), static_cast<std::uint64_t>(t))
        .value();
  }
};

/// Inner objective of E0 at fixed (t, t', rho, rho1), as a function of lambda.
struct E0Objective {
  double pprime, p2;
  int t, tp;
  double rho, rho1;

  double mu(double lambda) const { return rho * lambda / (1.0 + pprime * tp * lambda); }
  double a(double lambda) const {
    return rho * std::log1p(pprime * tp * lambda) + std::log1p(pprime * t * mu(lambda));
  }
  double b(double lambda) const {
    const double m = mu(lambda);
    return rho * lambda - m / (1.0 + pprime * t * m);
  }
  /// -inf outside the feasible set.
  double operator()(double lambda) const {
    if (!(lambda > 0.0)) return kNegInf;
    const double arg = 1.0 - rho1 * p2 * b(lambda);
    if (!(arg > 0.0)) return kNegInf;
    return rho1 * a(lambda) + std::log(arg);
  }

  /// Stationarity cubic in lambda.
  Cubic stationarity() const {
    const double p3 = (tp + rho * t) * pprime;
    const double tpp = tp * pprime;
    const double rr = rho * rho1;
    Cubic c;
    c.c1 = -rr * (rr + 1.0) * tpp * p2 * p3 * p3;
    c.c2 = rr * tpp * p3 * p3 - rr * (2.0 - rho1 + rr) * tpp * p2 * p3 - rr * (rho1 + 1.0) * p2 * p3 * p3;
    c.c3 = (2.0 * rho - 1.0) * rho1 * tpp * p3 + rho1 * p3 * p3 - 2.0 * rr * p2 * p3;
    c.c4 = (rho - 1.0) * rho1 * tpp + rho1 * p3;
    return c;
  }
};

struct E0Value {
  double value = 0.0;
  double lambda = 0.0;
  bool from_root = true;
};

namespace detail {

template <class F>
double golden_max(F&& f, double lo, double hi, double tol, double* arg_out = nullptr) {
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  if (arg_out) *arg_out = f1 >= f2 ? x1 : x2;
  return std::max(f1, f2);
}

}  // namespace detail

/// Line search over lambda, used when no stationary point is feasible.
inline E0Value e0_line_search(const E0Objective& obj) {
  double hi = 1.0 / std::max(obj.pprime, 1e-300);
  for (int i = 0; i < 200 && obj(hi) > kNegInf; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (obj(mid) > kNegInf) lo = mid; else hi = mid;
  }
  double arg = 0.0;
  const double v = detail::golden_max(obj, 0.0, lo, lo * 1e-12, &arg);
  return {std::max(v, 0.0), arg, false};
}

/// sup over lambda > 0; the lambda -> 0 limit contributes the value 0.
inline E0Value e0_solve(const E0Objective& obj) {
  if (obj.rho == 0.0 || obj.rho1 == 0.0 || (obj.t == 0 && obj.tp == 0)) return {0.0, 0.0, true};
  const Cubic c = obj.stationarity();
  E0Value best{kNegInf, 0.0, true};
  if (c.c1 != 0.0 || c.c2 != 0.0 || c.c3 != 0.0) {
    for (double r : real_roots(c)) {
      const double v = obj(r);
      if (v > best.value) best = {v, r, true};
    }
  }
  if (best.value == kNegInf) return e0_line_search(obj);
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

inline double e0(const ExponentContext& ctx, int t, int tp, double rho, double rho1) {
  return e0_solve({ctx.pprime, ctx.p2(), t, tp, rho, rho1}).value;
}

/// Objective of E(t,t') at a fixed (rho, rho1); any such value lower-bounds E(t,t').
inline double exponent_at(const ExponentContext& ctx, int t, int tp, double rho, double rho1) {
  if (t == 0 && tp == 0) return 0.0;
  const double base = -rho * rho1 * ctx.ln_c1(tp) / ctx.n - rho1 * ctx.ln_c2(t) / ctx.n;
  if (rho == 0.0 || rho1 == 0.0) return base;
  return base + e0_solve({ctx.pprime, ctx.p2(), t, tp, rho, rho1}).value;
}

struct ExponentPoint {
  double value = 0.0;
  double rho = 0.0;
  double rho1 = 0.0;
};

/// E(t,t') by a 21x21 grid followed by coordinate-wise golden refinement.
inline ExponentPoint optimize_exponent(const ExponentContext& ctx, int t, int tp) {
  if (t == 0 && tp == 0) return {};
  const double c1 = ctx.ln_c1(tp) / ctx.n;
  const double c2 = ctx.ln_c2(t) / ctx.n;
  const double pp = ctx.pprime;
  const double p2 = ctx.p2();
  auto g = [&](double rho, double rho1) {
    if (rho == 0.0 || rho1 == 0.0) return -rho1 * c2;
    return -rho * rho1 * c1 - rho1 * c2 + e0_solve({pp, p2, t, tp, rho, rho1}).value;
  };

  ExponentPoint best{0.0, 0.0, 0.0};
  constexpr int kGrid = 20;
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j <= kGrid; ++j) {
      const double rho = i / double(kGrid), rho1 = j / double(kGrid);
      const double v = g(rho, rho1);
      if (v > best.value) best = {v, rho, rho1};
    }
  }
  constexpr double half = 0.05;
  constexpr double tol = 1e-4;
  for (int round = 0; round < 2; ++round) {
    double arg = best.rho;
    double v = detail::golden_max([&](double r) { return g(r, best.rho1); }, std::max(0.0, best.rho - half),
                                  std::min(1.0, best.rho + half), tol, &arg);
    if (v > best.value) best = {v, arg, best.rho1};
    arg = best.rho1;
    v = detail::golden_max([&](double r1) { return g(best.rho, r1); }, std::max(0.0, best.rho1 - half),
                           std::min(1.0, best.rho1 + half), tol, &arg);
    if (v > best.value) best = {v, best.rho, arg};
  }
  return best;
}

inline double exponent_E(const ExponentContext& ctx, int t, int tp) { return optimize_exponent(ctx, t, tp).value; }

/// ln p_{t,t'} = -n E(t,t').
inline LogWeight ln_p_tt(const ExponentContext& ctx, int t, int tp) {
  return LogWeight(-ctx.n * exponent_E(ctx, t, tp));
}

/// ln p_t, summing p_{t,t'} over the unconstrained false-alarm range.
inline LogWeight ln_p_t(const ExponentContext& ctx, int t) {
  LogWeight acc = LogWeight::zero();
  for (int tp : set_Tbar_t(ctx.ka, ctx.window, t, ctx.codebook)) acc += ln_p_tt(ctx, t, tp);
  return acc;
}

}  // namespace rcu
