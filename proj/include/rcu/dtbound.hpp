#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "rcu/exponents.hpp"
#include "rcu/model.hpp"
#include "rcu/numerics.hpp"

namespace rcu {

using cplx = std::complex<double>;

inline double squared_norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return s;
}

/// Conditional information density of the candidate input c_W0 given the remaining codewords.
inline double info_density(const ExponentContext& ctx, int t, std::span<const cplx> y, std::span<const cplx> c_w0,
                           std::span<const cplx> c_rest) {
  const double scale = 1.0 + (t + ctx.missed()) * ctx.pprime;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx r = y[i] - c_rest[i];
    num += std::norm(r);
    den += std::norm(r - c_w0[i]);
  }
  return ctx.n * std::log(scale) + num / scale - den;
}

/// Monte-Carlo realizations of the statistic I_t. Only the prefix of smallest values that a
/// query can reach is ever sorted.
class EcdfTable {
 public:
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  EcdfTable() = default;
  explicit EcdfTable(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }

  /// Empirical P[I <= x].
  double cdf(double x) const {
    const double n = static_cast<double>(values_.size());
    if (values_.empty()) return 0.0;
    // Grow the sorted prefix until it passes x.
    std::size_t k = std::max<std::size_t>(sorted_, 64);
    while (true) {
      k = std::min(k, values_.size());
      ensure_sorted(k);
      if (k == values_.size() || values_[k - 1] > x) break;
      k *= 2;
    }
    const auto it = std::upper_bound(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(k), x);
    return static_cast<double>(it - values_.begin()) / n;
  }

  /// min{cap, inf over gamma of P_hat[I <= gamma] + exp(log_mass - gamma)}, never above 1.
  /// Points whose empirical cdf already reaches cap cannot improve on it and are skipped.
  double dt_infimum(double log_mass, double cap = 1.0) const {
    if (values_.empty()) return std::min(cap, 1.0);
    cap = std::min(cap, 1.0);
    const double n = static_cast<double>(values_.size());
    const auto reach = static_cast<std::size_t>(std::min(n, std::ceil(cap * n)));
    ensure_sorted(reach);
    double best = cap;
    // Just below values_[i] the empirical cdf equals i / n (first index of each tie group).
    for (std::size_t i = 0; i < reach; ++i) {
      if (static_cast<double>(i) / n >= best) break;
      if (i > 0 && values_[i] == values_[i - 1]) continue;
      best = std::min(best, static_cast<double>(i) / n + std::exp(log_mass - values_[i]));
    }
    const double g = log_mass + std::log(n);
    if (reach > 0 && g < values_[reach - 1]) best = std::min(best, cdf(g) + 1.0 / n);
    return best;
  }

  /// Fully sorted copy of the realizations.
  std::vector<double> sorted() const {
    ensure_sorted(values_.size());
    return values_;
  }

 private:
  void ensure_sorted(std::size_t k) const {
    if (k <= sorted_) return;
    const auto first = values_.begin() + static_cast<std::ptrdiff_t>(sorted_);
    const auto mid = values_.begin() + static_cast<std::ptrdiff_t>(k);
    if (k < values_.size()) std::nth_element(first, mid, values_.end());
    std::sort(first, mid);
    sorted_ = k;
  }

  mutable std::vector<double> values_;
  mutable std::size_t sorted_ = 0;
};

enum class SamplingMethod {
  automatic,
  /// Exact reduction to the projection onto the aggregate direction (t = 1 only).
  projection,
  /// Exact Bartlett factor of the Gram matrix of all involved vectors (n > K_a + 1).
  wishart,
  /// Full n-dimensional vectors.
  direct,
};

namespace detail {

inline std::uint64_t combinations_count(int m, int t, std::uint64_t cap) {
  if (t < 0 || t > m) return 0;
  t = std::min(t, m - t);
  long double c = 1;
  for (int i = 0; i < t; ++i) {
    c = c * (m - i) / (i + 1);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(c + 0.5L);
}

template <class F>
void for_each_subset(int m, int t, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(std::span<const int>(idx));
    int i = t - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - t + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < t; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

/// Stream identifier for the (K_a, t) sampling lattice.
inline std::uint64_t density_stream_id(int ka, int t) {
  return (std::uint64_t{0x1d} << 56) | (static_cast<std::uint64_t>(ka) << 20) | static_cast<std::uint64_t>(t);
}

/// Standardized draws for the t = 1 projection path, shared by every K_a. Candidate
/// column j comes from its own stream, so a pool with more columns extends a smaller one.
class ProjectionPool {
 public:
  ProjectionPool(int n, int samples, std::uint64_t seed, int columns)
      : samples_(samples), columns_(columns) {
    const auto ns = static_cast<std::size_t>(samples);
    root_.resize(ns);
    w_re_.resize(ns);
    w_rest_.resize(ns);
    SeededStream base(seed, density_stream_id(0, 1));
    for (std::size_t s = 0; s < ns; ++s) {
      root_[s] = std::sqrt(base.gamma(n));
      const cplx h = base.complex_normal();
      w_re_[s] = h.real();
      w_rest_[s] = h.imag() * h.imag() + base.gamma(n - 1);
    }
    re_.resize(ns * static_cast<std::size_t>(columns));
    energy_.resize(re_.size());
    for (int j = 0; j < columns; ++j) {
      SeededStream rng(seed, density_stream_id(j + 1, 1));
      double* re = &re_[static_cast<std::size_t>(j) * ns];
      double* en = &energy_[static_cast<std::size_t>(j) * ns];
      for (std::size_t s = 0; s < ns; ++s) {
        const cplx g = rng.complex_normal();
        re[s] = g.real();
        en[s] = std::norm(g) + rng.gamma(n - 1);
      }
    }
  }

  int samples() const { return samples_; }
  int columns() const { return columns_; }
  /// sqrt of the aggregate energy Gamma(n).
  const double* root() const { return root_.data(); }
  const double* w_re() const { return w_re_.data(); }
  /// Im(h)^2 plus the orthogonal Gamma(n-1) energy of the false-alarm term.
  const double* w_rest() const { return w_rest_.data(); }
  const double* re(int j) const { return &re_[static_cast<std::size_t>(j) * static_cast<std::size_t>(samples_)]; }
  /// |g_j|^2 plus the orthogonal Gamma(n-1) energy of candidate j.
  const double* energy(int j) const {
    return &energy_[static_cast<std::size_t>(j) * static_cast<std::size_t>(samples_)];
  }

  /// Process-wide cache keyed by (n, samples, seed).
  static std::shared_ptr<const ProjectionPool> shared(int n, int samples, std::uint64_t seed, int columns) {
    static std::mutex guard;
    static std::map<std::tuple<int, int, std::uint64_t>, std::shared_ptr<const ProjectionPool>> cache;
    std::lock_guard lock(guard);
    auto& slot = cache[{n, samples, seed}];
    if (!slot || slot->columns() < columns) {
      const int grown = slot ? std::max(columns, 2 * slot->columns()) : std::max(columns, 64);
      slot = std::make_shared<const ProjectionPool>(n, samples, seed, grown);
    }
    return slot;
  }

 private:
  int samples_, columns_;
  std::vector<double> root_, w_re_, w_rest_, re_, energy_;
};

/// Draws standardized realizations for a (K_a, t) pair and rescales them for any
/// (forced misses, forced false alarms, P'). Reusing the draws across P' keeps the
/// resulting bound a deterministic function of the power.
class DensitySampler {
 public:
  DensitySampler(int n, int ka, int t, int samples, std::uint64_t seed,
                 SamplingMethod method = SamplingMethod::automatic)
      : n_(n), ka_(ka), t_(t), samples_(samples), seed_(seed), stream_id_(density_stream_id(ka, t)) {
    if (t < 1 || t > ka) throw std::invalid_argument("density sampler needs 1 <= t <= K_a");
    if (samples < 1) throw std::invalid_argument("density sampler needs at least one sample");
    if (method == SamplingMethod::automatic)
      method = t == 1 && n >= 2 ? SamplingMethod::projection
               : n > ka + 1     ? SamplingMethod::wishart
                                : SamplingMethod::direct;
    if (method == SamplingMethod::projection && (t != 1 || n < 2))
      throw std::invalid_argument("projection sampling needs t = 1 and n >= 2");
    if (method == SamplingMethod::wishart && n <= ka + 1) throw std::invalid_argument("wishart sampling needs n > K_a + 1");
    method_ = method;
    if (method_ == SamplingMethod::projection) {
      pool_ = ProjectionPool::shared(n, samples, seed, ka);
      stream_id_ = density_stream_id(0, 1);
    }
  }

  SamplingMethod method() const { return method_; }
  int samples() const { return samples_; }

  /// True when the subset enumeration of size t among the candidates stays within the cap.
  static bool within_cap(int candidates, int t, std::uint64_t cap) {
    return detail::combinations_count(candidates, t, cap) <= cap;
  }

  EcdfTable ecdf(int missed, int extra, double pprime) const {
    if (missed < 0 || missed > ka_ - t_) throw std::invalid_argument("density sampler: invalid forced misses");
    std::vector<double> values(static_cast<std::size_t>(samples_));
    const Scales s{std::sqrt(1.0 + missed * pprime), std::sqrt(pprime), std::sqrt(extra * pprime),
                   1.0 + (t_ + missed) * pprime, n_ * std::log1p((t_ + missed) * pprime), pprime, ka_ - missed};
    switch (method_) {
      case SamplingMethod::projection: fill_projection(s, values); break;
      case SamplingMethod::wishart: fill_wishart(s, values); break;
      default: fill_direct(s, values); break;
    }
    EcdfTable out(std::move(values));
    out.seed = seed_;
    out.stream_id = stream_id_;
    return out;
  }

 private:
  struct Scales {
    double u, v, w, denom, offset, pprime;
    int candidates;
  };

  void fill_projection(const Scales& sc, std::vector<double>& out) const {
    const std::size_t ns = out.size();
    const double* root = pool_->root();
    std::vector<double> best(ns, kInf);
    const double cross = 2.0 * sc.u * sc.v;
    for (int j = 0; j < sc.candidates; ++j) {
      const double* re = pool_->re(j);
      const double* en = pool_->energy(j);
      for (std::size_t s = 0; s < ns; ++s)
        best[s] = std::min(best[s], cross * root[s] * re[s] + sc.pprime * en[s]);
    }
    const double* wr = pool_->w_re();
    const double* wo = pool_->w_rest();
    const double ew = sc.w * sc.w;
    for (std::size_t s = 0; s < ns; ++s) {
      const double su = sc.u * root[s];
      const double d = su - sc.w * wr[s];
      out[s] = sc.offset + (su * su + best[s]) / sc.denom - (d * d + ew * wo[s]);
    }
  }

  // Rows of the lower-triangular Bartlett factor: vector i has i complex coordinates
  // along earlier directions and a real positive component along its own.
  void fill_wishart(const Scales& sc, std::vector<double>& out) const {
    SeededStream rng(seed_, stream_id_);
    const int dim = ka_ + 2;
    std::vector<cplx> rows(static_cast<std::size_t>(dim * dim));
    auto at = [&](int i, int j) -> cplx& { return rows[static_cast<std::size_t>(i * dim + j)]; };
    const int m = sc.candidates;
    std::vector<double> gram(static_cast<std::size_t>((m + 1) * (m + 1)));
    auto gr = [&](int i, int j) -> double& { return gram[static_cast<std::size_t>(i * (m + 1) + j)]; };
    const int w_index = ka_ + 1;
    for (std::size_t s = 0; s < out.size(); ++s) {
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j) at(i, j) = rng.complex_normal();
        at(i, i) = std::sqrt(rng.gamma(n_ - i));
      }
      for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= i; ++j) {
          cplx acc = 0.0;
          for (int l = 0; l <= j; ++l) acc += at(i, l) * std::conj(at(j, l));
          gr(i, j) = gr(j, i) = acc.real();
        }
      }
      double best = kInf;
      detail::for_each_subset(m, t_, [&](std::span<const int> idx) {
        double cross = 0.0, inner = 0.0;
        for (int a : idx) {
          cross += gr(0, a + 1);
          for (int b : idx) inner += gr(a + 1, b + 1);
        }
        best = std::min(best, sc.u * sc.u * gr(0, 0) + 2.0 * sc.u * sc.v * cross + sc.v * sc.v * inner);
      });
      double wterm = 0.0;
      for (int l = 0; l <= w_index; ++l) {
        const cplx d = (l == 0 ? sc.u * at(0, 0) : cplx(0.0)) - sc.w * at(w_index, l);
        wterm += std::norm(d);
      }
      out[s] = sc.offset + best / sc.denom - wterm;
    }
  }

  void fill_direct(const Scales& sc, std::vector<double>& out) const {
    SeededStream rng(seed_, stream_id_);
    const auto n = static_cast<std::size_t>(n_);
    std::vector<cplx> u(n), w(n), acc(n);
    std::vector<std::vector<cplx>> v(static_cast<std::size_t>(ka_), std::vector<cplx>(n));
    for (std::size_t s = 0; s < out.size(); ++s) {
      for (auto& x : u) x = rng.complex_normal();
      for (auto& vec : v)
        for (auto& x : vec) x = rng.complex_normal();
      for (auto& x : w) x = rng.complex_normal();
      double best = kInf;
      detail::for_each_subset(sc.candidates, t_, [&](std::span<const int> idx) {
        for (std::size_t i = 0; i < n; ++i) acc[i] = sc.u * u[i];
        for (int a : idx)
          for (std::size_t i = 0; i < n; ++i) acc[i] += sc.v * v[static_cast<std::size_t>(a)][i];
        best = std::min(best, squared_norm(acc));
      });
      double wterm = 0.0;
      for (std::size_t i = 0; i < n; ++i) wterm += std::norm(sc.u * u[i] - sc.w * w[i]);
      out[s] = sc.offset + best / sc.denom - wterm;
    }
  }

  int n_, ka_, t_, samples_;
  std::uint64_t seed_, stream_id_;
  SamplingMethod method_ = SamplingMethod::automatic;
  std::shared_ptr<const ProjectionPool> pool_;
};

/// N realizations of I_t for the context's forced misses and false alarms.
inline EcdfTable sample_It(const ExponentContext& ctx, int t, std::uint64_t seed, int samples,
                           SamplingMethod method = SamplingMethod::automatic) {
  return DensitySampler(ctx.n, ctx.ka, t, samples, seed, method).ecdf(ctx.missed(), ctx.extra(), ctx.pprime);
}

/// q_{t,t'}, or `cap` when the infimum cannot fall below it.
inline double q_tt(const ExponentContext& ctx, int t, int tp, const EcdfTable& ecdf, double cap = 1.0) {
  return ecdf.dt_infimum(ctx.ln_c1(tp) + ctx.ln_c2(t), cap);
}

inline double q_t(const ExponentContext& ctx, int t, const EcdfTable& ecdf, double cap = 1.0) {
  LogWeight mass = LogWeight::zero();
  for (int tp : set_Tbar_t(ctx.ka, ctx.window, t, ctx.codebook)) mass += LogWeight(ctx.ln_c1(tp) + ctx.ln_c2(t));
  if (mass.is_zero()) return 0.0;
  return ecdf.dt_infimum(mass.value(), cap);
}

}  // namespace rcu
