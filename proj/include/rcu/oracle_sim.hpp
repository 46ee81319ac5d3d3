#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "rcu/bounds.hpp"
#include "rcu/model.hpp"
#include "rcu/numerics.hpp"
#include "rcu/parallel.hpp"

namespace rcu {

struct SimConfig {
  SystemConfig system;
  ActivityModel activity = truncate_activity(PoissonActivity{2.0}, 0.02);
  DecoderPolicy policy;
  long trials = 500;
  /// Upper limit on the number of candidate lists the decoder may enumerate.
  std::uint64_t subset_cap = 1'000'000;
  std::uint64_t seed = 1;
  /// Draw a single codebook for the whole run instead of one per trial.
  bool fixed_codebook = false;
  bool keep_log = false;
  unsigned threads = 1;
};

struct TrialRecord {
  long trial;
  int ka;
  int ka_estimate;
  int list_size;
  int misdetections;
  int false_alarms;
};

struct SimOutcome {
  double p_md_hat = 0.0;
  double p_fa_hat = 0.0;
  double sigma_md = 0.0;
  double sigma_fa = 0.0;
  long trials = 0;
  std::vector<TrialRecord> log;
};

/// Number of lists with at most `max_size` distinct entries out of m, saturating above cap.
inline std::uint64_t lists_up_to(std::uint64_t m, int max_size, std::uint64_t cap) {
  std::uint64_t total = 0;
  long double c = 1;
  for (int l = 0; l <= max_size && static_cast<std::uint64_t>(l) <= m; ++l) {
    if (l > 0) c = c * static_cast<long double>(m - static_cast<std::uint64_t>(l) + 1) / l;
    if (c > static_cast<long double>(cap)) return cap + 1;
    total += static_cast<std::uint64_t>(c + 0.5L);
    if (total > cap) return cap + 1;
  }
  return total;
}

/// Index of the count estimate; ties go to the smaller count.
inline int estimate_count(Estimator est, double energy, int n, double pprime, int true_count, int k_low,
                          int k_high) {
  if (est == Estimator::oracle) return std::clamp(true_count, k_low, k_high);
  int best_k = k_low;
  double best = kInf;
  for (int k = k_low; k <= k_high; ++k) {
    const double v = 1.0 + k * pprime;
    const double m = est == Estimator::ml ? energy / v + n * std::log(v) : std::abs(energy - n * v);
    if (m < best) {
      best = m;
      best_k = k;
    }
  }
  return best_k;
}

namespace detail {

/// Exhaustive minimum-distance search over lists with sizes in [lo, hi].
class ListSearch {
 public:
  ListSearch(const std::vector<double>& gram, const std::vector<double>& corr, int m, double y_energy)
      : gram_(gram), corr_(corr), m_(m), base_(y_energy) {}

  std::vector<int> run(int lo, int hi) {
    lo_ = lo;
    hi_ = hi;
    best_cost_ = kInf;
    best_.clear();
    chosen_.clear();
    acc_.assign(static_cast<std::size_t>(hi + 1) * static_cast<std::size_t>(m_), 0.0);
    visit(0, base_, 0);
    return best_;
  }

 private:
  double g(int i, int j) const { return gram_[static_cast<std::size_t>(i * m_ + j)]; }

  void visit(int depth, double cost, int next) {
    if (depth >= lo_ && cost < best_cost_) {
      best_cost_ = cost;
      best_ = chosen_;
    }
    if (depth == hi_) return;
    const double* acc = &acc_[static_cast<std::size_t>(depth) * static_cast<std::size_t>(m_)];
    double* child = &acc_[static_cast<std::size_t>(depth + 1) * static_cast<std::size_t>(m_)];
    for (int j = next; j < m_; ++j) {
      const double step = -2.0 * corr_[static_cast<std::size_t>(j)] + g(j, j) + 2.0 * acc[j];
      for (int l = j + 1; l < m_; ++l) child[l] = acc[l] + g(j, l);
      chosen_.push_back(j);
      visit(depth + 1, cost + step, j + 1);
      chosen_.pop_back();
    }
  }

  const std::vector<double>& gram_;
  const std::vector<double>& corr_;
  int m_;
  double base_;
  int lo_ = 0, hi_ = 0;
  double best_cost_ = kInf;
  std::vector<int> best_, chosen_;
  std::vector<double> acc_;
};

inline std::vector<std::complex<double>> draw_codebook(SeededStream& rng, int m, int n, double pprime) {
  std::vector<std::complex<double>> c(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  for (auto& x : c) x = rng.complex_normal(pprime);
  return c;
}

}  // namespace detail

/// Brute-force simulation of the random-access code with the two-stage decoder.
inline SimOutcome run_sim(const SimConfig& cfg) {
  cfg.system.validate();
  if (!cfg.system.codebook().is_exact() || cfg.system.k > 16) throw ConfigError("simulation needs k <= 16");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.policy.radius < 0) throw ConfigError("decoding radius must be >= 0");
  const int n = cfg.system.n;
  const int m = static_cast<int>(cfg.system.codebook().value());
  const int k_low = cfg.activity.lower(), k_high = cfg.activity.upper();
  const int max_list = std::min(k_high, m);
  if (lists_up_to(static_cast<std::uint64_t>(m), max_list, cfg.subset_cap) > cfg.subset_cap)
    throw ResourceCapError("decoder enumeration exceeds the subset cap");
  const double pprime = cfg.system.codebook_power;
  const double limit = n * cfg.system.power;

  std::vector<std::complex<double>> shared_book;
  if (cfg.fixed_codebook) {
    SeededStream rng(cfg.seed, std::uint64_t{0xc0deb00c} << 32);
    shared_book = detail::draw_codebook(rng, m, n, pprime);
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  std::vector<double> md(records.size()), fa(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t trial) {
    SeededStream rng(cfg.seed, trial);
    const int ka = cfg.activity.sample(rng);
    std::vector<int> msgs(static_cast<std::size_t>(ka));
    for (auto& w : msgs) w = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    const auto own_book = cfg.fixed_codebook ? std::vector<std::complex<double>>{}
                                             : detail::draw_codebook(rng, m, n, pprime);
    const auto& book = cfg.fixed_codebook ? shared_book : own_book;
    auto word = [&](int i) { return &book[static_cast<std::size_t>(i) * static_cast<std::size_t>(n)]; };

    std::vector<std::complex<double>> y(static_cast<std::size_t>(n));
    for (auto& z : y) z = rng.complex_normal();
    for (int w : msgs) {
      const auto* c = word(w);
      double e = 0.0;
      for (int i = 0; i < n; ++i) e += std::norm(c[i]);
      if (e > limit) continue;  // power violation: the all-zero codeword is sent
      for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += c[i];
    }
    double energy = 0.0;
    for (const auto& v : y) energy += std::norm(v);

    const int est = estimate_count(cfg.policy.estimator, energy, n, pprime, ka, k_low, k_high);
    const ListWindow win = ListWindow::around(est, cfg.policy.radius, k_low, k_high);

    std::vector<double> gram(static_cast<std::size_t>(m) * static_cast<std::size_t>(m)), corr(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      const auto* ca = word(a);
      double cr = 0.0;
      for (int i = 0; i < n; ++i) cr += (std::conj(ca[i]) * y[static_cast<std::size_t>(i)]).real();
      corr[static_cast<std::size_t>(a)] = cr;
      for (int b = a; b < m; ++b) {
        const auto* cb = word(b);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (std::conj(ca[i]) * cb[i]).real();
        gram[static_cast<std::size_t>(a * m + b)] = gram[static_cast<std::size_t>(b * m + a)] = s;
      }
    }
    const std::vector<int> decoded = detail::ListSearch(gram, corr, m, energy)
                                         .run(std::min(win.lower, m), std::min(win.upper, m));

    const std::set<int> sent(msgs.begin(), msgs.end());
    const std::set<int> got(decoded.begin(), decoded.end());
    int misses = 0, extras = 0;
    for (int w : sent) misses += got.count(w) == 0;
    for (int w : got) extras += sent.count(w) == 0;
    md[trial] = sent.empty() ? 0.0 : static_cast<double>(misses) / static_cast<double>(sent.size());
    fa[trial] = got.empty() ? 0.0 : static_cast<double>(extras) / static_cast<double>(got.size());
    records[trial] = {static_cast<long>(trial), ka, est, static_cast<int>(got.size()), misses, extras};
  });

  SimOutcome out;
  out.trials = cfg.trials;
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.p_md_hat += md[i];
    out.p_fa_hat += fa[i];
  }
  const auto nt = static_cast<double>(cfg.trials);
  out.p_md_hat /= nt;
  out.p_fa_hat /= nt;
  out.sigma_md = std::sqrt(out.p_md_hat * (1.0 - out.p_md_hat) / nt);
  out.sigma_fa = std::sqrt(out.p_fa_hat * (1.0 - out.p_fa_hat) / nt);
  if (cfg.keep_log) out.log = std::move(records);
  return out;
}

}  // namespace rcu
