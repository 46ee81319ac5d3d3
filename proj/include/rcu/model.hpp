#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rcu/numerics.hpp"

namespace rcu {

/// Invalid or incomplete configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured enumeration or memory cap.
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Codebook size M = 2^bits, held as a logarithm once it no longer fits a machine word.
class CodebookSize {
 public:
  static constexpr int kExactBits = 62;

  explicit CodebookSize(int bits) : bits_(bits) {
    if (bits < 1) throw ConfigError("codebook bits must be >= 1");
  }

  int bits() const { return bits_; }
  bool is_exact() const { return bits_ <= kExactBits; }
  double log() const { return bits_ * std::numbers::ln2; }
  std::uint64_t value() const {
    if (!is_exact()) throw std::logic_error("codebook size not representable");
    return std::uint64_t{1} << bits_;
  }

  /// min(M, 2^62): adequate for every comparison against list sizes.
  std::int64_t saturated() const {
    return is_exact() ? static_cast<std::int64_t>(value()) : (std::int64_t{1} << kExactBits);
  }

  /// M - x as a Count (zero if x >= M).
  Count minus(std::int64_t x) const {
    if (is_exact()) {
      const auto m = static_cast<std::int64_t>(value());
      return Count::exact(x >= m ? 0 : static_cast<std::uint64_t>(m - x));
    }
    return Count::from_log(log() + std::log1p(-std::ldexp(static_cast<double>(x), -bits_)));
  }

 private:
  int bits_;
};

struct SystemConfig {
  int n = 0;
  int k = 0;
  double power = 0.0;
  double codebook_power = 0.0;

  double ebn0_db() const { return 10.0 * std::log10(n * power / k); }
  CodebookSize codebook() const { return CodebookSize(k); }

  static double power_for_ebn0(double ebn0_db, int n, int k) {
    return std::pow(10.0, ebn0_db / 10.0) * k / n;
  }
  static SystemConfig from_ebn0(int n, int k, double ebn0_db, double pprime_ratio) {
    SystemConfig c{n, k, power_for_ebn0(ebn0_db, n, k), 0.0};
    c.codebook_power = pprime_ratio * c.power;
    return c;
  }

  void validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (!(codebook_power > 0.0) || !(codebook_power <= power))
      throw ConfigError("codebook power must satisfy 0 < P' <= P");
  }
};

struct PoissonActivity {
  double mean;
};
struct FixedActivity {
  int count;
};
struct ExplicitActivity {
  std::map<int, double> weights;
};
using ActivityKind = std::variant<PoissonActivity, FixedActivity, ExplicitActivity>;

/// Distribution of the number of active users together with its truncation window.
class ActivityModel {
 public:
  const ActivityKind& kind() const { return kind_; }
  int lower() const { return lower_; }
  int upper() const { return upper_; }
  double tail_threshold() const { return tail_threshold_; }
  double outside_mass() const { return outside_mass_; }

  /// Untruncated pmf; zero outside the stored support.
  double pmf(int k) const {
    if (k < 0 || k >= static_cast<int>(full_.size())) return 0.0;
    return full_[static_cast<std::size_t>(k)];
  }
  int support_end() const { return static_cast<int>(full_.size()); }

  double mean() const {
    double m = 0.0;
    for (int k = 0; k < support_end(); ++k) m += k * pmf(k);
    return m;
  }

  template <class F>
  double expectation(F&& f) const {
    double acc = 0.0;
    for (int k = 0; k < support_end(); ++k)
      if (pmf(k) > 0.0) acc += pmf(k) * f(k);
    return acc;
  }

  /// Draw from the untruncated distribution.
  int sample(SeededStream& rng) const {
    double u = rng.uniform() * total_;
    for (int k = 0; k < support_end(); ++k) {
      u -= pmf(k);
      if (u < 0.0) return k;
    }
    return support_end() - 1;
  }

  friend ActivityModel truncate_activity(const ActivityKind& kind, double tail_threshold);

 private:
  ActivityKind kind_;
  std::vector<double> full_;
  double total_ = 1.0;
  int lower_ = 0;
  int upper_ = 0;
  double tail_threshold_ = 0.0;
  double outside_mass_ = 0.0;
};

namespace detail {

inline std::vector<double> poisson_support(double mean) {
  if (!(mean > 0.0)) throw ConfigError("poisson mean must be positive");
  const int end = static_cast<int>(std::ceil(mean + 15.0 * std::sqrt(mean) + 40.0));
  std::vector<double> p(static_cast<std::size_t>(end));
  for (int k = 0; k < end; ++k) p[static_cast<std::size_t>(k)] = ln_poisson_pmf(mean, k).probability();
  return p;
}

}  // namespace detail

/// Smallest window around the mode whose outside mass falls below tail_threshold.
inline ActivityModel truncate_activity(const ActivityKind& kind, double tail_threshold) {
  if (!(tail_threshold > 0.0 && tail_threshold < 1.0)) throw ConfigError("tail threshold must be in (0,1)");
  ActivityModel m;
  m.kind_ = kind;
  m.tail_threshold_ = tail_threshold;
  double residual = 0.0;

  if (const auto* f = std::get_if<FixedActivity>(&kind)) {
    if (f->count < 0) throw ConfigError("fixed activity count must be >= 0");
    m.full_.assign(static_cast<std::size_t>(f->count) + 1, 0.0);
    m.full_.back() = 1.0;
    m.lower_ = m.upper_ = f->count;
    m.outside_mass_ = 0.0;
    return m;
  }
  if (const auto* p = std::get_if<PoissonActivity>(&kind)) {
    m.full_ = detail::poisson_support(p->mean);
  } else {
    const auto& w = std::get<ExplicitActivity>(kind).weights;
    if (w.empty()) throw ConfigError("explicit pmf must not be empty");
    double total = 0.0;
    for (auto [k, v] : w) {
      if (k < 0 || !(v >= 0.0)) throw ConfigError("explicit pmf needs k >= 0 and weights >= 0");
      total += v;
    }
    if (!(total > 0.0)) throw ConfigError("explicit pmf has zero mass");
    const double scale = total > 1.0 ? 1.0 / total : 1.0;
    residual = total > 1.0 ? 0.0 : 1.0 - total;
    m.full_.assign(static_cast<std::size_t>(w.rbegin()->first) + 1, 0.0);
    for (auto [k, v] : w) m.full_[static_cast<std::size_t>(k)] = v * scale;
    m.total_ = 1.0 - residual;
  }

  const int end = m.support_end();
  int mode = 0;
  for (int k = 1; k < end; ++k)
    if (m.pmf(k) > m.pmf(mode)) mode = k;
  int lo = mode, hi = mode;
  double inside = m.pmf(mode);
  auto outside = [&] { return std::max(0.0, 1.0 - inside); };
  while (outside() >= tail_threshold && (lo > 0 || hi + 1 < end)) {
    const double left = lo > 0 ? m.pmf(lo - 1) : -1.0;
    const double right = hi + 1 < end ? m.pmf(hi + 1) : -1.0;
    if (right > left) {
      inside += m.pmf(++hi);
    } else {
      inside += m.pmf(--lo);
    }
  }
  // Zero-mass edges can be absorbed while growing through gaps; they carry no probability.
  while (lo < hi && m.pmf(lo) == 0.0) ++lo;
  while (hi > lo && m.pmf(hi) == 0.0) --hi;
  m.lower_ = lo;
  m.upper_ = hi;
  double outside_exact = residual;
  for (int k = 0; k < end; ++k)
    if (k < lo || k > hi) outside_exact += m.pmf(k);
  m.outside_mass_ = outside_exact;
  return m;
}

enum class Estimator { ml, energy, oracle };

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::ml: return "ml";
    case Estimator::energy: return "energy";
    case Estimator::oracle: return "oracle";
  }
  return "?";
}

/// Admissible decoded-list sizes [lower, upper] around an estimate.
struct ListWindow {
  int lower = 0;
  int upper = 0;

  static ListWindow around(int estimate, int radius, int k_low, int k_high) {
    return {std::max(k_low, estimate - radius), std::min(k_high, estimate + radius)};
  }
  friend bool operator==(const ListWindow&, const ListWindow&) = default;
};

/// Half-open integer range [start, stop).
struct IndexRange {
  int start = 0;
  int stop = 0;

  bool empty() const { return stop <= start; }
  int size() const { return empty() ? 0 : stop - start; }
  bool contains(int v) const { return v >= start && v < stop; }
  int first() const { return start; }
  int last() const { return stop - 1; }

  struct iterator {
    int v;
    int operator*() const { return v; }
    iterator& operator++() {
      ++v;
      return *this;
    }
    bool operator!=(const iterator& o) const { return v != o.v; }
  };
  iterator begin() const { return {start}; }
  iterator end() const { return {std::max(start, stop)}; }

  static IndexRange inclusive(int first, int last) { return {first, std::max(first, last + 1)}; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

inline int positive_part(int v) { return v > 0 ? v : 0; }

/// Number of transmitted messages that a list of at most `upper` entries must miss.
inline int forced_misses(int ka, const ListWindow& w) { return positive_part(ka - w.upper); }
/// Number of entries a list of at least `lower` entries must add beyond the transmitted set.
inline int forced_false_alarms(int ka, const ListWindow& w) { return positive_part(w.lower - ka); }

/// Range of additional misdetection counts t.
inline IndexRange set_T(int ka, const ListWindow& w, const CodebookSize& m) {
  const std::int64_t cap = m.saturated() - w.lower - forced_misses(ka, w);
  const std::int64_t upper = std::min<std::int64_t>({w.upper, ka, cap});
  return IndexRange::inclusive(0, static_cast<int>(upper));
}

enum class ListSizeConstraint { positive, unconstrained };

/// Range of additional false-alarm counts t' for a given t.
inline IndexRange set_Tt(int ka, const ListWindow& w, int t, const CodebookSize& m,
                         ListSizeConstraint constraint = ListSizeConstraint::positive) {
  const int md = forced_misses(ka, w);
  const int fa = forced_false_alarms(ka, w);
  int lower = 0;
  if (constraint == ListSizeConstraint::positive) {
    lower = positive_part(md - fa + std::max(w.lower, 1) - ka + t);
  } else {
    lower = positive_part(md - positive_part(ka - w.lower) + t);
  }
  const std::int64_t by_codebook = m.saturated() - std::max(w.lower, ka);
  const std::int64_t upper =
      std::min<std::int64_t>({positive_part(w.upper - ka) - fa + t, w.upper - fa, by_codebook});
  return IndexRange::inclusive(lower, static_cast<int>(upper));
}

inline IndexRange set_Tbar_t(int ka, const ListWindow& w, int t, const CodebookSize& m) {
  return set_Tt(ka, w, t, m, ListSizeConstraint::unconstrained);
}

}  // namespace rcu
