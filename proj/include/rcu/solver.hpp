#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcu/bounds.hpp"
#include "rcu/extensions.hpp"
#include "rcu/model.hpp"

namespace rcu {

enum class Scheme { theorem1, known_ka, sampr };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::theorem1: return "theorem1";
    case Scheme::known_ka: return "known_ka";
    case Scheme::sampr: return "sampr";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "theorem1") return Scheme::theorem1;
  if (s == "known_ka") return Scheme::known_ka;
  if (s == "sampr") return Scheme::sampr;
  throw ConfigError("unknown scheme: " + s);
}

struct SolveRequest {
  int n = 19200;
  int k = 128;
  ActivityModel activity = truncate_activity(PoissonActivity{50.0}, 1e-9);
  Scheme scheme = Scheme::theorem1;
  /// Estimator and xi settings; known_ka replaces them with the oracle estimator at radius 0.
  DecoderPolicy policy;
  std::vector<int> radii{0, 1, 2};
  /// Slot counts tried by the sampr scheme.
  std::vector<int> slots = [] {
    std::vector<int> v(64);
    std::iota(v.begin(), v.end(), 1);
    return v;
  }();
  bool slot_index_coding = false;
  double target = 0.1;
  double low_db = -1.0;
  double high_db = 4.0;
  double tolerance_db = 0.01;
  int max_expansions = 6;
  /// P'/P grid; the best cell is refined by golden section to `ratio_tolerance`.
  std::vector<double> ratio_grid{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00};
  double ratio_tolerance = 2e-3;
  QPolicy qpolicy;
  EvalOptions options;

  void validate() const {
    if (!(target > 0.0 && target < 1.0)) throw ConfigError("target must lie in (0, 1)");
    if (!(low_db < high_db)) throw ConfigError("bracket needs low < high");
    if (!(tolerance_db > 0.0)) throw ConfigError("tolerance must be > 0");
    if (ratio_grid.empty()) throw ConfigError("ratio grid is empty");
    for (double r : ratio_grid)
      if (!(r > 0.0 && r <= 1.0)) throw ConfigError("P'/P ratios must lie in (0, 1]");
    if (scheme != Scheme::known_ka && radii.empty()) throw ConfigError("radius set is empty");
    if (scheme == Scheme::sampr && slots.empty()) throw ConfigError("slot set is empty");
  }
};

/// One bound evaluation at the best knobs found for an Eb/N0.
struct SolvePoint {
  double ebn0_db = 0.0;
  double ratio = 0.0;
  int radius = 0;
  int slots = 1;
  double eps_md = 1.0;
  double eps_fa = 1.0;
  bool feasible = false;

  double worst() const { return std::max(eps_md, eps_fa); }
};

struct SolveResult {
  double ebn0_db = 0.0;
  SolvePoint point;
  /// Best infeasible point just below the answer.
  SolvePoint below;
  std::vector<SolvePoint> trace;
  long evaluations = 0;
  bool monotonicity_violated = false;
};

class BracketExhausted : public std::runtime_error {
 public:
  BracketExhausted(const std::string& what, SolvePoint best) : std::runtime_error(what), best_(best) {}
  const SolvePoint& best() const { return best_; }

 private:
  SolvePoint best_;
};

namespace detail {

class KnobSearch {
 public:
  explicit KnobSearch(const SolveRequest& req) : req_(req) {
    if (req.scheme == Scheme::known_ka) {
      DecoderPolicy p = req.policy;
      p.estimator = Estimator::oracle;
      p.radius = 0;
      knobs_.push_back({p, 1});
    } else {
      const std::vector<int> slots = req.scheme == Scheme::sampr ? req.slots : std::vector<int>{1};
      for (int l : slots) {
        if (l < 1 || req.n / l < 1) continue;
        for (int r : req.radii) {
          DecoderPolicy p = req.policy;
          p.radius = r;
          knobs_.push_back({p, l});
        }
      }
      if (knobs_.empty()) throw ConfigError("no admissible (slots, radius) combination");
    }
    hints_.assign(knobs_.size(), -1.0);
  }

  long evaluations() const { return evaluations_; }

  /// Best point found at this Eb/N0. With `first_feasible` the search returns as soon as any
  /// knob setting meets the target, which is all bisection needs.
  SolvePoint best_at(double ebn0_db, bool first_feasible) {
    SolvePoint best;
    best.ebn0_db = ebn0_db;
    bool have = false;
    for (std::size_t i = 0; i < knobs_.size(); ++i) {
      const SolvePoint p = best_ratio(i, ebn0_db, first_feasible);
      if (!have || p.worst() < best.worst()) best = p;
      have = true;
      if (first_feasible && best.feasible) break;
    }
    return best;
  }

 private:
  struct Knob {
    DecoderPolicy policy;
    int slots;
  };

  struct Probe {
    double ratio;
    double value;  // +inf when only known to exceed the stop level
    BoundResult result;
  };

  Probe probe(std::size_t knob, double ebn0_db, double ratio, double stop) {
    ++evaluations_;
    const Knob& kn = knobs_[knob];
    const SystemConfig cfg = SystemConfig::from_ebn0(req_.n, req_.k, ebn0_db, ratio);
    EvalOptions opt = req_.options;
    opt.stop_above = stop;
    const BoundResult r =
        sampr_bound(cfg, req_.activity, kn.policy, {kn.slots, req_.slot_index_coding}, req_.qpolicy, opt);
    return {ratio, r.exceeded ? kInf : r.worst(), r};
  }

  SolvePoint to_point(std::size_t knob, double ebn0_db, const Probe& p) const {
    SolvePoint s;
    s.ebn0_db = ebn0_db;
    s.ratio = p.ratio;
    s.radius = knobs_[knob].policy.radius;
    s.slots = knobs_[knob].slots;
    s.eps_md = p.result.eps_md;
    s.eps_fa = p.result.eps_fa;
    s.feasible = !p.result.exceeded && p.result.worst() <= req_.target;
    return s;
  }

  // Grid over P'/P followed by golden section on the best cell. A probe stops as soon as it
  // is certain to lose against the point it is compared with, so losing cells cost little.
  SolvePoint best_ratio(std::size_t knob, double ebn0_db, bool first_feasible) {
    const auto& grid = req_.ratio_grid;
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    if (hints_[knob] >= 0.0) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(grid[a] - hints_[knob]) < std::abs(grid[b] - hints_[knob]);
      });
    }
    std::optional<Probe> best;
    std::size_t best_index = order[0];
    auto done = [&] { return first_feasible && best && best->value <= req_.target; };
    auto finish = [&] {
      if (best->value < kInf) hints_[knob] = best->ratio;
      return to_point(knob, ebn0_db, *best);
    };
    for (std::size_t idx : order) {
      Probe p = probe(knob, ebn0_db, grid[idx], best ? best->value : kInf);
      if (!best || p.value < best->value) {
        best = std::move(p);
        best_index = idx;
      }
      if (done()) return finish();
    }
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), grid[best_index]) -
                                              sorted.begin());
    double lo = pos > 0 ? sorted[pos - 1] : sorted.front();
    double hi = pos + 1 < sorted.size() ? sorted[pos + 1] : sorted.back();
    if (hi - lo <= req_.ratio_tolerance) return finish();

    constexpr double g = 0.6180339887498949;
    auto eval = [&](double x, double stop) {
      Probe p = probe(knob, ebn0_db, x, stop);
      const double v = p.value;
      if (v < best->value) best = std::move(p);
      return v;
    };
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = eval(x1, kInf);
    if (done()) return finish();
    double f2 = eval(x2, f1);
    while (hi - lo > req_.ratio_tolerance && !done()) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = eval(x1, f2);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = eval(x2, f1);
      }
    }
    return finish();
  }

  const SolveRequest& req_;
  std::vector<Knob> knobs_;
  std::vector<double> hints_;
  long evaluations_ = 0;
};

}  // namespace detail

/// Best knobs at a fixed Eb/N0: the request's P'/P grid with golden refinement, over its radii and slots.
inline SolvePoint optimize_knobs(const SolveRequest& req, double ebn0_db) {
  req.validate();
  detail::KnobSearch search(req);
  return search.best_at(ebn0_db, false);
}

/// Smallest Eb/N0 (to the requested tolerance) with max{eps_MD, eps_FA} <= target.
inline SolveResult required_ebn0(const SolveRequest& req) {
  req.validate();
  detail::KnobSearch search(req);
  SolveResult out;
  auto at = [&](double db) {
    SolvePoint p = search.best_at(db, true);
    out.trace.push_back(p);
    return p;
  };
  auto best_seen = [&] {
    SolvePoint b = out.trace.front();
    for (const auto& p : out.trace)
      if (p.worst() < b.worst()) b = p;
    return b;
  };

  double lo = req.low_db, hi = req.high_db;
  SolvePoint p_hi = at(hi);
  for (int i = 0; !p_hi.feasible; ++i) {
    if (i >= req.max_expansions) throw BracketExhausted("bracket exhausted: target not reached", best_seen());
    lo = hi;
    hi += (req.high_db - req.low_db) * (1 << i);
    p_hi = at(hi);
  }
  SolvePoint p_lo = at(lo);
  for (int i = 0; p_lo.feasible; ++i) {
    if (i >= req.max_expansions) throw BracketExhausted("bracket exhausted: target met at the lower end", p_lo);
    hi = lo;
    p_hi = p_lo;
    lo -= (req.high_db - req.low_db) * (1 << i);
    p_lo = at(lo);
  }
  while (hi - lo > req.tolerance_db) {
    const double mid = 0.5 * (lo + hi);
    SolvePoint p = at(mid);
    if (p.feasible) {
      hi = mid;
      p_hi = p;
    } else {
      lo = mid;
      p_lo = p;
    }
  }
  for (const auto& a : out.trace)
    for (const auto& b : out.trace)
      if (a.ebn0_db < b.ebn0_db && a.feasible && !b.feasible) out.monotonicity_violated = true;
  out.ebn0_db = hi;
  out.point = search.best_at(hi, false);
  out.below = p_lo;
  out.evaluations = search.evaluations();
  return out;
}

}  // namespace rcu
