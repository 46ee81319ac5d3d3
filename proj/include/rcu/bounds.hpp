#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include "rcu/dtbound.hpp"
#include "rcu/estimator.hpp"
#include "rcu/exponents.hpp"
#include "rcu/model.hpp"
#include "rcu/parallel.hpp"

namespace rcu {

enum class FaWeight {
  /// Numerator t' + forced false alarms.
  theorem,
  /// Numerator t + forced false alarms.
  appendix,
};

enum class CollisionBound { exact, pairwise };

struct DecoderPolicy {
  Estimator estimator = Estimator::ml;
  int radius = 0;
  XiMode xi_mode = XiMode::versus_true_count;
  FaWeight fa_weight = FaWeight::theorem;
};

struct QPolicy {
  bool enabled = true;
  int samples = 20000;
  int max_t = 1;
  int max_ka = 50;
  std::uint64_t enumeration_cap = 10000;
  std::uint64_t seed = 20240601;
  SamplingMethod method = SamplingMethod::automatic;
};

struct EvalOptions {
  /// Cells whose P(K_a) * weight * min{xi, cheap bound on p} falls below this keep that cheap
  /// value instead of the optimized exponent. Either way the result stays an upper bound.
  double prune = 1e-10;
  /// Evaluation stops once max{eps_MD, eps_FA} is certain to exceed this; see BoundResult::exceeded.
  double stop_above = kInf;
  CollisionBound collision = CollisionBound::exact;
  unsigned threads = 1;
  bool keep_terms = false;
};

struct P0Terms {
  double truncation = 0.0;
  double collision = 0.0;
  double power = 0.0;
  double total() const { return truncation + collision + power; }
};

/// One (K_a, K_a', t[, t']) summand. tp < 0 marks a misdetection term.
struct TermRecord {
  int ka, ka_prime, t, tp;
  double weight;
  double p;  ///< exp(-nE) part; NaN when pruned
  double q;  ///< NaN when not evaluated; capped at min{p, xi}
  double xi;
  double contribution;  ///< P(K_a) * weight * min{p, q, xi}
};

struct BoundDiagnostics {
  long cells = 0;
  long cells_pruned = 0;
  long q_evaluated = 0;
  long q_unavailable = 0;
  int q_samples = 0;
  std::uint64_t q_seed = 0;
  bool md_clamped = false;
  bool fa_clamped = false;
  int k_low = 0;
  int k_high = 0;
};

struct BoundResult {
  double eps_md = 1.0;
  double eps_fa = 1.0;
  double raw_md = 1.0;
  double raw_fa = 1.0;
  P0Terms p0;
  BoundDiagnostics diagnostics;
  std::vector<TermRecord> terms;
  /// Set when max{eps_MD, eps_FA} > stop_above; the eps fields then hold partial sums only.
  bool exceeded = false;

  double worst() const { return std::max(eps_md, eps_fa); }
};

inline double collision_probability(const ActivityModel& activity, const CodebookSize& m, CollisionBound kind) {
  if (kind == CollisionBound::pairwise) {
    const double inv_m = std::exp(-m.log());
    return activity.expectation([&](int k) { return 0.5 * k * (k - 1.0) * inv_m; });
  }
  return activity.expectation([&](int k) {
    if (m.is_exact() && static_cast<std::uint64_t>(k) > m.value()) return 1.0;
    double s = 0.0;
    for (int i = 1; i < k; ++i) s += std::log1p(-std::exp(std::log(static_cast<double>(i)) - m.log()));
    return -std::expm1(s);
  });
}

inline P0Terms compute_p0(const SystemConfig& cfg, const ActivityModel& activity,
                          CollisionBound collision = CollisionBound::exact) {
  cfg.validate();
  P0Terms p;
  p.truncation = activity.outside_mass();
  p.collision = collision_probability(activity, cfg.codebook(), collision);
  p.power = activity.mean() * reg_gamma_upper(cfg.n, cfg.n * cfg.power / cfg.codebook_power);
  return p;
}

namespace detail {

struct KaPartial {
  double md = 0.0;
  double fa = 0.0;
  BoundDiagnostics diag;
  std::vector<TermRecord> terms;
};

inline double fa_weight(FaWeight kind, int ka, int t, int tp, int missed, int extra) {
  const int list_size = ka - t - missed + tp + extra;
  if (list_size <= 0) return 0.0;
  return static_cast<double>((kind == FaWeight::theorem ? tp : t) + extra) / list_size;
}

class KaEvaluator {
 public:
  KaEvaluator(const SystemConfig& cfg, const ActivityModel& act, const DecoderPolicy& pol, const QPolicy& qp,
              const EvalOptions& opt, const XiTable& xi, int ka)
      : cfg_(cfg), act_(act), pol_(pol), qp_(qp), opt_(opt), xi_(xi), ka_(ka), pk_(act.pmf(ka)) {}

  KaPartial run() {
    KaPartial out;
    if (pk_ == 0.0) return out;
    for (int kp = act_.lower(); kp <= act_.upper(); ++kp) {
      const double xi = xi_(ka_, kp);
      if (xi == 0.0) continue;
      cell(kp, xi, out);
    }
    return out;
  }

 private:
  bool q_allowed(int t, int candidates) const {
    return qp_.enabled && t >= 1 && t <= qp_.max_t && ka_ <= qp_.max_ka &&
           DensitySampler::within_cap(candidates, t, qp_.enumeration_cap);
  }

  DensitySampler& sampler(int t) {
    auto& slot = samplers_[t];
    if (!slot) slot = std::make_unique<DensitySampler>(cfg_.n, ka_, t, qp_.samples, qp_.seed, qp_.method);
    return *slot;
  }

  const EcdfTable& ecdf(int t, int missed, int extra) {
    const auto key = std::make_tuple(t, missed, extra);
    auto it = ecdfs_.find(key);
    if (it == ecdfs_.end()) it = ecdfs_.emplace(key, sampler(t).ecdf(missed, extra, cfg_.codebook_power)).first;
    return it->second;
  }

  void cell(int kp, double xi, KaPartial& out) {
    const ListWindow w = ListWindow::around(kp, pol_.radius, act_.lower(), act_.upper());
    const ExponentContext ctx(cfg_.n, ka_, w, cfg_.codebook_power, cfg_.codebook());
    const int missed = ctx.missed();
    const int extra = ctx.extra();
    const CodebookSize m = cfg_.codebook();
    // ln p_{t,t'}: exact values, and cheap upper bounds from a single (rho, rho1) point.
    std::map<std::pair<int, int>, double> exact, upper;
    auto ln_ptt = [&](int t, int tp) {
      auto [it, fresh] = exact.try_emplace({t, tp}, 0.0);
      if (fresh) {
        const ExponentPoint pt = optimize_exponent(ctx, t, tp);
        if (pt.rho > 0.0 && pt.rho1 > 0.0) hint_ = {pt.rho, pt.rho1};
        it->second = -ctx.n * pt.value;
      }
      return it->second;
    };
    auto ln_ptt_upper = [&](int t, int tp) {
      if (auto e = exact.find({t, tp}); e != exact.end()) return e->second;
      auto [it, fresh] = upper.try_emplace({t, tp}, 0.0);
      if (fresh) {
        const double g = std::max({0.0, exponent_at(ctx, t, tp, hint_.first, hint_.second),
                                   exponent_at(ctx, t, tp, 1.0, 1.0)});
        it->second = -ctx.n * g;
      }
      return it->second;
    };
    auto record = [&](int t, int tp, double weight, double p, double q, double contribution) {
      if (opt_.keep_terms) out.terms.push_back({ka_, kp, t, tp, weight, p, q, xi, contribution});
    };
    const bool md_active = ka_ >= std::max(act_.lower(), 1);

    for (int t : set_T(ka_, w, m)) {
      const int candidates = ka_ - missed;
      const bool q_ok = q_allowed(t, candidates);
      if (qp_.enabled && t >= 1 && t <= qp_.max_t && ka_ <= qp_.max_ka && !q_ok) ++out.diag.q_unavailable;

      if (md_active) {
        const double weight = static_cast<double>(t + missed) / ka_;
        if (weight > 0.0) {
          ++out.diag.cells;
          double factor = xi, p = std::nan(""), q = std::nan("");
          const IndexRange tbar = set_Tbar_t(ka_, w, t, m);
          LogWeight bound = LogWeight::zero();
          for (int tp : tbar) bound += LogWeight(ln_ptt_upper(t, tp));
          if (pk_ * weight * std::min(xi, bound.probability()) >= opt_.prune) {
            LogWeight acc = LogWeight::zero();
            for (int tp : tbar) acc += LogWeight(ln_ptt(t, tp));
            p = acc.probability();
            factor = std::min(factor, p);
            if (q_ok && pk_ * weight * factor >= opt_.prune) {
              q = q_t(ctx, t, ecdf(t, missed, extra), factor);
              ++out.diag.q_evaluated;
              factor = std::min(factor, q);
            }
          } else {
            factor = std::min(factor, bound.probability());
            ++out.diag.cells_pruned;
          }
          const double c = pk_ * weight * factor;
          out.md += c;
          record(t, -1, weight, p, q, c);
        }
      }

      for (int tp : set_Tt(ka_, w, t, m)) {
        const double weight = fa_weight(pol_.fa_weight, ka_, t, tp, missed, extra);
        if (weight <= 0.0) continue;
        ++out.diag.cells;
        double factor = xi, p = std::nan(""), q = std::nan("");
        const double bound = std::exp(ln_ptt_upper(t, tp));
        if (pk_ * weight * std::min(xi, bound) >= opt_.prune) {
          p = std::exp(ln_ptt(t, tp));
          factor = std::min(factor, p);
          if (q_ok && pk_ * weight * factor >= opt_.prune) {
            q = q_tt(ctx, t, tp, ecdf(t, missed, extra), factor);
            ++out.diag.q_evaluated;
            factor = std::min(factor, q);
          }
        } else {
          factor = std::min(factor, bound);
          ++out.diag.cells_pruned;
        }
        const double c = pk_ * weight * factor;
        out.fa += c;
        record(t, tp, weight, p, q, c);
      }
    }
  }

  const SystemConfig& cfg_;
  const ActivityModel& act_;
  const DecoderPolicy& pol_;
  const QPolicy& qp_;
  const EvalOptions& opt_;
  const XiTable& xi_;
  int ka_;
  double pk_;
  std::pair<double, double> hint_{0.8, 1.0};
  std::map<int, std::unique_ptr<DensitySampler>> samplers_;
  std::map<std::tuple<int, int, int>, EcdfTable> ecdfs_;
};

}  // namespace detail

/// Evaluates both misdetection and false-alarm bounds.
inline BoundResult assemble_bound(const SystemConfig& cfg, const ActivityModel& activity, const DecoderPolicy& policy,
                                  const QPolicy& qpolicy = {}, const EvalOptions& options = {}) {
  cfg.validate();
  if (policy.radius < 0) throw ConfigError("decoding radius must be >= 0");
  BoundResult res;
  res.p0 = compute_p0(cfg, activity, options.collision);
  const XiSettings xs{policy.estimator, policy.xi_mode, false};
  const XiTable xi(activity.lower(), activity.upper(), xs, cfg.codebook_power, cfg.n);

  const int count = activity.upper() - activity.lower() + 1;
  std::vector<detail::KaPartial> parts(static_cast<std::size_t>(count));
  // Heaviest K_a first so that an early stop triggers as soon as possible.
  std::vector<int> order(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = activity.lower() + i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return activity.pmf(a) > activity.pmf(b); });
  const double p0 = res.p0.total();
  std::mutex guard;
  double run_md = p0, run_fa = p0;
  std::atomic<bool> stop{false};
  parallel_for(order.size(), options.threads, [&](std::size_t i) {
    if (stop.load()) return;
    const int ka = order[i];
    detail::KaEvaluator ev(cfg, activity, policy, qpolicy, options, xi, ka);
    auto part = ev.run();
    std::lock_guard lock(guard);
    run_md += part.md;
    run_fa += part.fa;
    if (std::min(1.0, std::max(run_md, run_fa)) > options.stop_above) stop = true;
    parts[static_cast<std::size_t>(ka - activity.lower())] = std::move(part);
  });

  double md = 0.0, fa = 0.0;
  auto& d = res.diagnostics;
  for (auto& part : parts) {
    md += part.md;
    fa += part.fa;
    d.cells += part.diag.cells;
    d.cells_pruned += part.diag.cells_pruned;
    d.q_evaluated += part.diag.q_evaluated;
    d.q_unavailable += part.diag.q_unavailable;
    if (options.keep_terms) res.terms.insert(res.terms.end(), part.terms.begin(), part.terms.end());
  }
  d.q_samples = qpolicy.enabled ? qpolicy.samples : 0;
  d.q_seed = qpolicy.seed;
  d.k_low = activity.lower();
  d.k_high = activity.upper();
  res.raw_md = p0 + md;
  res.raw_fa = p0 + fa;
  d.md_clamped = res.raw_md > 1.0;
  d.fa_clamped = res.raw_fa > 1.0;
  res.eps_md = std::min(1.0, res.raw_md);
  res.eps_fa = std::min(1.0, res.raw_fa);
  res.exceeded = stop.load() || res.worst() > options.stop_above;
  return res;
}

}  // namespace rcu
