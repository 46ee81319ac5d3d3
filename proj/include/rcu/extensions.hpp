#pragma once

#include <cmath>
#include <map>

#include "rcu/bounds.hpp"
#include "rcu/estimator.hpp"
#include "rcu/model.hpp"

namespace rcu {

struct SlotConfig {
  int slots = 1;
  bool slot_index_coding = false;
};

/// Per-slot pmf when every active user independently picks one of `slots` slots.
inline std::map<int, double> thin_pmf(const ActivityModel& activity, int slots) {
  if (slots < 1) throw ConfigError("slot count must be >= 1");
  std::map<int, double> out;
  const double keep = 1.0 / slots;
  for (int ka = 0; ka < activity.support_end(); ++ka) {
    const double pk = activity.pmf(ka);
    if (pk == 0.0) continue;
    for (int k = 0; k <= ka; ++k) {
      if (slots == 1 && k < ka) continue;
      double lw = ln_binomial(static_cast<std::uint64_t>(ka), static_cast<std::uint64_t>(k)).value() +
                  k * std::log(keep);
      if (ka > k) lw += (ka - k) * std::log1p(-keep);
      out[k] += pk * std::exp(lw);
    }
  }
  return out;
}

/// Per-slot activity, re-truncated at the original tail threshold.
inline ActivityModel slot_activity(const ActivityModel& activity, int slots) {
  if (slots < 1) throw ConfigError("slot count must be >= 1");
  if (slots == 1) return activity;
  if (const auto* p = std::get_if<PoissonActivity>(&activity.kind()))
    return truncate_activity(PoissonActivity{p->mean / slots}, activity.tail_threshold());
  return truncate_activity(ExplicitActivity{thin_pmf(activity, slots)}, activity.tail_threshold());
}

/// System seen by one slot: n/L channel uses at L times the power.
inline SystemConfig slot_system(const SystemConfig& cfg, const SlotConfig& slot) {
  if (slot.slots < 1) throw ConfigError("slot count must be >= 1");
  SystemConfig s = cfg;
  s.n = cfg.n / slot.slots;
  if (s.n < 1) throw ConfigError("per-slot length n/L must be >= 1");
  s.power = cfg.power * slot.slots;
  s.codebook_power = cfg.codebook_power * slot.slots;
  if (slot.slot_index_coding) {
    s.k = cfg.k - static_cast<int>(std::floor(std::log2(static_cast<double>(slot.slots))));
    if (s.k < 1) throw ConfigError("slot-index coding leaves no payload bits");
  }
  return s;
}

/// Slotted ALOHA with multi-packet reception; slot-index coding assumes the index bits are error-free.
inline BoundResult sampr_bound(const SystemConfig& cfg, const ActivityModel& activity, const DecoderPolicy& policy,
                               const SlotConfig& slot, const QPolicy& qpolicy = {}, const EvalOptions& options = {}) {
  if (slot.slots == 1 && !slot.slot_index_coding) return assemble_bound(cfg, activity, policy, qpolicy, options);
  return assemble_bound(slot_system(cfg, slot), slot_activity(activity, slot.slots), policy, qpolicy, options);
}

struct FloorResult {
  double eps_md_floor = 0.0;
  double eps_fa_floor = 0.0;
  double pbar = 0.0;
  /// Largest ln of the high-power bound on p_{t,t'} over cells with forced errors.
  double max_log_ptt_certificate = kNegInf;
};

/// Limits of the misdetection and false-alarm bounds as the power grows without bound.
inline FloorResult error_floor(const SystemConfig& cfg, const ActivityModel& activity, const DecoderPolicy& policy,
                               CollisionBound collision = CollisionBound::exact) {
  if (policy.estimator == Estimator::oracle) throw ConfigError("error floor needs the ml or energy estimator");
  const CodebookSize m = cfg.codebook();
  FloorResult out;
  out.pbar = activity.outside_mass() + collision_probability(activity, m, collision);
  const XiSettings xs{policy.estimator, policy.xi_mode, true};
  const int lo = activity.lower(), hi = activity.upper();
  double md = 0.0, fa = 0.0;
  for (int ka = lo; ka <= hi; ++ka) {
    const double pk = activity.pmf(ka);
    for (int kp = lo; kp <= hi; ++kp) {
      const ListWindow w = ListWindow::around(kp, policy.radius, lo, hi);
      const int d = forced_misses(ka, w), e = forced_false_alarms(ka, w);
      if (d + e == 0) continue;
      const double x = xi(ka, kp, lo, hi, xs, 0.0, cfg.n);
      if (ka >= std::max(lo, 1)) md += pk * d / ka * x;
      fa += pk * e / static_cast<double>(ka - d + e) * x;

      const double ln_m = m.log();
      for (int t : set_T(ka, w, m)) {
        for (int tp : set_Tt(ka, w, t, m)) {
          if (t == 0 && tp == 0) continue;
          const double v = tp * ln_m + t * std::log(std::max(ka, 1)) -
                           cfg.n * std::log1p((t + tp) / (4.0 * (d + e)));
          out.max_log_ptt_certificate = std::max(out.max_log_ptt_certificate, v);
        }
      }
    }
  }
  out.eps_md_floor = std::min(1.0, md + out.pbar);
  out.eps_fa_floor = std::min(1.0, fa + out.pbar);
  return out;
}

}  // namespace rcu
