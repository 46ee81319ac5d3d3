#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcu/bounds.hpp"
#include "rcu/oracle_sim.hpp"
#include "rcu/solver.hpp"

namespace rcu {

using json = nlohmann::json;

/// Fully resolved run configuration; every field has an explicit value.
struct RunConfig {
  int n = 0;
  int k = 0;
  std::optional<double> ebn0_db;
  std::optional<double> power;
  /// Fixed P'/P; empty means "optimize over the solver grid".
  std::optional<double> pprime_ratio;
  std::optional<double> pprime;

  ActivityKind activity_kind = PoissonActivity{50.0};
  double tail_threshold = 1e-9;

  DecoderPolicy policy;
  std::vector<int> radii{0};
  QPolicy qpolicy;
  EvalOptions eval;

  Scheme scheme = Scheme::theorem1;
  double target = 0.1;
  double low_db = -1.0;
  double high_db = 4.0;
  double tolerance_db = 0.01;
  int max_expansions = 6;
  std::vector<double> ratio_grid{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00};
  double ratio_tolerance = 2e-3;
  std::vector<int> slots{1, 2, 4, 8, 16, 32, 64};
  bool slot_index_coding = false;

  long sim_trials = 500;
  std::uint64_t sim_subset_cap = 1'000'000;
  std::uint64_t sim_seed = 1;
  bool sim_fixed_codebook = false;

  ActivityModel activity() const { return truncate_activity(activity_kind, tail_threshold); }

  /// System at a given Eb/N0 and P'/P.
  SystemConfig system_at(double db, double ratio) const { return SystemConfig::from_ebn0(n, k, db, ratio); }

  double resolved_ebn0() const {
    if (ebn0_db) return *ebn0_db;
    if (power) return 10.0 * std::log10(n * *power / k);
    throw ConfigError("missing field: ebn0_db");
  }

  /// Concrete system when P' is fixed by the configuration.
  std::optional<SystemConfig> fixed_system() const {
    const double db = resolved_ebn0();
    const double p = power ? *power : SystemConfig::power_for_ebn0(db, n, k);
    if (pprime) return SystemConfig{n, k, p, *pprime};
    if (pprime_ratio) return SystemConfig{n, k, p, *pprime_ratio * p};
    return std::nullopt;
  }

  SolveRequest solve_request() const {
    SolveRequest r;
    r.n = n;
    r.k = k;
    r.activity = activity();
    r.scheme = scheme;
    r.policy = policy;
    r.radii = radii;
    r.slots = slots;
    r.slot_index_coding = slot_index_coding;
    r.target = target;
    r.low_db = low_db;
    r.high_db = high_db;
    r.tolerance_db = tolerance_db;
    r.max_expansions = max_expansions;
    r.ratio_grid = pprime_ratio ? std::vector<double>{*pprime_ratio} : ratio_grid;
    r.ratio_tolerance = ratio_tolerance;
    r.qpolicy = qpolicy;
    r.options = eval;
    return r;
  }
};

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field: ") + key);
  return j.at(key);
}

template <class T>
T read(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid field: ") + key);
  }
}

template <class T>
T read_required(const json& j, const char* key) {
  const json& v = require(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid field: ") + key);
  }
}

inline Estimator estimator_from_string(const std::string& s) {
  if (s == "ml") return Estimator::ml;
  if (s == "energy") return Estimator::energy;
  if (s == "oracle") return Estimator::oracle;
  throw ConfigError("invalid field: estimator");
}

inline const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::ml: return "ml";
    case Estimator::energy: return "energy";
    case Estimator::oracle: return "oracle";
  }
  return "?";
}

inline SamplingMethod method_from_string(const std::string& s) {
  if (s == "automatic") return SamplingMethod::automatic;
  if (s == "projection") return SamplingMethod::projection;
  if (s == "wishart") return SamplingMethod::wishart;
  if (s == "direct") return SamplingMethod::direct;
  throw ConfigError("invalid field: method");
}

inline const char* method_name(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::automatic: return "automatic";
    case SamplingMethod::projection: return "projection";
    case SamplingMethod::wishart: return "wishart";
    case SamplingMethod::direct: return "direct";
  }
  return "?";
}

}  // namespace detail

/// Parses a configuration document. Throws ConfigError naming the offending field.
inline RunConfig parse_config(const json& doc) {
  using detail::read;
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c;
  const json& sys = detail::require(doc, "system");
  c.n = detail::read_required<int>(sys, "n");
  c.k = detail::read_required<int>(sys, "k");
  if (sys.contains("ebn0_db") && !sys["ebn0_db"].is_null()) c.ebn0_db = read<double>(sys, "ebn0_db", 0.0);
  if (sys.contains("power") && !sys["power"].is_null()) c.power = read<double>(sys, "power", 0.0);
  if (sys.contains("pprime") && !sys["pprime"].is_null()) c.pprime = read<double>(sys, "pprime", 0.0);
  if (sys.contains("pprime_ratio") && sys["pprime_ratio"].is_number())
    c.pprime_ratio = read<double>(sys, "pprime_ratio", 0.0);
  else if (sys.contains("pprime_ratio") && !sys["pprime_ratio"].is_null() &&
           !(sys["pprime_ratio"].is_string() && sys["pprime_ratio"] == "optimize"))
    throw ConfigError("invalid field: pprime_ratio");
  if (c.n < 1) throw ConfigError("invalid field: n");
  if (c.k < 1) throw ConfigError("invalid field: k");

  const json& act = detail::require(doc, "activity");
  const auto kind = detail::read_required<std::string>(act, "kind");
  c.tail_threshold = read(act, "tail_threshold", c.tail_threshold);
  if (kind == "poisson") {
    c.activity_kind = PoissonActivity{detail::read_required<double>(act, "mean")};
  } else if (kind == "fixed") {
    c.activity_kind = FixedActivity{detail::read_required<int>(act, "count")};
  } else if (kind == "explicit") {
    const json& pmf = detail::require(act, "pmf");
    if (!pmf.is_object()) throw ConfigError("invalid field: pmf");
    std::map<int, double> w;
    for (auto it = pmf.begin(); it != pmf.end(); ++it) {
      try {
        w[std::stoi(it.key())] = it.value().get<double>();
      } catch (...) {
        throw ConfigError("invalid field: pmf");
      }
    }
    c.activity_kind = ExplicitActivity{w};
  } else {
    throw ConfigError("invalid field: kind");
  }

  const json dec = doc.value("decoder", json::object());
  c.policy.estimator = detail::estimator_from_string(read<std::string>(dec, "estimator", "ml"));
  c.policy.radius = read(dec, "radius", 0);
  const auto xm = read<std::string>(dec, "xi_mode", "versus_true_count");
  if (xm == "versus_true_count") c.policy.xi_mode = XiMode::versus_true_count;
  else if (xm == "min_over_counts") c.policy.xi_mode = XiMode::min_over_counts;
  else throw ConfigError("invalid field: xi_mode");
  const auto fw = read<std::string>(dec, "fa_weight", "theorem");
  if (fw == "theorem") c.policy.fa_weight = FaWeight::theorem;
  else if (fw == "appendix") c.policy.fa_weight = FaWeight::appendix;
  else throw ConfigError("invalid field: fa_weight");
  c.radii = read(dec, "radii", std::vector<int>{c.policy.radius});

  const json qp = doc.value("qpolicy", json::object());
  c.qpolicy.enabled = read(qp, "enabled", c.qpolicy.enabled);
  c.qpolicy.samples = read(qp, "samples", c.qpolicy.samples);
  c.qpolicy.max_t = read(qp, "max_t", c.qpolicy.max_t);
  c.qpolicy.max_ka = read(qp, "max_ka", c.qpolicy.max_ka);
  c.qpolicy.enumeration_cap = read(qp, "enumeration_cap", c.qpolicy.enumeration_cap);
  c.qpolicy.seed = read(qp, "seed", c.qpolicy.seed);
  c.qpolicy.method = detail::method_from_string(read<std::string>(qp, "method", "automatic"));

  const json ev = doc.value("eval", json::object());
  c.eval.prune = read(ev, "prune", c.eval.prune);
  const auto col = read<std::string>(ev, "collision", "exact");
  if (col == "exact") c.eval.collision = CollisionBound::exact;
  else if (col == "pairwise") c.eval.collision = CollisionBound::pairwise;
  else throw ConfigError("invalid field: collision");
  c.eval.threads = read(ev, "threads", 0u);
  c.eval.keep_terms = read(ev, "keep_terms", false);

  const json sol = doc.value("solver", json::object());
  c.scheme = scheme_from_string(read<std::string>(sol, "scheme", "theorem1"));
  c.target = read(sol, "target", c.target);
  c.low_db = read(sol, "low_db", c.low_db);
  c.high_db = read(sol, "high_db", c.high_db);
  c.tolerance_db = read(sol, "tolerance_db", c.tolerance_db);
  c.max_expansions = read(sol, "max_expansions", c.max_expansions);
  c.ratio_grid = read(sol, "ratio_grid", c.ratio_grid);
  c.ratio_tolerance = read(sol, "ratio_tolerance", c.ratio_tolerance);
  c.slots = read(sol, "slots", c.slots);
  c.slot_index_coding = read(sol, "slot_index_coding", c.slot_index_coding);

  const json sim = doc.value("sim", json::object());
  c.sim_trials = read(sim, "trials", c.sim_trials);
  c.sim_subset_cap = read(sim, "subset_cap", c.sim_subset_cap);
  c.sim_seed = read(sim, "seed", c.sim_seed);
  c.sim_fixed_codebook = read(sim, "fixed_codebook", c.sim_fixed_codebook);

  if (const char* env = std::getenv("RCU_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("RCU_SEED must be an unsigned integer");
    c.qpolicy.seed = s;
    c.sim_seed = s;
  }
  // Validate the activity eagerly so errors surface before any work starts.
  (void)c.activity();
  return c;
}

/// Echo of the configuration with every default spelled out; feeding it back reproduces the run.
inline json effective_config(const RunConfig& c) {
  json j;
  j["system"] = {{"n", c.n}, {"k", c.k}};
  j["system"]["ebn0_db"] = c.ebn0_db ? json(*c.ebn0_db) : json(nullptr);
  j["system"]["power"] = c.power ? json(*c.power) : json(nullptr);
  j["system"]["pprime"] = c.pprime ? json(*c.pprime) : json(nullptr);
  j["system"]["pprime_ratio"] = c.pprime_ratio ? json(*c.pprime_ratio) : json("optimize");

  json act;
  if (const auto* p = std::get_if<PoissonActivity>(&c.activity_kind)) {
    act = {{"kind", "poisson"}, {"mean", p->mean}};
  } else if (const auto* f = std::get_if<FixedActivity>(&c.activity_kind)) {
    act = {{"kind", "fixed"}, {"count", f->count}};
  } else {
    json pmf = json::object();
    for (auto [k, v] : std::get<ExplicitActivity>(c.activity_kind).weights) pmf[std::to_string(k)] = v;
    act = {{"kind", "explicit"}, {"pmf", pmf}};
  }
  act["tail_threshold"] = c.tail_threshold;
  j["activity"] = act;

  j["decoder"] = {{"estimator", detail::estimator_name(c.policy.estimator)},
                  {"radius", c.policy.radius},
                  {"radii", c.radii},
                  {"xi_mode", to_string(c.policy.xi_mode)},
                  {"fa_weight", c.policy.fa_weight == FaWeight::theorem ? "theorem" : "appendix"}};
  j["qpolicy"] = {{"enabled", c.qpolicy.enabled},         {"samples", c.qpolicy.samples},
                  {"max_t", c.qpolicy.max_t},             {"max_ka", c.qpolicy.max_ka},
                  {"enumeration_cap", c.qpolicy.enumeration_cap}, {"seed", c.qpolicy.seed},
                  {"method", detail::method_name(c.qpolicy.method)}};
  j["eval"] = {{"prune", c.eval.prune},
               {"collision", c.eval.collision == CollisionBound::exact ? "exact" : "pairwise"},
               {"threads", c.eval.threads},
               {"keep_terms", c.eval.keep_terms}};
  j["solver"] = {{"scheme", to_string(c.scheme)},
                 {"target", c.target},
                 {"low_db", c.low_db},
                 {"high_db", c.high_db},
                 {"tolerance_db", c.tolerance_db},
                 {"max_expansions", c.max_expansions},
                 {"ratio_grid", c.ratio_grid},
                 {"ratio_tolerance", c.ratio_tolerance},
                 {"slots", c.slots},
                 {"slot_index_coding", c.slot_index_coding}};
  j["sim"] = {{"trials", c.sim_trials},
              {"subset_cap", c.sim_subset_cap},
              {"seed", c.sim_seed},
              {"fixed_codebook", c.sim_fixed_codebook}};
  return j;
}

}  // namespace rcu
