// Command-line front end: bound, tradeoff, ebno-curve and simulate.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcu/config.hpp"
#include "rcu/extensions.hpp"
#include "rcu/oracle_sim.hpp"
#include "rcu/solver.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using rcu::json;

enum ExitCode { kOk = 0, kConfigError = 2, kResourceCap = 3, kBracketExhausted = 4 };

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rcu::ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw rcu::ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct Manifest {
  std::string command;
  json config;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::string started = utc_now();
  unsigned threads = 1;

  json to_json(const json& extra = json::object()) const {
    json m = {{"tool", "rcu"},
              {"version", kVersion},
              {"command", command},
              {"started_utc", started},
              {"elapsed_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
              {"threads", threads},
              {"q_seed", config["qpolicy"]["seed"]},
              {"sim_seed", config["sim"]["seed"]},
              {"config", config}};
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    return m;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw rcu::ConfigError("invalid list entry: " + item);
    }
  }
  if (out.empty()) throw rcu::ConfigError("empty list");
  return out;
}

json bound_json(const rcu::BoundResult& r) {
  const auto& d = r.diagnostics;
  json j = {{"eps_md", r.eps_md},
            {"eps_fa", r.eps_fa},
            {"raw_md", r.raw_md},
            {"raw_fa", r.raw_fa},
            {"p0", {{"total", r.p0.total()}, {"truncation", r.p0.truncation}, {"collision", r.p0.collision},
                    {"power", r.p0.power}}},
            {"diagnostics",
             {{"cells", d.cells},
              {"cells_pruned", d.cells_pruned},
              {"q_evaluated", d.q_evaluated},
              {"q_unavailable", d.q_unavailable},
              {"q_samples", d.q_samples},
              {"q_seed", d.q_seed},
              {"md_clamped", d.md_clamped},
              {"fa_clamped", d.fa_clamped},
              {"k_low", d.k_low},
              {"k_high", d.k_high}}}};
  if (!r.terms.empty()) {
    json terms = json::array();
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    for (const auto& t : r.terms)
      terms.push_back({{"ka", t.ka}, {"ka_prime", t.ka_prime}, {"t", t.t}, {"tp", t.tp < 0 ? json(nullptr) : json(t.tp)},
                       {"kind", t.tp < 0 ? "md" : "fa"}, {"weight", t.weight}, {"p", num(t.p)}, {"q", num(t.q)},
                       {"xi", t.xi}, {"contribution", t.contribution}});
    j["terms"] = terms;
  }
  return j;
}

void emit_csv(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw rcu::ConfigError("cannot write " + path);
  out << text;
}

void emit_manifest(const std::string& path, const json& m) {
  if (path.empty()) {
    std::cerr << m.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw rcu::ConfigError("cannot write " + path);
  out << m.dump(2) << "\n";
}

rcu::RunConfig load(const std::string& path, unsigned threads_flag, Manifest& man) {
  rcu::RunConfig c = rcu::parse_config(load_json(path));
  if (threads_flag > 0) c.eval.threads = threads_flag;
  man.threads = c.eval.threads > 0 ? c.eval.threads : rcu::default_thread_count();
  man.config = rcu::effective_config(c);
  c.eval.threads = man.threads;
  return c;
}

int cmd_bound(const std::string& path, unsigned threads, bool terms) {
  Manifest man{"bound"};
  rcu::RunConfig c = load(path, threads, man);
  if (terms) c.eval.keep_terms = true;
  const auto act = c.activity();
  json out;
  rcu::BoundResult r;
  double ratio = 0.0;
  double db = c.resolved_ebn0();
  if (auto sys = c.fixed_system()) {
    r = rcu::assemble_bound(*sys, act, c.policy, c.qpolicy, c.eval);
    ratio = sys->codebook_power / sys->power;
  } else {
    rcu::SolveRequest req = c.solve_request();
    req.radii = {c.policy.radius};
    const rcu::SolvePoint best = rcu::optimize_knobs(req, db);
    ratio = best.ratio;
    r = rcu::assemble_bound(c.system_at(db, ratio), act, c.policy, c.qpolicy, c.eval);
  }
  out["result"] = bound_json(r);
  out["result"]["ebn0_db"] = db;
  out["result"]["pprime_ratio"] = ratio;
  out["manifest"] = man.to_json();
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_tradeoff(const std::string& path, const std::string& grid, const std::string& radii_arg, unsigned threads,
                 const std::string& out_path, const std::string& manifest_path) {
  Manifest man{"tradeoff"};
  rcu::RunConfig c = load(path, threads, man);
  std::vector<double> dbs = parse_list(grid);
  std::sort(dbs.begin(), dbs.end());
  std::vector<int> radii = c.radii;
  if (!radii_arg.empty()) {
    radii.clear();
    for (double r : parse_list(radii_arg)) radii.push_back(static_cast<int>(r));
  }
  std::sort(radii.begin(), radii.end());
  const auto act = c.activity();
  std::ostringstream csv;
  csv << "ebn0_db,radius,eps_md,eps_fa,floor_md,floor_fa\n";
  json rows = json::array();
  for (double db : dbs) {
    for (int r : radii) {
      rcu::DecoderPolicy pol = c.policy;
      pol.radius = r;
      rcu::SolveRequest req = c.solve_request();
      req.radii = {r};
      req.policy = pol;
      const rcu::SolvePoint best = rcu::optimize_knobs(req, db);
      const rcu::FloorResult fl = rcu::error_floor(c.system_at(db, best.ratio), act, pol, c.eval.collision);
      csv << fmt(db) << ',' << r << ',' << fmt(best.eps_md) << ',' << fmt(best.eps_fa) << ','
          << fmt(fl.eps_md_floor) << ',' << fmt(fl.eps_fa_floor) << '\n';
      rows.push_back({{"ebn0_db", db}, {"radius", r}, {"pprime_ratio", best.ratio}});
    }
  }
  emit_csv(out_path, csv.str());
  emit_manifest(manifest_path, man.to_json({{"knobs", rows}}));
  return kOk;
}

int cmd_ebno_curve(const std::string& path, const std::string& eka_arg, const std::string& scheme_arg,
                   unsigned threads, const std::string& out_path, const std::string& manifest_path) {
  Manifest man{"ebno-curve"};
  rcu::RunConfig c = load(path, threads, man);
  if (!scheme_arg.empty()) c.scheme = rcu::scheme_from_string(scheme_arg);
  man.config["solver"]["scheme"] = rcu::to_string(c.scheme);
  if (!std::holds_alternative<rcu::PoissonActivity>(c.activity_kind))
    throw rcu::ConfigError("ebno-curve needs a poisson activity");
  std::vector<double> ekas = parse_list(eka_arg);
  std::sort(ekas.begin(), ekas.end());
  std::ostringstream csv;
  csv << "e_ka,scheme,ebn0_db,pprime_ratio,radius,slots,eps_md,eps_fa,evaluations\n";
  json traces = json::array();
  for (double eka : ekas) {
    rcu::RunConfig ce = c;
    ce.activity_kind = rcu::PoissonActivity{eka};
    const rcu::SolveResult s = rcu::required_ebn0(ce.solve_request());
    csv << fmt(eka) << ',' << rcu::to_string(c.scheme) << ',' << fmt(s.ebn0_db) << ',' << fmt(s.point.ratio) << ','
        << s.point.radius << ',' << s.point.slots << ',' << fmt(s.point.eps_md) << ',' << fmt(s.point.eps_fa) << ','
        << s.evaluations << '\n';
    json tr = json::array();
    for (const auto& p : s.trace)
      tr.push_back({{"ebn0_db", p.ebn0_db}, {"pprime_ratio", p.ratio}, {"radius", p.radius}, {"slots", p.slots},
                    {"worst", p.worst()}, {"feasible", p.feasible}});
    traces.push_back({{"e_ka", eka}, {"trace", tr}, {"monotonicity_violated", s.monotonicity_violated}});
  }
  emit_csv(out_path, csv.str());
  emit_manifest(manifest_path, man.to_json({{"solves", traces}}));
  return kOk;
}

int cmd_simulate(const std::string& path, unsigned threads, const std::string& log_path, bool compare) {
  Manifest man{"simulate"};
  rcu::RunConfig c = load(path, threads, man);
  auto sys = c.fixed_system();
  if (!sys) throw rcu::ConfigError("simulate needs a fixed pprime or pprime_ratio");
  rcu::SimConfig sc;
  sc.system = *sys;
  sc.activity = c.activity();
  sc.policy = c.policy;
  sc.trials = c.sim_trials;
  sc.subset_cap = c.sim_subset_cap;
  sc.seed = c.sim_seed;
  sc.fixed_codebook = c.sim_fixed_codebook;
  sc.keep_log = !log_path.empty();
  sc.threads = c.eval.threads;
  const rcu::SimOutcome s = rcu::run_sim(sc);
  json out;
  out["simulation"] = {{"p_md_hat", s.p_md_hat}, {"p_fa_hat", s.p_fa_hat}, {"sigma_md", s.sigma_md},
                       {"sigma_fa", s.sigma_fa}, {"trials", s.trials}};
  if (compare) {
    const rcu::BoundResult b = rcu::assemble_bound(*sys, sc.activity, c.policy, c.qpolicy, c.eval);
    out["bound"] = bound_json(b);
    out["dominance"] = {{"md_ok", s.p_md_hat <= b.eps_md + 3.0 * s.sigma_md},
                        {"fa_ok", s.p_fa_hat <= b.eps_fa + 3.0 * s.sigma_fa}};
  }
  if (!log_path.empty()) {
    std::ostringstream csv;
    csv << "trial,ka,ka_estimate,list_size,misdetections,false_alarms\n";
    for (const auto& t : s.log)
      csv << t.trial << ',' << t.ka << ',' << t.ka_estimate << ',' << t.list_size << ',' << t.misdetections << ','
          << t.false_alarms << '\n';
    emit_csv(log_path, csv.str());
  }
  out["manifest"] = man.to_json();
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-coding bounds for unsourced random access with an unknown number of users"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: available cores)");

  std::string config;
  bool terms = false;
  auto* bound = app.add_subcommand("bound", "Evaluate the MD/FA bounds for one configuration (JSON)");
  bound->add_option("config", config, "JSON configuration")->required();
  bound->add_flag("--terms", terms, "Include every summand in the output");

  std::string grid, radii, out, manifest;
  auto* trade = app.add_subcommand("tradeoff", "MD/FA bounds and floors over an Eb/N0 grid (CSV)");
  trade->add_option("config", config, "JSON configuration")->required();
  trade->add_option("--ebn0", grid, "Comma-separated Eb/N0 values in dB")->required();
  trade->add_option("--radii", radii, "Comma-separated decoding radii (default: decoder.radii)");
  trade->add_option("--out", out, "CSV output path (default: stdout)");
  trade->add_option("--manifest", manifest, "Manifest output path (default: stderr)");

  std::string eka, scheme;
  auto* curve = app.add_subcommand("ebno-curve", "Required Eb/N0 versus E[K_a] (CSV)");
  curve->add_option("config", config, "JSON configuration")->required();
  curve->add_option("--eka", eka, "Comma-separated E[K_a] values")->required();
  curve->add_option("--scheme", scheme, "theorem1, known_ka or sampr (default: solver.scheme)");
  curve->add_option("--out", out, "CSV output path (default: stdout)");
  curve->add_option("--manifest", manifest, "Manifest output path (default: stderr)");

  std::string log;
  bool compare = false;
  auto* sim = app.add_subcommand("simulate", "Brute-force simulation of the random-access code (JSON)");
  sim->add_option("config", config, "JSON configuration")->required();
  sim->add_option("--log", log, "Per-trial CSV log path");
  sim->add_flag("--compare", compare, "Also evaluate the bound and report dominance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*bound) return cmd_bound(config, threads, terms);
    if (*trade) return cmd_tradeoff(config, grid, radii, threads, out, manifest);
    if (*curve) return cmd_ebno_curve(config, eka, scheme, threads, out, manifest);
    if (*sim) return cmd_simulate(config, threads, log, compare);
  } catch (const rcu::ResourceCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResourceCap;
  } catch (const rcu::BracketExhausted& e) {
    const auto& b = e.best();
    std::cerr << "error: " << e.what() << " (best: ebn0_db=" << b.ebn0_db << " pprime_ratio=" << b.ratio
              << " radius=" << b.radius << " slots=" << b.slots << " worst=" << b.worst() << ")\n";
    return kBracketExhausted;
  } catch (const rcu::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
