#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "dcsim/analysis.hpp"
#include "dcsim/error.hpp"
#include "dcsim/random.hpp"
#include "dcsim/scenario.hpp"

namespace dcsim {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// Seed stream families for the sub-runs of a scenario.
constexpr std::uint64_t kBlockedStream = 10;
constexpr std::uint64_t kSweepStream = 100;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double nominal_reflectivity(const RunConfig& run, double v_eom) {
  InterferometerConfig o = run.optics;
  o.v_eom = v_eom;
  return reflectivity_from_voltage(o);
}

ordered_json estimate_json(const Estimate& e) { return {{"value", e.value}, {"error", e.error}}; }

class Session {
 public:
  Session(const Scenario& s, const ExecuteOptions& opt) : s_(s), opt_(opt) {
    manifest_.scenario_digest = scenario_digest(s);
    manifest_.seed = s.run.seed;
    manifest_.software_version = kSoftwareVersion;
    manifest_.started = utc_now();
    fs::create_directories(opt.output_dir);
    summary_["scenario"] = s.name;
    summary_["kind"] = std::string(to_string(s.kind));
    summary_["digest"] = manifest_.scenario_digest;
    summary_["seed"] = s.run.seed;
  }

  void say(const std::string& msg) const {
    if (opt_.log != nullptr && opt_.verbosity > 0) *opt_.log << msg << '\n';
  }

  void check(const std::string& name, bool ok) {
    manifest_.checks.emplace_back(name, ok);
    manifest_.passed = manifest_.passed && ok;
    summary_["checks"][name] = ok;
  }

  fs::path output(const std::string& file) {
    const auto p = opt_.output_dir / file;
    manifest_.outputs.push_back(p);
    return p;
  }

  void write_text(const std::string& file, const std::string& text) {
    std::ofstream out(output(file), std::ios::binary);
    if (!out) throw Error("cannot write " + file);
    out << text;
    if (!out) throw Error("write failed: " + file);
  }

  // Counts of one run, persisting the event log when requested.
  ConfigurationCounts simulate(const RunConfig& cfg, const std::string& log_file) {
    if (!s_.save_event_log) return simulate_counts(cfg);
    const EventLog log = run_experiment(cfg);
    write_event_log(output(log_file).string(), log);
    return sort_by_configuration(log, cfg.detector.gate);
  }

  CountSummary corrected(const CountSummary& raw) const {
    return s_.subtract_dark ? subtract_dark_counts(raw, s_.run.detector) : raw;
  }

  void causality() {
    const auto rep = verify_delayed_choice_geometry(s_.run.geometry);
    summary_["causality"] = {
        {"separation", std::string(to_string(rep.separation))},
        {"margin_ns", rep.margin_ns},
        {"choice_position_m", rep.choice.x},
        {"choice_delay_ns", rep.choice.t * 1e9},
    };
    say(fmt::format("causality: {}, margin {:.3f} ns", to_string(rep.separation), rep.margin_ns));
    if (s_.kind == ScenarioKind::causality_check) {
      check("causality_spacelike", rep.pass);
      return;
    }
    if (s_.run.delayed_choice) {
      if (!rep.pass) {
        throw GeometryError(fmt::format(
            "choice event is {} (margin {:.3f} ns); refusing delayed-choice run",
            to_string(rep.separation), rep.margin_ns));
      }
      check("causality_spacelike", true);
    }
  }

  /// Phase scan on `cfg`; appends bit-resolved rows to `table` and returns
  /// the fits keyed by choice bit (absent when the bit never occurred).
  std::array<std::optional<FringeFit>, 2> fringe(RunConfig cfg, const std::string& log_file,
                                                 fmt::memory_buffer& table,
                                                 ordered_json& out) {
    cfg.phase_schedule = make_phase_schedule(s_.phases, s_.triggers);
    cfg.n_triggers = s_.phases.size() * s_.triggers;
    const auto counts = simulate(cfg, log_file);

    std::array<std::optional<FringeFit>, 2> fits;
    for (std::uint8_t bit = 0; bit < 2; ++bit) {
      auto points = fringe_points(counts, bit);
      if (points.empty()) continue;
      const double v_eom = bit ? cfg.optics.v_eom : 0.0;
      const double r = nominal_reflectivity(cfg, v_eom);
      for (auto& p : points) {
        const CountSummary raw = p.counts;
        p.counts = corrected(raw);
        fmt::format_to(std::back_inserter(table),
                       "{:.3f},{:.6f},{},{:.6f},{},{:.0f},{:.0f},{:.4f},{:.4f},{:.4f},{:.4f}\n",
                       v_eom, r, bit, p.phase, p.counts.n_triggers, raw.n1, raw.n2, p.counts.n1,
                       p.counts.n2, std::sqrt(p.counts.var_n1), std::sqrt(p.counts.var_n2));
      }
      ordered_json entry{{"choice_bit", bit},
                         {"v_eom", v_eom},
                         {"reflectivity", r},
                         {"visibility_theory", theoretical_visibility(r, cfg.optics.xi)}};
      try {
        const FringeFit fit = fit_fringe_visibility(points);
        entry["visibility"] = estimate_json(fit.visibility);
        entry["phase_offset"] = fit.phase_offset;
        entry["mean_level"] = fit.mean_level;
        entry["chi2"] = fit.chi2;
        entry["dof"] = fit.dof;
        entry["phase_identifiable"] = fit.phase_identifiable;
        entry["consistent_with_zero_3sigma"] = visibility_consistent_with_zero(fit, 3.0);
        fits[bit] = fit;
      } catch (const FitDegenerateError& e) {
        entry["fit_error"] = e.what();
      }
      out.push_back(entry);
    }
    return fits;
  }

  struct BlockedResult {
    std::array<std::optional<CountSummary>, 2> path2_blocked;  // by choice bit
    std::array<std::optional<CountSummary>, 2> path1_blocked;
  };

  BlockedResult blocked(const RunConfig& base, std::uint64_t stream, const std::string& prefix,
                        fmt::memory_buffer& table) {
    BlockedResult res;
    for (auto which : {BlockedPath::path2, BlockedPath::path1}) {
      RunConfig cfg = base;
      cfg.blocked_path = which;
      cfg.phase_schedule.clear();
      cfg.n_triggers = s_.triggers;
      cfg.seed = derive_seed(base.seed, stream, static_cast<std::uint64_t>(which));
      const int path = static_cast<int>(which);
      const auto counts = simulate(cfg, fmt::format("{}events_path{}_blocked.csv", prefix, path));
      for (std::uint8_t bit = 0; bit < 2; ++bit) {
        const CountSummary raw = total_for(counts, bit, which);
        if (raw.n_triggers == 0) continue;
        const CountSummary c = corrected(raw);
        const double v_eom = bit ? cfg.optics.v_eom : 0.0;
        fmt::format_to(std::back_inserter(table), "{:.3f},{:.6f},{},{},{},{:.0f},{:.0f},{:.4f},{:.4f}\n",
                       v_eom, nominal_reflectivity(cfg, v_eom), path, bit, c.n_triggers, raw.n1,
                       raw.n2, c.n1, c.n2);
        (which == BlockedPath::path2 ? res.path2_blocked : res.path1_blocked)[bit] = c;
      }
    }
    return res;
  }

  void run_fringe_scan() {
    fmt::memory_buffer table;
    ordered_json fits = ordered_json::array();
    const auto result = fringe(s_.run, "events.csv", table, fits);
    write_fringe_table(table);
    summary_["fringe"] = fits;
    if (s_.run.choice_mode == ChoiceMode::qrng || s_.run.choice_mode == ChoiceMode::forced_zero) {
      check("null_visibility_at_r0", result[0] && visibility_consistent_with_zero(*result[0]));
    }
  }

  void run_blocked_path() {
    fmt::memory_buffer table;
    const auto res = blocked(s_.run, kBlockedStream, "", table);
    write_blocked_table(table);
    ordered_json entries = ordered_json::array();
    for (std::uint8_t bit = 0; bit < 2; ++bit) {
      if (!res.path1_blocked[bit] || !res.path2_blocked[bit]) continue;
      const double v_eom = bit ? s_.run.optics.v_eom : 0.0;
      const double r = nominal_reflectivity(s_.run, v_eom);
      ordered_json e{{"choice_bit", bit}, {"v_eom", v_eom}, {"reflectivity", r}};
      try {
        e["distinguishability"] = estimate_json(
            estimate_distinguishability(*res.path2_blocked[bit], *res.path1_blocked[bit]));
      } catch (const InsufficientDataError& err) {
        e["error"] = err.what();
      }
      if (r <= 0.5) e["distinguishability_theory"] = theoretical_distinguishability(r);
      entries.push_back(e);
    }
    summary_["distinguishability"] = entries;
  }

  void run_alpha() {
    RunConfig cfg = s_.run;
    cfg.n_triggers = s_.triggers;
    cfg.phase_schedule.clear();
    cfg.choice_mode = ChoiceMode::forced_zero;
    cfg.blocked_path = BlockedPath::none;
    const auto counts = simulate(cfg, "events.csv");
    const CountSummary raw = total_for(counts, 0, BlockedPath::none);
    const CountSummary c = corrected(raw);
    ordered_json a{{"n_triggers", c.n_triggers}, {"n1", raw.n1}, {"n2", raw.n2},
                   {"n_coinc", raw.n_coinc},     {"n1_corrected", c.n1},
                   {"n2_corrected", c.n2},       {"n_coinc_corrected", c.n_coinc},
                   {"alpha_theory", theoretical_alpha(cfg.emission)}};
    try {
      const Estimate alpha = estimate_alpha(c);
      a["alpha"] = estimate_json(alpha);
      check("alpha_subpoissonian", alpha.value + 3.0 * alpha.error < 1.0);
    } catch (const UndefinedStatisticError& e) {
      a["error"] = e.what();
      check("alpha_subpoissonian", false);
    }
    summary_["alpha"] = a;
  }

  void run_duality_sweep() {
    fmt::memory_buffer fringe_table;
    fmt::memory_buffer blocked_table;
    fmt::memory_buffer sweep_table;
    fmt::format_to(std::back_inserter(sweep_table),
                   "v_eom,reflectivity,V,sigma_V,D,sigma_D,V2,D2,V2_plus_D2,sigma_s,V_theory,"
                   "D_theory,pass\n");
    ordered_json points = ordered_json::array();
    bool all_pass = true;
    double s_sum = 0.0, s_var = 0.0;
    std::size_t n_ok = 0;

    for (std::size_t k = 0; k < s_.sweep.size(); ++k) {
      const auto& sp = s_.sweep[k];
      RunConfig cfg = s_.run;
      cfg.optics.v_eom = sp.v_eom;
      cfg.choice_mode = s_.run.choice_mode;
      cfg.seed = derive_seed(s_.run.seed, kSweepStream + k, 0);
      say(fmt::format("sweep point {}/{}: V_EOM = {:.1f} V, R = {:.4f}", k + 1, s_.sweep.size(),
                      sp.v_eom, sp.r_nominal));

      ordered_json fits = ordered_json::array();
      const auto f = fringe(cfg, fmt::format("sweep{:02d}_events_fringe.csv", k), fringe_table,
                            fits);
      const auto b = blocked(cfg, kBlockedStream, fmt::format("sweep{:02d}_", k), blocked_table);

      // The splitter-on configuration is choice bit 1 unless the choice is forced to 0.
      const std::uint8_t bit = cfg.choice_mode == ChoiceMode::forced_zero ? 0 : 1;
      ordered_json entry{{"v_eom", sp.v_eom}, {"reflectivity", sp.r_nominal}};
      const bool have = f[bit] && b.path1_blocked[bit] && b.path2_blocked[bit];
      bool ok = false;
      if (have) {
        try {
          const Estimate d =
              estimate_distinguishability(*b.path2_blocked[bit], *b.path1_blocked[bit]);
          const auto res = complementarity_statistic(f[bit]->visibility, d, sp.r_nominal);
          ok = res.pass;
          const double v_th = theoretical_visibility(sp.r_nominal, cfg.optics.xi);
          const double d_th = sp.r_nominal <= 0.5 ? theoretical_distinguishability(sp.r_nominal)
                                                  : std::nan("");
          fmt::format_to(std::back_inserter(sweep_table),
                         "{:.3f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},"
                         "{:.6f},{:.6f},{}\n",
                         sp.v_eom, sp.r_nominal, res.v.value, res.v.error, res.d.value,
                         res.d.error, res.v.value * res.v.value, res.d.value * res.d.value,
                         res.s.value, res.s.error, v_th, d_th, ok ? 1 : 0);
          entry["V"] = estimate_json(res.v);
          entry["D"] = estimate_json(res.d);
          entry["V2_plus_D2"] = estimate_json(res.s);
          entry["pass"] = ok;
          s_sum += res.s.value;
          s_var += res.s.error * res.s.error;
          ++n_ok;
        } catch (const Error& e) {
          entry["error"] = e.what();
        }
      } else {
        entry["error"] = "configuration produced no usable fringe or blocked-path data";
      }
      all_pass = all_pass && ok;
      entry["fringe"] = fits;
      points.push_back(entry);
    }

    write_fringe_table(fringe_table);
    write_blocked_table(blocked_table);
    write_text("sweep.csv", fmt::to_string(sweep_table));
    summary_["sweep"] = points;
    if (n_ok > 0) {
      const double n = static_cast<double>(n_ok);
      summary_["V2_plus_D2_mean"] = {{"value", s_sum / n}, {"error", std::sqrt(s_var) / n}};
    }
    check("duality_bound", all_pass);
  }

  void write_fringe_table(const fmt::memory_buffer& rows) {
    write_text("fringe.csv",
               "v_eom,reflectivity,choice_bit,phase,n_triggers,n1_raw,n2_raw,n1,n2,sigma_n1,"
               "sigma_n2\n" +
                   fmt::to_string(rows));
  }

  void write_blocked_table(const fmt::memory_buffer& rows) {
    write_text("blocked.csv",
               "v_eom,reflectivity,blocked_path,choice_bit,n_triggers,n1_raw,n2_raw,n1,n2\n" +
                   fmt::to_string(rows));
  }

  RunManifest finish() {
    summary_["passed"] = manifest_.passed;
    write_text("summary.json", summary_.dump(2) + "\n");
    manifest_.finished = utc_now();

    ordered_json m{{"scenario", s_.name},
                   {"scenario_digest", manifest_.scenario_digest},
                   {"seed", manifest_.seed},
                   {"software_version", manifest_.software_version},
                   {"started", manifest_.started},
                   {"finished", manifest_.finished},
                   {"passed", manifest_.passed},
                   {"config", s_.canonical}};
    for (const auto& p : manifest_.outputs) m["outputs"].push_back(p.filename().string());
    for (const auto& [name, ok] : manifest_.checks) m["checks"][name] = ok;
    std::ofstream out(opt_.output_dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw Error("cannot write manifest.json");
    return manifest_;
  }

 private:
  const Scenario& s_;
  const ExecuteOptions& opt_;
  RunManifest manifest_;
  ordered_json summary_;
};

}  // namespace

RunManifest execute(const Scenario& scenario, const ExecuteOptions& options) {
  check_reference_timing();
  Session session(scenario, options);
  session.causality();
  switch (scenario.kind) {
    case ScenarioKind::fringe_scan: session.run_fringe_scan(); break;
    case ScenarioKind::blocked_path: session.run_blocked_path(); break;
    case ScenarioKind::alpha: session.run_alpha(); break;
    case ScenarioKind::duality_sweep: session.run_duality_sweep(); break;
    case ScenarioKind::causality_check: break;
  }
  return session.finish();
}

}  // namespace dcsim
