#include "dcsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dcsim/error.hpp"
#include "kernel.hpp"

namespace dcsim {
namespace detail {

PreparedRun prepare(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.delayed_choice) {
    const auto report = verify_delayed_choice_geometry(cfg.geometry);
    if (!report.pass) {
      throw GeometryError("choice event is " + std::string(to_string(report.separation)) +
                          " with respect to photon entry; refusing delayed-choice run");
    }
  }

  PreparedRun run;
  run.cfg = &cfg;
  InterferometerConfig off = cfg.optics;
  off.v_eom = 0.0;
  run.v_eom = {0.0, cfg.optics.v_eom};
  run.reflectivity = {reflectivity_from_voltage(off), reflectivity_from_voltage(cfg.optics)};
  run.p_dark = cfg.detector.dark_click_probability();
  run.n_chunks = (cfg.n_triggers + kChunkTriggers - 1) / kChunkTriggers;

  auto add_span = [&](std::uint64_t begin, std::uint64_t end, double phase) {
    PreparedSpan s{begin, end, phase, {}};
    for (int bit = 0; bit < 2; ++bit) {
      InterferometerConfig o = bit ? cfg.optics : off;
      o.phase = phase;
      s.p_d1[bit] = detection_probabilities(o).p_d1;
    }
    run.spans.push_back(s);
  };
  if (cfg.phase_schedule.empty()) {
    add_span(0, cfg.n_triggers, cfg.optics.phase);
  } else {
    std::uint64_t at = 0;
    for (const auto& ps : cfg.phase_schedule) {
      if (ps.triggers == 0) continue;
      add_span(at, at + ps.triggers, ps.phase);
      at += ps.triggers;
    }
  }
  return run;
}

}  // namespace detail

namespace {

struct RawCounts {
  std::uint64_t n1 = 0, n2 = 0, nc = 0, nt = 0;

  void add(const TriggerRecord& r) {
    ++nt;
    n1 += r.click_p1;
    n2 += r.click_p2;
    nc += (r.click_p1 && r.click_p2);
  }
  RawCounts& operator+=(const RawCounts& o) {
    n1 += o.n1;
    n2 += o.n2;
    nc += o.nc;
    nt += o.nt;
    return *this;
  }
};

// Accumulator indexed by span * 2 + choice bit.
struct SpanAccumulator {
  const detail::PreparedRun& run;
  std::vector<RawCounts> cells;
  std::size_t span = 0;

  explicit SpanAccumulator(const detail::PreparedRun& r) : run(r), cells(r.spans.size() * 2) {}

  void operator()(const TriggerRecord& rec) {
    const auto i = rec.trigger_index;
    if (i < run.spans[span].begin || i >= run.spans[span].end) {
      const auto it = std::upper_bound(
          run.spans.begin(), run.spans.end(), i,
          [](std::uint64_t v, const detail::PreparedSpan& s) { return v < s.end; });
      span = static_cast<std::size_t>(it - run.spans.begin());
    }
    cells[span * 2 + rec.choice_bit].add(rec);
  }
};

ConfigurationCounts to_configuration_counts(const detail::PreparedRun& run,
                                            const std::vector<RawCounts>& cells) {
  const RunConfig& cfg = *run.cfg;
  ConfigurationCounts out;
  for (std::size_t s = 0; s < run.spans.size(); ++s) {
    for (std::uint8_t bit = 0; bit < 2; ++bit) {
      const RawCounts& c = cells[s * 2 + bit];
      if (c.nt == 0) continue;
      out[{bit, run.spans[s].phase, cfg.blocked_path}] += CountSummary::from_counts(
          c.n1, c.n2, c.nc, c.nt, static_cast<double>(c.nt) * cfg.detector.gate);
    }
  }
  return out;
}

}  // namespace

double DetectorModel::dark_click_probability() const {
  return -std::expm1(-dark_rate * gate);
}

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw ConfigError("detector efficiency must lie in [0, 1]");
  }
  if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) {
    throw ConfigError("dark_rate must be >= 0");
  }
  if (!(gate > 0.0) || !std::isfinite(gate)) throw ConfigError("gate must be positive");
}

void RunConfig::validate() const {
  if (n_triggers == 0) throw ConfigError("n_triggers must be positive");
  emission.validate();
  optics.validate();
  detector.validate();
  geometry.validate();
  if (!std::isfinite(qrng_offset)) throw ConfigError("qrng offset must be finite");
  if (!phase_schedule.empty()) {
    std::uint64_t total = 0;
    for (const auto& s : phase_schedule) {
      if (!std::isfinite(s.phase)) throw ConfigError("phase schedule contains a non-finite phase");
      total += s.triggers;
    }
    if (total != n_triggers) {
      throw ConfigError("phase schedule covers " + std::to_string(total) + " triggers, run has " +
                        std::to_string(n_triggers));
    }
  }
}

EventLog run_experiment(const RunConfig& cfg) {
  const auto run = detail::prepare(cfg);
  EventLog log;
  log.config_digest = config_digest(cfg);
  log.records.resize(cfg.n_triggers);
  const auto n_chunks = static_cast<std::int64_t>(run.n_chunks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    detail::simulate_chunk(run, static_cast<std::uint64_t>(c),
                           [&](const TriggerRecord& r) { log.records[r.trigger_index] = r; });
  }
  return log;
}

EventLog run_experiment_serial(const RunConfig& cfg) {
  const auto run = detail::prepare(cfg);
  EventLog log;
  log.config_digest = config_digest(cfg);
  log.records.reserve(cfg.n_triggers);
  for (std::uint64_t c = 0; c < run.n_chunks; ++c) {
    detail::simulate_chunk(run, c, [&](const TriggerRecord& r) { log.records.push_back(r); });
  }
  return log;
}

ConfigurationCounts simulate_counts(const RunConfig& cfg) {
  const auto run = detail::prepare(cfg);
  std::vector<RawCounts> total(run.spans.size() * 2);
  const auto n_chunks = static_cast<std::int64_t>(run.n_chunks);
#pragma omp parallel
  {
    SpanAccumulator local(run);
#pragma omp for schedule(dynamic)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      detail::simulate_chunk(run, static_cast<std::uint64_t>(c), local);
    }
#pragma omp critical(dcsim_merge_counts)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += local.cells[i];
  }
  return to_configuration_counts(run, total);
}

ConfigurationCounts simulate_counts_serial(const RunConfig& cfg) {
  const auto run = detail::prepare(cfg);
  SpanAccumulator acc(run);
  for (std::uint64_t c = 0; c < run.n_chunks; ++c) detail::simulate_chunk(run, c, acc);
  return to_configuration_counts(run, acc.cells);
}

std::vector<PhaseSpan> make_phase_schedule(std::span<const double> phases,
                                           std::uint64_t triggers_per_point) {
  std::vector<PhaseSpan> schedule;
  schedule.reserve(phases.size());
  for (double p : phases) schedule.push_back({p, triggers_per_point});
  return schedule;
}

std::vector<double> uniform_phases(std::size_t count) {
  std::vector<double> phases(count);
  for (std::size_t k = 0; k < count; ++k) {
    phases[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
  }
  return phases;
}

EventLog run_phase_scan(RunConfig cfg, std::span<const double> phases,
                        std::uint64_t triggers_per_point) {
  if (phases.empty() || triggers_per_point == 0) {
    throw ConfigError("phase scan needs at least one phase and one trigger per point");
  }
  cfg.phase_schedule = make_phase_schedule(phases, triggers_per_point);
  cfg.n_triggers = phases.size() * triggers_per_point;
  return run_experiment(cfg);
}

EventLog run_blocked_path(RunConfig cfg, BlockedPath which) {
  if (which == BlockedPath::none) throw ConfigError("blocked-path run needs path1 or path2");
  cfg.blocked_path = which;
  return run_experiment(cfg);
}

EventLog run_alpha_measurement(RunConfig cfg) {
  cfg.choice_mode = ChoiceMode::forced_zero;
  cfg.blocked_path = BlockedPath::none;
  return run_experiment(cfg);
}

}  // namespace dcsim
