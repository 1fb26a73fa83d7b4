#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcsim/counts.hpp"
#include "dcsim/optics.hpp"
#include "dcsim/source.hpp"
#include "dcsim/timing.hpp"

namespace dcsim {

inline constexpr int kEventLogFormatVersion = 1;

/// Triggers per independently seeded work unit. Part of the reproducibility
/// contract: changing it changes every simulated log.
inline constexpr std::uint64_t kChunkTriggers = 1u << 14;

struct DetectorModel {
  double efficiency = 1.0;   ///< per-photon detection probability
  double dark_rate = 60.0;   ///< counts/s per detector
  double gate = 238e-9;      ///< s of dark-count exposure per trigger

  /// P(at least one dark count in a gate).
  double dark_click_probability() const;
  void validate() const;
};

/// How the configuration bit of each trigger is chosen.
enum class ChoiceMode : std::uint8_t {
  qrng,         ///< shot-noise comparator (delayed-choice operation)
  forced_zero,  ///< output splitter always removed
  forced_one,   ///< output splitter always at the configured voltage
};

struct PhaseSpan {
  double phase = 0.0;
  std::uint64_t triggers = 0;
};

struct RunConfig {
  std::uint64_t n_triggers = 0;
  EmissionModel emission;
  /// v_eom is the voltage applied when the choice bit is 1; bit 0 applies 0 V.
  InterferometerConfig optics;
  /// Consecutive spans covering [0, n_triggers). Empty: optics.phase throughout.
  std::vector<PhaseSpan> phase_schedule;
  BlockedPath blocked_path = BlockedPath::none;
  DetectorModel detector;
  GeometryConfig geometry;
  std::uint64_t seed = 0;
  ChoiceMode choice_mode = ChoiceMode::qrng;
  double qrng_offset = 0.0;
  /// Refuse to run unless the choice is space-like separated from photon entry.
  bool delayed_choice = true;

  void validate() const;
};

struct TriggerRecord {
  std::uint64_t trigger_index = 0;
  std::uint8_t choice_bit = 0;
  double applied_v_eom = 0.0;
  double phase = 0.0;
  BlockedPath blocked = BlockedPath::none;
  bool click_p1 = false;
  bool click_p2 = false;
  /// Simulation ground truth; never read by the estimators.
  std::uint8_t photon_count_emitted = 0;

  bool operator==(const TriggerRecord&) const = default;
};

struct EventLog {
  int format_version = kEventLogFormatVersion;
  std::string config_digest;
  std::vector<TriggerRecord> records;
};

/// FNV-1a digest of every field of the configuration, as 16 hex digits.
std::string config_digest(const RunConfig& cfg);

/// Simulates every trigger of `cfg`. Work is split into kChunkTriggers-sized
/// chunks processed with OpenMP; the result does not depend on thread count.
EventLog run_experiment(const RunConfig& cfg);

/// Single-threaded reference for run_experiment; output is identical.
EventLog run_experiment_serial(const RunConfig& cfg);

/// Same engine as run_experiment, reduced on the fly to per-configuration
/// counts. Equivalent to sort_by_configuration(run_experiment(cfg)).
ConfigurationCounts simulate_counts(const RunConfig& cfg);
ConfigurationCounts simulate_counts_serial(const RunConfig& cfg);

/// Phase schedule with `triggers_per_point` triggers per phase, in order.
std::vector<PhaseSpan> make_phase_schedule(std::span<const double> phases,
                                           std::uint64_t triggers_per_point);

/// `count` equally spaced phases on [0, 2 pi).
std::vector<double> uniform_phases(std::size_t count);

EventLog run_phase_scan(RunConfig cfg, std::span<const double> phases,
                        std::uint64_t triggers_per_point);
EventLog run_blocked_path(RunConfig cfg, BlockedPath which);
/// Forces the choice to 0 (splitter removed) with both paths open.
EventLog run_alpha_measurement(RunConfig cfg);

void write_event_log(std::ostream& out, const EventLog& log);
void write_event_log(const std::string& path, const EventLog& log);
/// Throws ParseError with the 1-based line number of the first bad line.
EventLog read_event_log(std::istream& in);
EventLog read_event_log(const std::string& path);

/// Parses one record line (no trailing newline).
TriggerRecord parse_trigger_record(std::string_view line, std::size_t line_number);
std::string format_trigger_record(const TriggerRecord& r);

}  // namespace dcsim
