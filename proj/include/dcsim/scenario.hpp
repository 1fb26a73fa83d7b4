#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dcsim/simulator.hpp"

namespace dcsim {

enum class ScenarioKind { fringe_scan, blocked_path, alpha, duality_sweep, causality_check };

std::string_view to_string(ScenarioKind kind);

struct SweepPoint {
  double v_eom = 0.0;
  double r_nominal = 0.0;
};

/// A fully validated run description with every default filled in.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::fringe_scan;
  /// Template run; n_triggers and phase schedule are set per sub-run.
  RunConfig run;
  std::uint64_t triggers = 100000;  ///< per fringe point, per blocked run, or per alpha run
  std::vector<double> phases;       ///< fringe phases, radians
  std::vector<SweepPoint> sweep;    ///< duality_sweep only
  bool save_event_log = true;
  bool subtract_dark = true;
  /// Canonical form of the scenario (key-sorted, defaults filled).
  nlohmann::json canonical;
};

/// Parses and validates a JSON scenario. Errors name the offending key path.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_config(const std::filesystem::path& path);

/// Seed / trigger-count overrides from the command line.
void apply_overrides(Scenario& scenario, std::optional<std::uint64_t> seed,
                     std::optional<std::uint64_t> triggers);

/// Stable under key reordering of the source file.
std::string scenario_digest(const Scenario& scenario);

struct RunManifest {
  std::string scenario_digest;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> outputs;
  std::string started;
  std::string finished;
  std::string software_version;
  std::vector<std::pair<std::string, bool>> checks;
  bool passed = true;
};

struct ExecuteOptions {
  std::filesystem::path output_dir = ".";
  int verbosity = 0;
  std::ostream* log = nullptr;  ///< progress messages when non-null
};

/// Runs the scenario, writes the event logs and result tables into
/// output_dir, and records every pass/fail check in the manifest.
/// Throws GeometryError when a delayed-choice run is not space-like.
RunManifest execute(const Scenario& scenario, const ExecuteOptions& options);

inline constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace dcsim
