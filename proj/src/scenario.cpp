#include "dcsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <fmt/format.h>

#include "dcsim/digest.hpp"
#include "dcsim/error.hpp"

namespace dcsim {
namespace {

using nlohmann::json;

// Read access to one JSON object that remembers which keys were used, so
// that typos are reported instead of silently ignored.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("", "must be an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  double number(const char* key, double fallback) {
    if (!mark(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  double non_negative(const char* key, double fallback) {
    const double d = number(key, fallback);
    if (d < 0.0) fail(key, fmt::format("must be >= 0, got {}", d));
    return d;
  }

  double positive(const char* key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) fail(key, fmt::format("must be > 0, got {}", d));
    return d;
  }

  double probability(const char* key, double fallback) {
    const double d = number(key, fallback);
    if (d < 0.0 || d > 1.0) fail(key, fmt::format("must lie in [0, 1], got {}", d));
    return d;
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) {
    if (!mark(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      fail(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) {
    if (!mark(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) {
    if (!mark(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  /// Raw node; null when absent.
  const json& raw(const char* key) {
    static const json null_node;
    return mark(key) ? node_.at(key) : null_node;
  }

  Section child(const char* key) {
    static const json empty = json::object();
    return Section(mark(key) ? node_.at(key) : empty, join(key));
  }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!used_.contains(key)) fail(key, "unknown key");
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view msg) const {
    throw ParseError(fmt::format("config key '{}': {}", join(key), msg));
  }

  std::string join(std::string_view key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

 private:
  bool mark(const char* key) {
    used_.insert(key);
    return node_.contains(key);
  }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

ScenarioKind parse_kind(Section& root) {
  if (!root.has("kind")) root.fail("kind", "is required");
  const auto k = root.text("kind", "");
  if (k == "fringe_scan") return ScenarioKind::fringe_scan;
  if (k == "blocked_path") return ScenarioKind::blocked_path;
  if (k == "alpha") return ScenarioKind::alpha;
  if (k == "duality_sweep") return ScenarioKind::duality_sweep;
  if (k == "causality_check") return ScenarioKind::causality_check;
  root.fail("kind", fmt::format("unknown scenario kind '{}'", k));
}

std::string_view to_string(ChoiceMode m) {
  switch (m) {
    case ChoiceMode::qrng: return "qrng";
    case ChoiceMode::forced_zero: return "forced_zero";
    case ChoiceMode::forced_one: return "forced_one";
  }
  return "qrng";
}

json build_canonical(const Scenario& s) {
  const RunConfig& r = s.run;
  json sweep = json::array();
  for (const auto& p : s.sweep) sweep.push_back(p.v_eom);
  return json{
      {"name", s.name},
      {"kind", std::string(to_string(s.kind))},
      {"seed", r.seed},
      {"triggers", s.triggers},
      {"phases", s.phases},
      {"interferometer",
       {{"beta_deg", r.optics.beta_deg},
        {"v_pi", r.optics.v_pi},
        {"v_eom", r.optics.v_eom},
        {"phase", r.optics.phase},
        {"xi", r.optics.xi}}},
      {"source", {{"p1", r.emission.p1}, {"p2", r.emission.p2}}},
      {"detector",
       {{"efficiency", r.detector.efficiency},
        {"dark_rate", r.detector.dark_rate},
        {"gate", r.detector.gate}}},
      {"geometry",
       {{"path_length", r.geometry.path_length},
        {"flight_time", r.geometry.flight_time},
        {"clock_period", r.geometry.clock_period},
        {"choice_position", r.geometry.choice_position},
        {"choice_delay", r.geometry.choice_delay}}},
      {"choice", {{"mode", std::string(to_string(r.choice_mode))}, {"offset", r.qrng_offset}}},
      {"delayed_choice", r.delayed_choice},
      {"sweep", sweep},
      {"outputs", {{"event_log", s.save_event_log}}},
      {"subtract_dark", s.subtract_dark},
  };
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::fringe_scan: return "fringe_scan";
    case ScenarioKind::blocked_path: return "blocked_path";
    case ScenarioKind::alpha: return "alpha";
    case ScenarioKind::duality_sweep: return "duality_sweep";
    case ScenarioKind::causality_check: return "causality_check";
  }
  return "unknown";
}

Scenario parse_scenario(const json& doc) {
  Section root(doc, "");
  Scenario s;
  s.kind = parse_kind(root);
  s.name = root.text("name", std::string(to_string(s.kind)));
  RunConfig& run = s.run;
  run.seed = root.count("seed", 1);

  const bool is_alpha = s.kind == ScenarioKind::alpha;
  const bool is_sweep = s.kind == ScenarioKind::duality_sweep;
  s.triggers = root.count("triggers", is_alpha ? 10'000'000 : 100'000);
  if (s.triggers == 0) root.fail("triggers", "must be positive");

  // Phases: either a point count spread over [0, 2 pi) or explicit radians.
  const json& phases = root.raw("phases");
  if (phases.is_null()) {
    s.phases = uniform_phases(20);
  } else if (phases.is_number_integer()) {
    const auto n = phases.get<std::int64_t>();
    if (n < 1) root.fail("phases", "point count must be positive");
    s.phases = uniform_phases(static_cast<std::size_t>(n));
  } else if (phases.is_array()) {
    for (const auto& p : phases) {
      if (!p.is_number()) root.fail("phases", "entries must be numbers (radians)");
      s.phases.push_back(p.get<double>());
    }
    if (s.phases.empty()) root.fail("phases", "must not be empty");
  } else {
    root.fail("phases", "must be a point count or a list of radians");
  }

  {
    auto ifm = root.child("interferometer");
    run.optics.beta_deg = ifm.number("beta_deg", 24.0);
    if (run.optics.beta_deg < 0.0 || run.optics.beta_deg > 45.0) {
      ifm.fail("beta_deg", "must lie in [0, 45]");
    }
    run.optics.v_pi = ifm.positive("v_pi", 217.0);
    if (ifm.has("v_eom") && ifm.has("reflectivity")) {
      ifm.fail("reflectivity", "give either v_eom or reflectivity, not both");
    }
    run.optics.v_eom = ifm.non_negative("v_eom", 0.0);
    if (ifm.has("reflectivity")) {
      const double r = ifm.probability("reflectivity", 0.0);
      try {
        run.optics.v_eom = voltage_for_reflectivity(run.optics.beta_deg, run.optics.v_pi, r);
      } catch (const DomainError& e) {
        ifm.fail("reflectivity", e.what());
      }
    }
    run.optics.phase = ifm.number("phase", 0.0);
    run.optics.xi = ifm.probability("xi", 1.0);
    ifm.finish();
  }
  {
    auto src = root.child("source");
    const double p1 = src.probability("p1", 0.02);
    if (src.has("alpha") && src.has("p2")) src.fail("alpha", "give either p2 or alpha, not both");
    if (src.has("alpha")) {
      const double target = src.non_negative("alpha", 0.0);
      try {
        run.emission = calibrate_emission(p1, target);
      } catch (const Error& e) {
        src.fail("alpha", e.what());
      }
    } else {
      run.emission = {p1, src.probability("p2", 0.0)};
    }
    try {
      run.emission.validate();
    } catch (const ConfigError& e) {
      src.fail("", e.what());
    }
    src.finish();
  }
  {
    auto det = root.child("detector");
    run.detector.efficiency = det.probability("efficiency", 1.0);
    run.detector.dark_rate = det.non_negative("dark_rate", 60.0);
    run.detector.gate = det.positive("gate", 238e-9);
    det.finish();
  }
  {
    auto geo = root.child("geometry");
    run.geometry.path_length = geo.positive("path_length", 48.0);
    run.geometry.flight_time = geo.positive("flight_time", 160e-9);
    run.geometry.clock_period = geo.positive("clock_period", 238e-9);
    run.geometry.choice_position = geo.non_negative("choice_position", 48.0);
    run.geometry.choice_delay = geo.number("choice_delay", 0.0);
    geo.finish();
  }
  {
    auto choice = root.child("choice");
    const auto mode = choice.text("mode", is_alpha ? "forced_zero" : "qrng");
    if (mode == "qrng") {
      run.choice_mode = ChoiceMode::qrng;
    } else if (mode == "forced_zero") {
      run.choice_mode = ChoiceMode::forced_zero;
    } else if (mode == "forced_one") {
      run.choice_mode = ChoiceMode::forced_one;
    } else {
      choice.fail("mode", "must be qrng, forced_zero or forced_one");
    }
    run.qrng_offset = choice.number("offset", 0.0);
    choice.finish();
  }
  run.delayed_choice = root.boolean("delayed_choice", !is_alpha);

  const json& sweep = root.raw("sweep");
  if (is_sweep) {
    std::vector<double> volts;
    if (sweep.is_null()) {
      for (int v = 0; v <= 170; v += 10) volts.push_back(v);
    } else if (sweep.is_array()) {
      for (const auto& v : sweep) {
        if (!v.is_number() || v.get<double>() < 0.0) {
          root.fail("sweep", "voltages must be non-negative numbers");
        }
        volts.push_back(v.get<double>());
      }
    } else if (sweep.is_object()) {
      Section range(sweep, "sweep");
      const double from = range.non_negative("from", 0.0);
      const double to = range.non_negative("to", 170.0);
      const double step = range.positive("step", 10.0);
      range.finish();
      for (int k = 0; from + k * step <= to + 1e-9; ++k) volts.push_back(from + k * step);
    } else {
      root.fail("sweep", "must be a list of voltages or {from, to, step}");
    }
    if (volts.empty()) root.fail("sweep", "must contain at least one voltage");
    for (double v : volts) {
      InterferometerConfig o = run.optics;
      o.v_eom = v;
      s.sweep.push_back({v, reflectivity_from_voltage(o)});
    }
  } else if (!sweep.is_null()) {
    root.fail("sweep", "only valid for duality_sweep scenarios");
  }

  {
    auto out = root.child("outputs");
    s.save_event_log = out.boolean("event_log", !(is_alpha || is_sweep));
    out.finish();
  }
  s.subtract_dark = root.boolean("subtract_dark", true);
  root.finish();

  run.n_triggers = s.triggers;
  try {
    run.validate();
  } catch (const ConfigError& e) {
    throw ParseError(fmt::format("invalid run configuration: {}", e.what()));
  }
  s.canonical = build_canonical(s);
  return s;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_scenario(doc);
}

void apply_overrides(Scenario& s, std::optional<std::uint64_t> seed,
                     std::optional<std::uint64_t> triggers) {
  if (seed) s.run.seed = *seed;
  if (triggers) {
    if (*triggers == 0) throw ParseError("trigger override must be positive");
    s.triggers = *triggers;
    s.run.n_triggers = *triggers;
  }
  s.canonical = build_canonical(s);
}

std::string scenario_digest(const Scenario& s) { return digest_hex(s.canonical.dump()); }

}  // namespace dcsim
