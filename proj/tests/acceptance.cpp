// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "dcsim/analysis.hpp"
#include "dcsim/error.hpp"
#include "dcsim/optics.hpp"
#include "dcsim/qrng.hpp"
#include "dcsim/scenario.hpp"
#include "dcsim/simulator.hpp"
#include "dcsim/source.hpp"
#include "dcsim/timing.hpp"
#include "oracles.hpp"

namespace {

using namespace dcsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kBeta = 24.0;
constexpr double kVPi = 217.0;
constexpr std::uint64_t kFringePoints = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, fmt::format("exception: {}", e.what())};
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = elapsed < budget_s;
  if (!in_time) out.detail += fmt::format(" [over budget {:.3g} s]", budget_s);
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  fmt::print("[{}] {}. {} ({:.3f} s): {}\n", pass ? "PASS" : "FAIL", id, title, elapsed, out.detail);
  std::fflush(stdout);
}

RunConfig base_config(double r, double xi, std::uint64_t seed) {
  RunConfig cfg;
  cfg.optics.beta_deg = kBeta;
  cfg.optics.v_pi = kVPi;
  cfg.optics.v_eom = voltage_for_reflectivity(kBeta, kVPi, r);
  cfg.optics.xi = xi;
  cfg.seed = seed;
  return cfg;
}

FringeFit fringe_fit(const RunConfig& cfg, std::uint8_t bit, bool subtract) {
  RunConfig scan = cfg;
  const auto phases = uniform_phases(kFringePoints);
  const std::uint64_t per_point = cfg.n_triggers;
  scan.phase_schedule = make_phase_schedule(phases, per_point);
  scan.n_triggers = per_point * kFringePoints;
  auto points = fringe_points(simulate_counts(scan), bit);
  if (subtract) {
    for (auto& p : points) p.counts = subtract_dark_counts(p.counts, cfg.detector);
  }
  return fit_fringe_visibility(points);
}

CountSummary blocked_counts(RunConfig cfg, BlockedPath which, std::uint8_t bit) {
  cfg.blocked_path = which;
  cfg.seed = derive_seed(cfg.seed, 10, static_cast<std::uint64_t>(which));
  return total_for(simulate_counts(cfg), bit, which);
}

Outcome calibration() {
  InterferometerConfig o{.beta_deg = kBeta, .v_pi = kVPi, .v_eom = 150.0};
  const double r150 = reflectivity_from_voltage(o);
  o.v_eom = 40.0;
  const double r40 = reflectivity_from_voltage(o);
  return {std::abs(r150 - 0.43) <= 0.01 && std::abs(r40 - 0.05) <= 0.01,
          fmt::format("R(150 V) = {:.6f} (0.43 +/- 0.01), R(40 V) = {:.6f} (0.05 +/- 0.01)", r150,
                      r40)};
}

Outcome duality_saturation() {
  bool ok = true;
  double worst = 0.0;
  std::string failed;
  for (int k = 0; k <= 10; ++k) {
    const double r = 0.05 * k;
    RunConfig cfg = base_config(r, 1.0, derive_seed(2024, 100 + k, 0));
    cfg.detector.dark_rate = 0.0;
    cfg.choice_mode = ChoiceMode::forced_one;
    cfg.n_triggers = 100000;
    const FringeFit fit = fringe_fit(cfg, 1, false);
    const Estimate d = estimate_distinguishability(blocked_counts(cfg, BlockedPath::path2, 1),
                                                   blocked_counts(cfg, BlockedPath::path1, 1));
    const auto c = complementarity_statistic(fit.visibility, d, r);
    const double sigma = c.s.error;
    const bool point_ok = std::abs(c.s.value - 1.0) <= 3.0 * sigma + 1e-12 &&
                          c.s.value <= 1.0 + 3.0 * sigma + 1e-12;
    const double pull = sigma > 0 ? (c.s.value - 1.0) / sigma : 0.0;
    if (std::abs(pull) > std::abs(worst)) worst = pull;
    if (!point_ok) {
      ok = false;
      failed += fmt::format(" R={:.2f}: s={:.4f}+/-{:.4f}", r, c.s.value, sigma);
    }
  }
  return {ok, fmt::format("11 points, largest pull of V^2+D^2 - 1 = {:+.2f} sigma{}", worst,
                          failed)};
}

Outcome visibility_reproduction() {
  RunConfig cfg = base_config(0.43, 0.94, 31);
  cfg.n_triggers = 1000000;
  const FringeFit high = fringe_fit(cfg, 1, true);
  const FringeFit zero = fringe_fit(cfg, 0, true);
  RunConfig low_cfg = base_config(0.05, 0.94, 32);
  low_cfg.n_triggers = 1000000;
  const FringeFit low = fringe_fit(low_cfg, 1, true);
  const double vh = high.visibility.value, vl = low.visibility.value;
  const bool ok = vh >= 0.91 && vh <= 0.95 && vl >= 0.39 && vl <= 0.45 &&
                  visibility_consistent_with_zero(zero, 3.0);
  return {ok, fmt::format("V(R=0.43) = {:.4f} +/- {:.4f} in [0.91,0.95]; V(R=0.05) = {:.4f} +/- "
                          "{:.4f} in [0.39,0.45]; V(R=0) = {:.4f} +/- {:.4f} consistent with 0: {}",
                          vh, high.visibility.error, vl, low.visibility.error,
                          zero.visibility.value, zero.visibility.error,
                          visibility_consistent_with_zero(zero, 3.0))};
}

Outcome alpha_reproduction() {
  RunConfig cfg;
  cfg.emission = calibrate_emission(0.02, 0.15);
  cfg.detector.dark_rate = 0.0;
  cfg.n_triggers = 40'000'000;
  cfg.seed = 77;
  cfg.choice_mode = ChoiceMode::forced_zero;
  cfg.delayed_choice = false;
  const Estimate a = estimate_alpha(total_for(simulate_counts(cfg), 0, BlockedPath::none));
  return {std::abs(a.value - 0.15) <= 0.02,
          fmt::format("p2 = {:.6g}, alpha = {:.4f} +/- {:.4f} (0.15 +/- 0.02)", cfg.emission.p2,
                      a.value, a.error)};
}

Outcome causality() {
  const auto def = verify_delayed_choice_geometry(GeometryConfig{});
  GeometryConfig late;
  late.choice_delay = 200e-9;
  const auto rep = verify_delayed_choice_geometry(late);
  bool refused = false;
  RunConfig cfg;
  cfg.n_triggers = 10;
  cfg.geometry = late;
  try {
    run_experiment(cfg);
  } catch (const GeometryError&) {
    refused = true;
  }
  const bool ok = def.separation == IntervalClass::spacelike &&
                  std::abs(def.margin_ns - 160.0) <= 1.0 &&
                  rep.separation == IntervalClass::timelike && refused;
  return {ok, fmt::format("default {} margin {:.3f} ns; 200 ns delay {} (run refused: {})",
                          to_string(def.separation), def.margin_ns, to_string(rep.separation),
                          refused)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> ur(0.0, max_reflectivity(kBeta));
  std::uniform_real_distribution<double> uphi(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> uxi(0.0, 1.0);
  bool ok = true;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    RunConfig cfg = base_config(ur(gen), uxi(gen), 600 + k);
    cfg.optics.phase = uphi(gen);
    cfg.phase_schedule = {{cfg.optics.phase, 1000000}};
    cfg.n_triggers = 1000000;
    cfg.emission = {.p1 = 1.0, .p2 = 0.0};
    cfg.detector.dark_rate = 0.0;
    cfg.choice_mode = ChoiceMode::forced_one;
    const CountSummary c = total_for(simulate_counts(cfg), 1, BlockedPath::none);
    const double p = detection_probabilities(cfg.optics).p_d1;
    const double n = static_cast<double>(c.n_triggers);
    const bool hit = testing::within_binomial(c.n1, n, p, 4.0) &&
                     testing::within_binomial(c.n2, n, 1.0 - p, 4.0) && c.n1 + c.n2 == n;
    const double sd = std::sqrt(n * p * (1 - p));
    worst = std::max(worst, sd > 0 ? std::abs(c.n1 - n * p) / sd : std::abs(c.n1 - n * p));
    ok = ok && hit;
  }
  return {ok, fmt::format("10 tuples at 1e6 triggers, largest deviation {:.2f} sigma (bound 4)",
                          worst)};
}

Outcome fit_inversion() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uv(0.0, 1.0);
  std::uniform_real_distribution<double> uphi(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double v = uv(gen), phi0 = uphi(gen);
    std::vector<FringePoint> pts;
    for (std::uint64_t j = 0; j < kFringePoints; ++j) {
      const double phase = 2 * std::numbers::pi * j / kFringePoints;
      CountSummary c;
      c.n1 = 10000.0 * (1 + v * std::cos(phase + phi0));
      c.var_n1 = std::max(c.n1, 1.0);
      c.n_triggers = 100000;
      c.duration = 1.0;
      pts.push_back({phase, c});
    }
    worst = std::max(worst, std::abs(fit_fringe_visibility(pts).visibility.value - v));
  }
  return {worst < 1e-6, fmt::format("20 fringes, max |V_fit - V| = {:.3g} (< 1e-6)", worst)};
}

Outcome qrng_statistics() {
  const auto bits = generate_bits(NoiseModel{.mean_offset = 0.0, .seed = 8}, 1000000);
  const auto bias = bias_test(bits, 4.0);
  const auto ac = autocorrelation_test(bits, 10, 4.0);
  double worst = 0.0;
  for (double r : ac.r) worst = std::max(worst, std::abs(r));
  return {bias.pass && ac.pass,
          fmt::format("frequency {:.5f} (z = {:+.2f}), max |r_k| over lags 1..10 = {:.2e} "
                      "(bound {:.2e})",
                      bias.frequency, bias.z, worst, ac.bound)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome replay_determinism() {
  const auto scenario = parse_scenario(nlohmann::json{{"kind", "blocked_path"},
                                                      {"name", "replay"},
                                                      {"seed", 9},
                                                      {"triggers", 200000},
                                                      {"interferometer", {{"v_eom", 150}}}});
  const auto fringe = parse_scenario(nlohmann::json{{"kind", "fringe_scan"},
                                                    {"name", "replay"},
                                                    {"seed", 9},
                                                    {"triggers", 20000},
                                                    {"interferometer", {{"v_eom", 150}}}});
  const auto root = fs::temp_directory_path() / "dcsim_acceptance_replay";
  fs::remove_all(root);
  std::size_t compared = 0;
  bool ok = true;
  for (const auto* s : {&scenario, &fringe}) {
    const auto a = root / (s->kind == ScenarioKind::fringe_scan ? "fa" : "ba");
    const auto b = root / (s->kind == ScenarioKind::fringe_scan ? "fb" : "bb");
    const auto ma = execute(*s, {.output_dir = a});
    execute(*s, {.output_dir = b});
    for (const auto& out : ma.outputs) {
      const auto name = out.filename();
      const std::string x = slurp(a / name), y = slurp(b / name);
      ok = ok && !x.empty() && x == y;
      ++compared;
    }
  }
  fs::remove_all(root);
  return {ok && compared >= 5,
          fmt::format("{} output files compared byte for byte across two executions", compared)};
}

}  // namespace

int main() {
  criterion(1, "Voltage-law calibration", 1e-3, calibration);
  criterion(2, "Duality saturation (ideal)", 60.0, duality_saturation);
  criterion(3, "Fringe visibility reproduction", 120.0, visibility_reproduction);
  criterion(4, "Alpha reproduction", 120.0, alpha_reproduction);
  criterion(5, "Causality check", 1.0, causality);
  criterion(6, "Detection-probability oracle", 60.0, oracle_equivalence);
  criterion(7, "Fringe-fit inversion", 1.0, fit_inversion);
  criterion(8, "QRNG statistics", 10.0, qrng_statistics);
  criterion(9, "Replay determinism", 60.0, replay_determinism);
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
