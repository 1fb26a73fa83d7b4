#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcsim/error.hpp"
#include "dcsim/scenario.hpp"
#include "oracles.hpp"

namespace dcsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dcsim_scenario_" + name);
  fs::remove_all(p);
  return p;
}

std::string parse_error_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadConfig, MinimalFringeScanGetsReferenceDefaults) {
  const auto s = parse_scenario(json{{"kind", "fringe_scan"}});
  EXPECT_EQ(s.kind, ScenarioKind::fringe_scan);
  EXPECT_EQ(s.run.optics.beta_deg, 24.0);
  EXPECT_EQ(s.run.optics.v_pi, 217.0);
  EXPECT_EQ(s.run.geometry.clock_period, 238e-9);
  EXPECT_EQ(s.run.geometry.path_length, 48.0);
  EXPECT_EQ(s.run.geometry.flight_time, 160e-9);
  EXPECT_EQ(s.run.detector.dark_rate, 60.0);
  EXPECT_EQ(s.run.detector.gate, 238e-9);
  EXPECT_EQ(s.run.choice_mode, ChoiceMode::qrng);
  EXPECT_TRUE(s.run.delayed_choice);
  EXPECT_EQ(s.phases.size(), 20u);
  EXPECT_TRUE(s.save_event_log);
}

TEST(LoadConfig, RejectsBadValuesWithKeyPath) {
  EXPECT_NE(parse_error_of({{"kind", "fringe_scan"}, {"interferometer", {{"v_eom", -5}}}})
                .find("interferometer.v_eom"),
            std::string::npos);
  EXPECT_NE(parse_error_of({{"kind", "fringe_scan"}, {"detector", {{"efficency", 1}}}})
                .find("detector.efficency"),
            std::string::npos);
  EXPECT_NE(parse_error_of({{"kind", "nope"}}).find("kind"), std::string::npos);
  EXPECT_NE(parse_error_of(json::object()).find("kind"), std::string::npos);
  EXPECT_NE(parse_error_of({{"kind", "alpha"}, {"source", {{"p1", 0.9}, {"p2", 0.2}}}})
                .find("source"),
            std::string::npos);
  EXPECT_NE(parse_error_of({{"kind", "fringe_scan"}, {"sweep", {1, 2}}}).find("sweep"),
            std::string::npos);
  EXPECT_NE(parse_error_of({{"kind", "fringe_scan"}, {"triggers", 0}}).find("triggers"),
            std::string::npos);
}

TEST(LoadConfig, SweepEchoesNominalReflectivity) {
  const auto s = parse_scenario(json{{"kind", "duality_sweep"}, {"sweep", {0, 40, 80, 120, 150, 170}}});
  ASSERT_EQ(s.sweep.size(), 6u);
  // 30-digit evaluations of the voltage law at beta = 24 deg, V_pi = 217 V.
  const double expected[] = {0.0, 0.0450211216282553, 0.165403822609297,
                             0.321893239692095, 0.432232927127642, 0.490768998470808};
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(s.sweep[k].r_nominal, expected[k], 1e-12);
    EXPECT_NEAR(s.sweep[k].r_nominal,
                testing::reflectivity_reference(24.0, 217.0, s.sweep[k].v_eom), 1e-14);
  }
  const auto ranged = parse_scenario(
      json{{"kind", "duality_sweep"}, {"sweep", {{"from", 0}, {"to", 170}, {"step", 17}}}});
  EXPECT_EQ(ranged.sweep.size(), 11u);
  EXPECT_DOUBLE_EQ(ranged.sweep.back().v_eom, 170.0);
}

TEST(LoadConfig, ReflectivityAndAlphaShortcuts) {
  const auto s = parse_scenario(json{{"kind", "alpha"},
                                     {"interferometer", {{"reflectivity", 0.43}}},
                                     {"source", {{"p1", 0.02}, {"alpha", 0.15}}}});
  EXPECT_NEAR(reflectivity_from_voltage(s.run.optics), 0.43, 1e-12);
  EXPECT_NEAR(theoretical_alpha(s.run.emission), 0.15, 1e-12);
  EXPECT_EQ(s.run.choice_mode, ChoiceMode::forced_zero);
  EXPECT_EQ(s.triggers, 10'000'000u);
}

TEST(LoadConfig, ReadsFilesWithComments) {
  const auto dir = scratch("file");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "// fringe scan\n{\"kind\": \"fringe_scan\", \"seed\": 5}\n";
  EXPECT_EQ(load_config(dir / "c.json").run.seed, 5u);
  std::ofstream(dir / "bad.json") << "{\"kind\": ";
  EXPECT_THROW(load_config(dir / "bad.json"), ParseError);
  EXPECT_THROW(load_config(dir / "missing.json"), ParseError);
}

TEST(ScenarioDigest, StableUnderKeyReordering) {
  const auto a = parse_scenario(json::parse(
      R"({"kind":"fringe_scan","seed":3,"interferometer":{"v_eom":150,"xi":0.94}})"));
  const auto b = parse_scenario(json::parse(
      R"({"interferometer":{"xi":0.94,"v_eom":150},"seed":3,"kind":"fringe_scan"})"));
  EXPECT_EQ(scenario_digest(a), scenario_digest(b));
  auto c = a;
  apply_overrides(c, 4, std::nullopt);
  EXPECT_NE(scenario_digest(a), scenario_digest(c));
  EXPECT_EQ(c.run.seed, 4u);
}

TEST(Execute, CausalityCheckWithDefaults) {
  const auto out = scratch("causality");
  const auto m = execute(parse_scenario(json{{"kind", "causality_check"}}), {.output_dir = out});
  EXPECT_TRUE(m.passed);
  const auto summary = json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["causality"]["separation"], "spacelike");
  EXPECT_NEAR(summary["causality"]["margin_ns"].get<double>(), 160.0, 1.0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(Execute, CausalityCheckFailsForLateChoice) {
  const auto late = parse_scenario(
      json{{"kind", "causality_check"}, {"geometry", {{"choice_delay", 200e-9}}}});
  EXPECT_FALSE(execute(late, {.output_dir = scratch("late")}).passed);
}

TEST(Execute, RefusesDelayedChoiceRunWithTimelikeChoice) {
  const auto s = parse_scenario(
      json{{"kind", "fringe_scan"}, {"triggers", 100}, {"geometry", {{"choice_delay", 200e-9}}}});
  EXPECT_THROW(execute(s, {.output_dir = scratch("refuse")}), GeometryError);
}

TEST(Execute, FringeScanWithSplitterRemovedShowsNoVisibility) {
  const auto out = scratch("r0");
  const auto s = parse_scenario(json{{"kind", "fringe_scan"},
                                     {"triggers", 20000},
                                     {"source", {{"p1", 0.2}}},
                                     {"choice", {{"mode", "forced_zero"}}},
                                     {"interferometer", {{"v_eom", 150}}}});
  const auto m = execute(s, {.output_dir = out});
  EXPECT_TRUE(m.passed);
  const auto summary = json::parse(slurp(out / "summary.json"));
  ASSERT_EQ(summary["fringe"].size(), 1u);
  EXPECT_TRUE(summary["fringe"][0]["consistent_with_zero_3sigma"].get<bool>());
  std::istringstream table(slurp(out / "fringe.csv"));
  std::string line;
  std::getline(table, line);
  int rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    EXPECT_TRUE(line.starts_with("0.000,0.000000,0,")) << line;
  }
  EXPECT_EQ(rows, 20);
}

TEST(Execute, IdealDualitySweepSaturatesBound) {
  const auto out = scratch("sweep");
  const auto s = parse_scenario(json{{"kind", "duality_sweep"},
                                     {"triggers", 20000},
                                     {"source", {{"p1", 0.2}}},
                                     {"detector", {{"dark_rate", 0}}},
                                     {"sweep", {0, 80, 150}}});
  const auto m = execute(s, {.output_dir = out});
  EXPECT_TRUE(m.passed);
  const auto summary = json::parse(slurp(out / "summary.json"));
  for (const auto& p : summary["sweep"]) {
    const double v = p["V2_plus_D2"]["value"], e = p["V2_plus_D2"]["error"];
    EXPECT_NEAR(v, 1.0, 3 * e + 1e-12);
  }
  std::istringstream table(slurp(out / "sweep.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_TRUE(line.starts_with("v_eom,reflectivity,V,sigma_V,D,sigma_D,V2,D2,V2_plus_D2"));
  std::getline(table, line);
  EXPECT_TRUE(line.starts_with("0.000,0.000000,"));
  std::getline(table, line);
  EXPECT_TRUE(line.starts_with("80.000,0.165404,"));
}

TEST(Execute, BlockedPathAndAlphaScenarios) {
  const auto out = scratch("blocked");
  const auto blocked = parse_scenario(json{{"kind", "blocked_path"},
                                           {"triggers", 100000},
                                           {"source", {{"p1", 0.2}}},
                                           {"interferometer", {{"reflectivity", 0.2}}}});
  EXPECT_TRUE(execute(blocked, {.output_dir = out}).passed);
  EXPECT_TRUE(fs::exists(out / "events_path1_blocked.csv"));
  EXPECT_TRUE(fs::exists(out / "events_path2_blocked.csv"));
  const auto summary = json::parse(slurp(out / "summary.json"));
  const auto& on = summary["distinguishability"][1];
  EXPECT_NEAR(on["distinguishability"]["value"].get<double>(), 0.6,
              3 * on["distinguishability"]["error"].get<double>());

  const auto alpha_out = scratch("alpha");
  const auto alpha = parse_scenario(json{{"kind", "alpha"},
                                         {"triggers", 1000000},
                                         {"source", {{"p1", 0.2}, {"alpha", 0.15}}}});
  EXPECT_TRUE(execute(alpha, {.output_dir = alpha_out}).passed);
}

TEST(Execute, ReplayIsByteIdentical) {
  const auto s = parse_scenario(json{{"kind", "fringe_scan"},
                                     {"triggers", 5000},
                                     {"phases", 8},
                                     {"interferometer", {{"v_eom", 120}}}});
  const auto a = scratch("replay_a"), b = scratch("replay_b");
  execute(s, {.output_dir = a});
  execute(s, {.output_dir = b});
  for (const char* f : {"events.csv", "fringe.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
}

}  // namespace
}  // namespace dcsim
