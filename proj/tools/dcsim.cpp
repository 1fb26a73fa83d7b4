// dcsim: delayed-choice complementarity simulator front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dcsim/analysis.hpp"
#include "dcsim/error.hpp"
#include "dcsim/qrng.hpp"
#include "dcsim/scenario.hpp"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("DCSIM_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "dcsim_out";
}

int cmd_run(const std::string& config, std::optional<std::filesystem::path> out_dir,
            std::optional<std::uint64_t> seed, std::optional<std::uint64_t> triggers,
            int verbosity) {
  auto scenario = dcsim::load_config(config);
  dcsim::apply_overrides(scenario, seed, triggers);
  if (verbosity > 0) {
    std::cerr << fmt::format("scenario '{}' ({}), digest {}\n", scenario.name,
                             dcsim::to_string(scenario.kind), dcsim::scenario_digest(scenario));
    for (const auto& p : scenario.sweep) {
      std::cerr << fmt::format("  sweep V_EOM = {:7.2f} V -> R = {:.4f}\n", p.v_eom, p.r_nominal);
    }
  }
  dcsim::ExecuteOptions opt;
  opt.output_dir = out_dir.value_or(default_output_dir());
  opt.verbosity = verbosity;
  opt.log = &std::cerr;
  const auto manifest = dcsim::execute(scenario, opt);
  for (const auto& [name, ok] : manifest.checks) {
    std::cout << fmt::format("{:<28} {}\n", name, ok ? "PASS" : "FAIL");
  }
  std::cout << "results written to " << opt.output_dir.string() << '\n';
  return manifest.passed ? 0 : kExitCheckFailed;
}

int cmd_theory(const std::vector<double>& volts, double beta, double v_pi, double xi) {
  std::cout << "v_eom,reflectivity,V,D,V2_plus_D2\n";
  for (double v : volts) {
    dcsim::InterferometerConfig cfg{.beta_deg = beta, .v_pi = v_pi, .v_eom = v, .xi = xi};
    const double r = dcsim::reflectivity_from_voltage(cfg);
    const double vis = dcsim::theoretical_visibility(r, xi);
    if (r <= 0.5) {
      const double d = dcsim::theoretical_distinguishability(r);
      std::cout << fmt::format("{:.3f},{:.6f},{:.6f},{:.6f},{:.6f}\n", v, r, vis, d,
                               vis * vis + d * d);
    } else {
      std::cout << fmt::format("{:.3f},{:.6f},{:.6f},,\n", v, r, vis);
    }
  }
  return 0;
}

int cmd_qrng(std::size_t n_bits, std::uint64_t seed, double offset, int max_lag,
             const std::optional<std::filesystem::path>& dump) {
  const auto bits = dcsim::generate_bits({offset, seed}, n_bits);
  if (dump) dcsim::write_bit_stream(*dump, bits);
  const auto bias = dcsim::bias_test(bits);
  const auto ac = dcsim::autocorrelation_test(bits, max_lag);
  std::cout << fmt::format("bits {}  frequency {:.6f}  z {:+.3f}  bias {}\n", bias.n,
                           bias.frequency, bias.z, bias.pass ? "PASS" : "FAIL");
  if (ac.degenerate) {
    std::cout << "autocorrelation: degenerate (constant sequence) FAIL\n";
  } else {
    for (std::size_t k = 0; k < ac.r.size(); ++k) {
      std::cout << fmt::format("lag {:2d}  r {:+.6f}\n", k + 1, ac.r[k]);
    }
    std::cout << fmt::format("autocorrelation bound {:.6f} {}\n", ac.bound,
                             ac.pass ? "PASS" : "FAIL");
  }
  return bias.pass && ac.pass ? 0 : kExitCheckFailed;
}

int cmd_sort(const std::string& log_path, double gate) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw dcsim::Error("cannot open " + log_path);
  const auto counts = dcsim::sort_by_configuration(in, gate);
  std::cout << "choice_bit,phase,blocked_path,n_triggers,n1,n2,n_coinc\n";
  for (const auto& [key, c] : counts) {
    std::cout << fmt::format("{},{:.6f},{},{},{:.0f},{:.0f},{:.0f}\n", key.choice_bit, key.phase,
                             static_cast<int>(key.blocked), c.n_triggers, c.n1, c.n2, c.n_coinc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed-choice complementarity simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dcsim::kSoftwareVersion);

  auto* run = app.add_subcommand("run", "Execute a scenario config");
  std::string config;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> triggers;
  int verbosity = 0;
  run->add_option("config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_dir, "Output directory (default: $DCSIM_OUTPUT_DIR or ./dcsim_out)");
  run->add_option("-s,--seed", seed, "Override the scenario seed");
  run->add_option("-n,--triggers", triggers, "Override triggers per point/run");
  run->add_flag("-v,--verbose", verbosity, "Increase verbosity");

  auto* theory = app.add_subcommand("theory", "Print closed-form R, V, D for EOM voltages");
  std::vector<double> volts{0, 40, 80, 120, 150, 170};
  double beta = 24.0, v_pi = 217.0, xi = 1.0;
  theory->add_option("--v-eom", volts, "Voltages (V)");
  theory->add_option("--beta", beta, "EOM orientation (deg)");
  theory->add_option("--v-pi", v_pi, "Half-wave voltage (V)");
  theory->add_option("--xi", xi, "Contrast factor");

  auto* qrng = app.add_subcommand("qrng", "Generate and test a comparator bit stream");
  std::size_t n_bits = 1'000'000;
  std::uint64_t qseed = 1;
  double offset = 0.0;
  int max_lag = 10;
  std::optional<std::filesystem::path> dump;
  qrng->add_option("-n,--bits", n_bits, "Number of bits");
  qrng->add_option("-s,--seed", qseed, "Seed");
  qrng->add_option("--offset", offset, "Comparator offset (noise rms units)");
  qrng->add_option("--max-lag", max_lag, "Largest autocorrelation lag");
  qrng->add_option("--dump", dump, "Write the stream, one byte per bit");

  auto* sort = app.add_subcommand("sort", "Per-configuration counts of an event log");
  std::string log_path;
  double gate = 238e-9;
  sort->add_option("log", log_path, "Event log file")->required();
  sort->add_option("--gate", gate, "Gate duration per trigger (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : kExitError;
  }

  try {
    if (*run) return cmd_run(config, out_dir, seed, triggers, verbosity);
    if (*theory) return cmd_theory(volts, beta, v_pi, xi);
    if (*qrng) return cmd_qrng(n_bits, qseed, offset, max_lag, dump);
    if (*sort) return cmd_sort(log_path, gate);
  } catch (const dcsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
