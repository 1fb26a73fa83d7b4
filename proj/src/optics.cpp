#include "dcsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dcsim/error.hpp"

namespace dcsim {
namespace {

constexpr double kPi = std::numbers::pi;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

void require_probability(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(r));
  }
}

}  // namespace

void InterferometerConfig::validate() const {
  if (!(beta_deg >= 0.0 && beta_deg <= 45.0)) {
    throw ConfigError("beta must lie in [0, 45] degrees, got " + std::to_string(beta_deg));
  }
  if (!(v_pi > 0.0)) throw ConfigError("v_pi must be positive, got " + std::to_string(v_pi));
  if (!(v_eom >= 0.0)) throw ConfigError("v_eom must be >= 0, got " + std::to_string(v_eom));
  if (!std::isfinite(v_eom)) throw ConfigError("v_eom must be finite");
  if (!std::isfinite(phase)) throw ConfigError("phase must be finite");
  if (!(xi >= 0.0 && xi <= 1.0)) {
    throw ConfigError("xi must lie in [0, 1], got " + std::to_string(xi));
  }
}

double JointPathDetectorTable::path_distinguishability(int path) const {
  return std::abs(p[0][path] - p[1][path]);
}

double JointPathDetectorTable::distinguishability() const {
  return path_distinguishability(0) + path_distinguishability(1);
}

double max_reflectivity(double beta_deg) {
  const double s = std::sin(2.0 * deg_to_rad(beta_deg));
  return s * s;
}

double reflectivity_from_voltage(const InterferometerConfig& cfg) {
  cfg.validate();
  const double s = std::sin(0.5 * kPi * cfg.v_eom / cfg.v_pi);
  return std::clamp(max_reflectivity(cfg.beta_deg) * s * s, 0.0, 1.0);
}

double voltage_for_reflectivity(double beta_deg, double v_pi, double r) {
  InterferometerConfig probe{.beta_deg = beta_deg, .v_pi = v_pi};
  probe.validate();
  const double r_max = max_reflectivity(beta_deg);
  if (!(r >= 0.0) || r > r_max) {
    throw DomainError("reflectivity " + std::to_string(r) + " unreachable (max " +
                      std::to_string(r_max) + ")");
  }
  if (r == 0.0) return 0.0;
  const double s = std::min(1.0, std::sqrt(r / r_max));
  return v_pi * 2.0 / kPi * std::asin(s);
}

double theoretical_visibility(double r, double xi) {
  require_probability(r, "reflectivity");
  if (!(xi >= 0.0 && xi <= 1.0)) {
    throw DomainError("xi must lie in [0, 1], got " + std::to_string(xi));
  }
  return xi * 2.0 * std::sqrt(r * (1.0 - r));
}

double theoretical_distinguishability(double r) {
  if (!(r >= 0.0 && r <= 0.5)) {
    throw DomainError("distinguishability needs R in [0, 0.5], got " + std::to_string(r));
  }
  return 1.0 - 2.0 * r;
}

DetectionProbabilities detection_probabilities(const InterferometerConfig& cfg) {
  const double v = theoretical_visibility(reflectivity_from_voltage(cfg), cfg.xi);
  const double p1 = std::clamp(0.5 * (1.0 + v * std::cos(cfg.phase)), 0.0, 1.0);
  return {p1, 1.0 - p1};
}

JointPathDetectorTable joint_path_detector_table(double r) {
  if (!(r >= 0.0 && r <= 0.5)) {
    throw DomainError("joint table needs R in [0, 0.5], got " + std::to_string(r));
  }
  JointPathDetectorTable t;
  t.p[0][0] = t.p[1][1] = 0.5 * (1.0 - r);
  t.p[1][0] = t.p[0][1] = 0.5 * r;
  return t;
}

}  // namespace dcsim
