#pragma once

#include <array>

namespace dcsim {

/// Mach-Zehnder interferometer with a voltage-controlled output beamsplitter.
///
/// The output splitter is a PBS + EOM + Wollaston chain whose effective
/// reflectivity is set by the EOM voltage. Defaults are the calibrated
/// values of the reference setup (beta = 24 deg, V_pi = 217 V).
struct InterferometerConfig {
  double beta_deg = 24.0;  ///< EOM axis orientation relative to the PBS, degrees
  double v_pi = 217.0;     ///< half-wave voltage, volts
  double v_eom = 0.0;      ///< applied voltage, volts
  double phase = 0.0;      ///< path dephasing, radians
  double xi = 1.0;         ///< fringe-contrast factor (1 = perfect mode overlap)

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

struct DetectionProbabilities {
  double p_d1 = 0.5;
  double p_d2 = 0.5;
};

/// Incoherent which-path accounting: p[detector][path], both 0-based.
struct JointPathDetectorTable {
  std::array<std::array<double, 2>, 2> p{};

  /// |p(P1, path) - p(P2, path)| for path 0 or 1.
  double path_distinguishability(int path) const;
  /// Sum of the two per-path terms.
  double distinguishability() const;
};

/// R = sin^2(2 beta) * sin^2(pi/2 * V_EOM / V_pi).
double reflectivity_from_voltage(const InterferometerConfig& cfg);

/// Upper bound of the reflectivity for a given EOM orientation.
double max_reflectivity(double beta_deg);

/// Smallest voltage in [0, V_pi] that yields reflectivity `r`.
/// Throws DomainError when r exceeds max_reflectivity(beta_deg).
double voltage_for_reflectivity(double beta_deg, double v_pi, double r);

/// V = xi * 2 sqrt(R (1 - R)).
double theoretical_visibility(double r, double xi = 1.0);

/// D = 1 - 2R; only defined for 0 <= R <= 0.5.
double theoretical_distinguishability(double r);

/// Output-port probabilities for one photon in the open interferometer.
/// Phase origin: phi = 0 puts the bright fringe on P1.
DetectionProbabilities detection_probabilities(const InterferometerConfig& cfg);

/// Joint detector/path probabilities for a single photon, without the
/// interference cross term. Path 1 is aligned with P1 and path 2 with P2.
JointPathDetectorTable joint_path_detector_table(double r);

}  // namespace dcsim
