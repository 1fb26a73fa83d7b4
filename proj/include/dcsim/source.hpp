#pragma once

#include "dcsim/random.hpp"

namespace dcsim {

/// Per-trigger photon-number distribution truncated at two photons.
struct EmissionModel {
  double p1 = 0.02;  ///< P(exactly one photon)
  double p2 = 0.0;   ///< P(exactly two photons)

  double p0() const { return 1.0 - p1 - p2; }
  void validate() const;
};

struct EmissionOutcome {
  int photon_count = 0;
};

EmissionOutcome sample_emission(const EmissionModel& model, Rng& rng);

/// <n(n-1)> / <n>^2 of the model, i.e. g2(0).
double theoretical_alpha(const EmissionModel& model);

/// Model with the given one-photon probability whose alpha equals `target_alpha`.
///
/// Solves 2 p2 / (p1 + 2 p2)^2 = target for the small root p2.
EmissionModel calibrate_emission(double p1, double target_alpha);

}  // namespace dcsim
