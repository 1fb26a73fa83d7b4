#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "dcsim/counts.hpp"
#include "dcsim/estimate.hpp"
#include "dcsim/simulator.hpp"

namespace dcsim {

/// Removes the expected dark counts (dark_rate * duration per detector) and
/// the dark-dark accidental coincidences. Results never go negative; a
/// clamp sets `clamped`. Throws ConfigError when duration <= 0.
CountSummary subtract_dark_counts(const CountSummary& raw, const DetectorModel& model);

struct FringePoint {
  double phase = 0.0;
  CountSummary counts;
};

struct FringeFit {
  Estimate visibility;
  double phase_offset = 0.0;      ///< phi0 in n1 = A (1 + V cos(phi + phi0))
  double mean_level = 0.0;        ///< A, counts per point
  double component_error = 0.0;   ///< sigma of (b, c) / A, isotropic part
  double chi2 = 0.0;
  std::size_t dof = 0;
  bool phase_identifiable = true; ///< false when the fitted amplitude vanishes
  bool overshoot = false;         ///< visibility above 1 (noise)
};

/// Poisson-weighted least squares of n1(phi) = A (1 + V cos(phi + phi0)).
///
/// The model is fitted in its linear form a + b cos(phi) + c sin(phi). When
/// points carry different trigger counts, counts are first rescaled to the
/// mean trigger count. Weights are refined twice from the fitted Poisson
/// expectation. Throws FitDegenerateError for fewer than 4 distinct phases,
/// a phase range not exceeding pi, or a non-positive mean level.
FringeFit fit_fringe_visibility(std::span<const FringePoint> points);

/// True when the fitted visibility is compatible with zero at the two-sided
/// `nsigma` level, treating (b, c) as a 2-D Gaussian.
bool visibility_consistent_with_zero(const FringeFit& fit, double nsigma = 3.0);

/// D = (|N1-N2|/(N1+N2) with path 2 blocked + same with path 1 blocked) / 2.
Estimate estimate_distinguishability(const CountSummary& blocked2, const CountSummary& blocked1);

/// |N1-N2|/(N1+N2) of a single blocked run, with its binomial error.
Estimate blocked_contrast(const CountSummary& blocked);

/// alpha = N_c N_T / (N1 N2) with Poisson errors.
Estimate estimate_alpha(const CountSummary& s);

struct ComplementarityResult {
  Estimate v;
  Estimate d;
  Estimate s;  ///< V^2 + D^2
  double r_nominal = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;  ///< s <= 1 + 2 sigma_s
};

ComplementarityResult complementarity_statistic(const Estimate& v, const Estimate& d,
                                                double r_nominal =
                                                    std::numeric_limits<double>::quiet_NaN());

/// Per-configuration counts keyed by (choice bit, phase, blocked path).
/// Duration of each entry is n_triggers * gate.
ConfigurationCounts sort_by_configuration(const EventLog& log, double gate = 238e-9);

/// Streaming variant over a persisted log; malformed lines raise ParseError.
ConfigurationCounts sort_by_configuration(std::istream& in, double gate = 238e-9);

/// Fringe points for one choice bit and blocking state, ordered by phase.
std::vector<FringePoint> fringe_points(const ConfigurationCounts& counts, std::uint8_t choice_bit,
                                       BlockedPath blocked = BlockedPath::none);

/// Sum over all phases for one choice bit and blocking state.
CountSummary total_for(const ConfigurationCounts& counts, std::uint8_t choice_bit,
                       BlockedPath blocked);

}  // namespace dcsim
