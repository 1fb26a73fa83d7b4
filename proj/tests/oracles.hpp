#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library under test.

#include <cmath>
#include <cstdint>
#include <functional>

namespace dcsim::testing {

/// |k - n p| <= nsigma * sqrt(n p (1 - p)).
inline bool within_binomial(double k, double n, double p, double nsigma) {
  const double sd = std::sqrt(n * p * (1.0 - p));
  return std::abs(k - n * p) <= nsigma * sd + 1e-12;
}

/// Composite Simpson rule with `intervals` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Reflectivity of the variable splitter written out directly from the
/// voltage law, in degrees and volts.
inline double reflectivity_reference(double beta_deg, double v_pi, double v) {
  const double pi = 3.14159265358979323846;
  const double a = std::sin(2.0 * beta_deg * pi / 180.0);
  const double b = std::sin(0.5 * pi * v / v_pi);
  return a * a * b * b;
}

/// Per-trigger click and coincidence probabilities for non-number-resolving
/// detectors, by enumerating every routing of 0, 1 or 2 photons that each
/// reach P1 with probability q (after detection efficiency eta).
struct DetectorLevelRates {
  double click1 = 0.0;
  double click2 = 0.0;
  double coinc = 0.0;
};

inline DetectorLevelRates enumerate_detector_rates(double p1, double p2, double q,
                                                   double eta = 1.0) {
  DetectorLevelRates r;
  // One photon: lost, P1, or P2.
  r.click1 += p1 * eta * q;
  r.click2 += p1 * eta * (1.0 - q);
  // Two photons: each is lost (1-eta), on P1 (eta q) or on P2 (eta (1-q)).
  const double outcome[3] = {1.0 - eta, eta * q, eta * (1.0 - q)};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double w = p2 * outcome[a] * outcome[b];
      const bool c1 = a == 1 || b == 1;
      const bool c2 = a == 2 || b == 2;
      if (c1) r.click1 += w;
      if (c2) r.click2 += w;
      if (c1 && c2) r.coinc += w;
    }
  }
  return r;
}

}  // namespace dcsim::testing
