#pragma once

#include <string>
#include <string_view>

namespace dcsim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kDefaultLightlikeTolerance = 0.5e-9;  // s

struct SpacetimeEvent {
  double t = 0.0;  ///< seconds, lab frame
  double x = 0.0;  ///< meters along the unfolded optical axis
  std::string label;
};

enum class IntervalClass { spacelike, timelike, lightlike };

std::string_view to_string(IntervalClass c);

/// Lab-frame layout of the delayed-choice experiment.
struct GeometryConfig {
  double path_length = 48.0;        ///< m, free-space propagation inside the interferometer
  double flight_time = 160e-9;      ///< s, time of flight over path_length
  double clock_period = 238e-9;     ///< s, trigger period (4.2 MHz clock)
  double choice_position = 48.0;    ///< m, QRNG location relative to the input splitter
  double choice_delay = 0.0;        ///< s, choice time minus photon entry time

  /// Positivity checks only (ConfigError).
  void validate() const;
};

/// Spacelike iff dx > c (dt + tol); timelike iff dx < c (dt - tol); lightlike otherwise.
IntervalClass classify_interval(const SpacetimeEvent& a, const SpacetimeEvent& b,
                                double tolerance = kDefaultLightlikeTolerance);

struct CausalityReport {
  SpacetimeEvent entry;
  SpacetimeEvent choice;
  IntervalClass separation = IntervalClass::lightlike;
  double margin_ns = 0.0;  ///< dx/c - dt
  bool pass = false;
};

/// Classifies photon entry (x = 0) against the QRNG choice event.
/// Throws GeometryError when flight_time differs from path_length/c by more than 5 %.
CausalityReport verify_delayed_choice_geometry(const GeometryConfig& g,
                                               double tolerance = kDefaultLightlikeTolerance);

/// |48 m / c - 160 ns| < 1 ns. Throws GeometryError otherwise.
void check_reference_timing();

}  // namespace dcsim
