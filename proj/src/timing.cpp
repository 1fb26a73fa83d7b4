#include "dcsim/timing.hpp"

#include <cmath>
#include <string>

#include "dcsim/error.hpp"

namespace dcsim {

std::string_view to_string(IntervalClass c) {
  switch (c) {
    case IntervalClass::spacelike: return "spacelike";
    case IntervalClass::timelike: return "timelike";
    case IntervalClass::lightlike: return "lightlike";
  }
  return "unknown";
}

void GeometryConfig::validate() const {
  if (!(path_length > 0.0)) throw ConfigError("path_length must be positive");
  if (!(flight_time > 0.0)) throw ConfigError("flight_time must be positive");
  if (!(clock_period > 0.0)) throw ConfigError("clock_period must be positive");
  if (!(choice_position >= 0.0)) throw ConfigError("choice_position must be >= 0");
  if (!std::isfinite(choice_delay)) throw ConfigError("choice_delay must be finite");
}

IntervalClass classify_interval(const SpacetimeEvent& a, const SpacetimeEvent& b,
                                double tolerance) {
  const double dt = std::abs(b.t - a.t);
  const double dx = std::abs(b.x - a.x);
  if (dx > kSpeedOfLight * (dt + tolerance)) return IntervalClass::spacelike;
  if (dx < kSpeedOfLight * (dt - tolerance)) return IntervalClass::timelike;
  return IntervalClass::lightlike;
}

CausalityReport verify_delayed_choice_geometry(const GeometryConfig& g, double tolerance) {
  g.validate();
  const double light_time = g.path_length / kSpeedOfLight;
  if (std::abs(g.flight_time - light_time) > 0.05 * light_time) {
    throw GeometryError("flight_time " + std::to_string(g.flight_time * 1e9) +
                        " ns inconsistent with path_length/c = " +
                        std::to_string(light_time * 1e9) + " ns");
  }
  CausalityReport rep;
  rep.entry = {0.0, 0.0, "photon enters interferometer"};
  rep.choice = {g.choice_delay, g.choice_position, "configuration choice"};
  rep.separation = classify_interval(rep.entry, rep.choice, tolerance);
  rep.margin_ns = (g.choice_position / kSpeedOfLight - std::abs(g.choice_delay)) * 1e9;
  rep.pass = rep.separation == IntervalClass::spacelike;
  return rep;
}

void check_reference_timing() {
  const GeometryConfig g;
  const double mismatch = std::abs(g.path_length / kSpeedOfLight - g.flight_time);
  if (mismatch >= 1e-9) {
    throw GeometryError("reference geometry inconsistent by " + std::to_string(mismatch * 1e9) +
                        " ns");
  }
}

}  // namespace dcsim
