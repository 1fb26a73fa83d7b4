#include "dcsim/source.hpp"

#include <cmath>
#include <string>

#include "dcsim/error.hpp"

namespace dcsim {

void EmissionModel::validate() const {
  if (!(p1 >= 0.0) || !(p2 >= 0.0)) {
    throw ConfigError("emission probabilities must be non-negative");
  }
  if (p1 + p2 > 1.0) {
    throw ConfigError("p1 + p2 must not exceed 1, got " + std::to_string(p1 + p2));
  }
}

EmissionOutcome sample_emission(const EmissionModel& model, Rng& rng) {
  const double u = rng.uniform();
  if (u < model.p1) return {1};
  if (u < model.p1 + model.p2) return {2};
  return {0};
}

double theoretical_alpha(const EmissionModel& model) {
  model.validate();
  const double mean = model.p1 + 2.0 * model.p2;
  if (!(mean > 0.0)) throw UndefinedStatisticError("alpha undefined for zero mean photon number");
  return 2.0 * model.p2 / (mean * mean);
}

EmissionModel calibrate_emission(double p1, double target_alpha) {
  if (!(p1 > 0.0 && p1 <= 1.0)) throw ConfigError("p1 must lie in (0, 1]");
  if (!(target_alpha >= 0.0)) throw ConfigError("target alpha must be non-negative");
  if (target_alpha == 0.0) return {p1, 0.0};
  // alpha (p1 + 2 p2)^2 = 2 p2  ->  4a p2^2 + (4a p1 - 2) p2 + a p1^2 = 0.
  // Small root in the cancellation-free form 2C / (-B + sqrt(B^2 - 4AC)).
  const double a = 4.0 * target_alpha;
  const double b = 4.0 * target_alpha * p1 - 2.0;
  const double c = target_alpha * p1 * p1;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw DomainError("no two-photon probability reaches the requested alpha");
  EmissionModel m{p1, 2.0 * c / (-b + std::sqrt(disc))};
  m.validate();
  return m;
}

}  // namespace dcsim
