#include "dcsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dcsim/error.hpp"

namespace dcsim {
namespace {

struct Tally {
  std::uint64_t n1 = 0, n2 = 0, nc = 0, nt = 0;

  void add(const TriggerRecord& r) {
    ++nt;
    n1 += r.click_p1;
    n2 += r.click_p2;
    nc += (r.click_p1 && r.click_p2);
  }
};

ConfigurationCounts finish(const std::map<ConfigurationKey, Tally>& tallies, double gate) {
  ConfigurationCounts out;
  for (const auto& [key, t] : tallies) {
    out.emplace(key, CountSummary::from_counts(t.n1, t.n2, t.nc, t.nt,
                                               static_cast<double>(t.nt) * gate));
  }
  return out;
}

// Subtracts `background` from `value`; values within rounding of zero clamp to 0.
double subtract_clamped(double value, double background, bool& clamped) {
  const double diff = value - background;
  if (background > 0.0 && diff <= 1e-9 * std::max(1.0, background)) {
    clamped = true;
    return 0.0;
  }
  return diff;
}

}  // namespace

CountSummary subtract_dark_counts(const CountSummary& raw, const DetectorModel& model) {
  if (!(raw.duration > 0.0)) throw ConfigError("dark subtraction needs a positive duration");
  const double dark = model.dark_rate * raw.duration;
  CountSummary out = raw;
  if (dark == 0.0) return out;

  out.n1 = subtract_clamped(raw.n1, dark, out.clamped);
  out.n2 = subtract_clamped(raw.n2, dark, out.clamped);
  out.var_n1 = raw.var_n1 + dark;
  out.var_n2 = raw.var_n2 + dark;
  if (raw.n_triggers > 0) {
    const double accidental = dark * dark / static_cast<double>(raw.n_triggers);
    out.n_coinc = subtract_clamped(raw.n_coinc, accidental, out.clamped);
    out.var_coinc = raw.var_coinc + accidental;
  }
  return out;
}

FringeFit fit_fringe_visibility(std::span<const FringePoint> points) {
  std::vector<double> phases;
  phases.reserve(points.size());
  for (const auto& p : points) phases.push_back(p.phase);
  std::sort(phases.begin(), phases.end());
  phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
  if (phases.size() < 4) {
    throw FitDegenerateError(fmt::format("fringe fit needs >= 4 distinct phases, got {}",
                                         phases.size()));
  }
  if (!(phases.back() - phases.front() > std::numbers::pi)) {
    throw FitDegenerateError("fringe fit phases must span more than pi");
  }

  double mean_triggers = 0.0;
  bool have_triggers = true;
  for (const auto& p : points) {
    have_triggers = have_triggers && p.counts.n_triggers > 0;
    mean_triggers += static_cast<double>(p.counts.n_triggers);
  }
  mean_triggers /= static_cast<double>(points.size());

  // Scaled observations y = n1 * scale. Variances start from the recorded
  // ones and are then replaced by the fitted Poisson expectation plus any
  // background variance, which removes the low bias of observed-count weights.
  const std::size_t n = points.size();
  std::vector<double> y(n), w(n), scale(n), extra(n);
  std::vector<Eigen::Vector3d> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& c = points[k].counts;
    scale[k] = have_triggers ? mean_triggers / static_cast<double>(c.n_triggers) : 1.0;
    y[k] = c.n1 * scale[k];
    extra[k] = std::max(0.0, c.var_n1 - c.n1);
    w[k] = 1.0 / (std::max(c.var_n1, 1.0) * scale[k] * scale[k]);
    x[k] = Eigen::Vector3d(1.0, std::cos(points[k].phase), std::sin(points[k].phase));
  }

  Eigen::Vector3d theta;
  Eigen::Matrix3d cov;
  constexpr int kReweightPasses = 3;
  for (int pass = 0; pass < kReweightPasses; ++pass) {
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      normal += w[k] * x[k] * x[k].transpose();
      rhs += w[k] * y[k] * x[k];
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    lu.setThreshold(1e-12);
    if (lu.rank() < 3) throw FitDegenerateError("phase coverage does not determine the fringe");
    theta = lu.solve(rhs);
    cov = lu.inverse();
    if (pass + 1 == kReweightPasses) break;
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = std::max(0.0, x[k].dot(theta)) / scale[k] + extra[k];
      w[k] = 1.0 / (std::max(expected, 1.0) * scale[k] * scale[k]);
    }
  }

  const double a = theta(0), b = theta(1), c = theta(2);
  if (!(a > 0.0)) throw FitDegenerateError("fitted mean level is not positive");

  FringeFit fit;
  fit.mean_level = a;
  const double amplitude = std::hypot(b, c);
  fit.visibility.value = amplitude / a;
  fit.component_error = std::sqrt(0.5 * (cov(1, 1) + cov(2, 2))) / a;
  if (amplitude <= 1e-12 * a) {
    fit.phase_identifiable = false;
    fit.phase_offset = 0.0;
    fit.visibility.error = fit.component_error;
  } else {
    fit.phase_offset = std::atan2(-c, b);
    const double v = fit.visibility.value;
    const Eigen::Vector3d grad(-v / a, b / (a * amplitude), c / (a * amplitude));
    fit.visibility.error = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  }
  fit.overshoot = fit.visibility.value > 1.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - x[k].dot(theta);
    fit.chi2 += w[k] * r * r;
  }
  fit.dof = n - 3;
  return fit;
}

bool visibility_consistent_with_zero(const FringeFit& fit, double nsigma) {
  if (fit.component_error <= 0.0) return fit.visibility.value == 0.0;
  // Norm of a 2-D Gaussian: compare with the chi^2(2) quantile at the
  // two-sided nsigma tail probability.
  const double tail = std::erfc(nsigma / std::numbers::sqrt2);
  const double threshold = -2.0 * std::log(tail);
  const double z = fit.visibility.value / fit.component_error;
  return z * z <= threshold;
}

Estimate blocked_contrast(const CountSummary& s) {
  const double n = s.n1 + s.n2;
  if (!(n > 0.0)) throw InsufficientDataError("blocked-path run recorded no counts");
  const double r = (s.n1 - s.n2) / n;
  return {std::abs(r), std::sqrt(std::max(0.0, 1.0 - r * r) / n)};
}

Estimate estimate_distinguishability(const CountSummary& blocked2, const CountSummary& blocked1) {
  const Estimate d1 = blocked_contrast(blocked2);
  const Estimate d2 = blocked_contrast(blocked1);
  return {0.5 * (d1.value + d2.value), 0.5 * std::hypot(d1.error, d2.error)};
}

Estimate estimate_alpha(const CountSummary& s) {
  if (s.n_triggers == 0) throw UndefinedStatisticError("alpha needs at least one trigger");
  if (!(s.n1 > 0.0) || !(s.n2 > 0.0)) {
    throw UndefinedStatisticError("alpha undefined without singles on both detectors");
  }
  const double scale = static_cast<double>(s.n_triggers) / (s.n1 * s.n2);
  const double alpha = s.n_coinc * scale;
  if (s.n_coinc <= 0.0) return {0.0, scale * std::sqrt(std::max(s.var_coinc, 1.0))};
  const double rel2 = s.var_coinc / (s.n_coinc * s.n_coinc) + s.var_n1 / (s.n1 * s.n1) +
                      s.var_n2 / (s.n2 * s.n2);
  return {alpha, alpha * std::sqrt(rel2)};
}

ComplementarityResult complementarity_statistic(const Estimate& v, const Estimate& d,
                                                double r_nominal) {
  if (!(v.value >= 0.0) || !(d.value >= 0.0)) {
    throw DomainError("complementarity statistic needs non-negative V and D");
  }
  ComplementarityResult out;
  out.v = v;
  out.d = d;
  out.r_nominal = r_nominal;
  out.s.value = v.value * v.value + d.value * d.value;
  out.s.error = std::hypot(2.0 * v.value * v.error, 2.0 * d.value * d.error);
  out.pass = out.s.value <= 1.0 + 2.0 * out.s.error;
  return out;
}

ConfigurationCounts sort_by_configuration(const EventLog& log, double gate) {
  std::map<ConfigurationKey, Tally> tallies;
  for (const auto& r : log.records) tallies[{r.choice_bit, r.phase, r.blocked}].add(r);
  return finish(tallies, gate);
}

ConfigurationCounts sort_by_configuration(std::istream& in, double gate) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#format_version=")) {
    throw ParseError("missing event log header", 1);
  }
  std::map<ConfigurationKey, Tally> tallies;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto r = parse_trigger_record(line, line_number);
    tallies[{r.choice_bit, r.phase, r.blocked}].add(r);
  }
  return finish(tallies, gate);
}

std::vector<FringePoint> fringe_points(const ConfigurationCounts& counts, std::uint8_t choice_bit,
                                       BlockedPath blocked) {
  std::vector<FringePoint> out;
  for (const auto& [key, summary] : counts) {
    if (key.choice_bit == choice_bit && key.blocked == blocked) {
      out.push_back({key.phase, summary});
    }
  }
  return out;
}

CountSummary total_for(const ConfigurationCounts& counts, std::uint8_t choice_bit,
                       BlockedPath blocked) {
  CountSummary total;
  for (const auto& [key, summary] : counts) {
    if (key.choice_bit == choice_bit && key.blocked == blocked) total += summary;
  }
  return total;
}

}  // namespace dcsim
