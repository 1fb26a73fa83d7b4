#pragma once

#include <compare>
#include <cstdint>
#include <map>

namespace dcsim {

enum class BlockedPath : std::uint8_t { none = 0, path1 = 1, path2 = 2 };

/// Detector totals for one interferometer configuration.
///
/// Counts are doubles so that background-corrected values can be carried in
/// the same type; the var_* fields hold their variances.
struct CountSummary {
  double n1 = 0.0;
  double n2 = 0.0;
  double n_coinc = 0.0;
  std::uint64_t n_triggers = 0;
  double duration = 0.0;  ///< detector live time, seconds
  double var_n1 = 0.0;
  double var_n2 = 0.0;
  double var_coinc = 0.0;
  bool clamped = false;   ///< a background correction hit zero

  /// Raw counts with Poisson variances.
  static CountSummary from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n_coinc,
                                  std::uint64_t n_triggers, double duration);

  /// Adds raw counts of another disjoint set of triggers.
  CountSummary& operator+=(const CountSummary& other);
  bool operator==(const CountSummary&) const = default;
};

struct ConfigurationKey {
  std::uint8_t choice_bit = 0;
  double phase = 0.0;
  BlockedPath blocked = BlockedPath::none;

  auto operator<=>(const ConfigurationKey&) const = default;
};

using ConfigurationCounts = std::map<ConfigurationKey, CountSummary>;

}  // namespace dcsim
