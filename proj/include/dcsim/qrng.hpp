#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dcsim/random.hpp"

namespace dcsim {

struct NoiseModel {
  double mean_offset = 0.0;  ///< comparator offset in units of the noise rms
  std::uint64_t seed = 0;
};

struct ChoiceBit {
  std::uint8_t value = 0;
  std::uint64_t trigger_index = 0;
};

/// Sign comparator on Gaussian shot noise, one bit per clock period.
class ShotNoiseComparator {
 public:
  explicit ShotNoiseComparator(const NoiseModel& model, std::uint64_t first_trigger = 0)
      : offset_(model.mean_offset), rng_(model.seed), next_index_(first_trigger) {}

  ChoiceBit next_choice_bit() {
    const double v = rng_.normal() + offset_;
    return {static_cast<std::uint8_t>(v > 0.0 ? 1 : 0), next_index_++};
  }

  std::uint64_t next_index() const { return next_index_; }

 private:
  double offset_;
  Rng rng_;
  std::uint64_t next_index_;
};

/// Draws `count` bits from a fresh comparator.
std::vector<std::uint8_t> generate_bits(const NoiseModel& model, std::size_t count);

std::vector<std::uint8_t> bit_values(std::span<const ChoiceBit> bits);

struct BiasReport {
  std::size_t n = 0;
  double frequency = 0.0;
  double z = 0.0;
  bool pass = false;
};

/// Frequency test: z = (f - 1/2) / sqrt(1 / (4n)). Requires at least 100 bits.
BiasReport bias_test(std::span<const std::uint8_t> bits, double threshold = 4.0);
BiasReport bias_test(std::span<const ChoiceBit> bits, double threshold = 4.0);

struct AutocorrelationReport {
  std::vector<double> r;  ///< r[k-1] is the lag-k coefficient
  double bound = 0.0;     ///< nsigma / sqrt(n)
  bool degenerate = false;
  bool pass = false;
};

/// Sample autocorrelation of the centered sequence for lags 1..max_lag.
/// Requires more than 10 * max_lag bits.
AutocorrelationReport autocorrelation_test(std::span<const std::uint8_t> bits, int max_lag,
                                           double nsigma = 4.0);

/// One byte per bit, values 0/1.
void write_bit_stream(const std::filesystem::path& path, std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> read_bit_stream(const std::filesystem::path& path);

}  // namespace dcsim
