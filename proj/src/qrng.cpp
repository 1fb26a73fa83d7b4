#include "dcsim/qrng.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "dcsim/error.hpp"

namespace dcsim {

std::vector<std::uint8_t> generate_bits(const NoiseModel& model, std::size_t count) {
  ShotNoiseComparator comparator(model);
  std::vector<std::uint8_t> bits(count);
  for (auto& b : bits) b = comparator.next_choice_bit().value;
  return bits;
}

std::vector<std::uint8_t> bit_values(std::span<const ChoiceBit> bits) {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (const auto& b : bits) out.push_back(b.value);
  return out;
}

BiasReport bias_test(std::span<const std::uint8_t> bits, double threshold) {
  if (bits.size() < 100) {
    throw InsufficientDataError("bias test needs at least 100 bits, got " +
                                std::to_string(bits.size()));
  }
  std::size_t ones = 0;
  for (auto b : bits) ones += (b != 0);
  BiasReport r;
  r.n = bits.size();
  r.frequency = static_cast<double>(ones) / static_cast<double>(r.n);
  r.z = (r.frequency - 0.5) / std::sqrt(0.25 / static_cast<double>(r.n));
  r.pass = std::abs(r.z) <= threshold;
  return r;
}

BiasReport bias_test(std::span<const ChoiceBit> bits, double threshold) {
  const auto values = bit_values(bits);
  return bias_test(std::span<const std::uint8_t>(values), threshold);
}

AutocorrelationReport autocorrelation_test(std::span<const std::uint8_t> bits, int max_lag,
                                           double nsigma) {
  if (max_lag < 1) throw ConfigError("max_lag must be at least 1");
  const std::size_t n = bits.size();
  if (n <= 10 * static_cast<std::size_t>(max_lag)) {
    throw InsufficientDataError("autocorrelation test needs more than 10*max_lag bits");
  }
  AutocorrelationReport rep;
  rep.bound = nsigma / std::sqrt(static_cast<double>(n));

  std::size_t ones = 0;
  for (auto b : bits) ones += (b != 0);
  const double mean = static_cast<double>(ones) / static_cast<double>(n);
  double var = 0.0;
  for (auto b : bits) {
    const double d = (b != 0) - mean;
    var += d * d;
  }
  if (var == 0.0) {
    rep.degenerate = true;
    rep.pass = false;
    return rep;
  }

  rep.pass = true;
  rep.r.reserve(max_lag);
  for (int k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      acc += ((bits[i] != 0) - mean) * ((bits[i + k] != 0) - mean);
    }
    const double rk = acc / var;
    rep.r.push_back(rk);
    if (std::abs(rk) > rep.bound) rep.pass = false;
  }
  return rep;
}

void write_bit_stream(const std::filesystem::path& path, std::span<const std::uint8_t> bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (auto b : bits) out.put(static_cast<char>(b != 0 ? 1 : 0));
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_bit_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bits{std::istreambuf_iterator<char>(in),
                                 std::istreambuf_iterator<char>()};
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw ParseError("bit stream byte " + std::to_string(i) + " is not 0/1");
  }
  return bits;
}

}  // namespace dcsim
