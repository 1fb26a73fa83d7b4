#pragma once

// Per-chunk trigger engine shared by the OpenMP and serial drivers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "dcsim/qrng.hpp"
#include "dcsim/random.hpp"
#include "dcsim/simulator.hpp"

namespace dcsim::detail {

inline constexpr std::uint64_t kPhysicsStream = 1;
inline constexpr std::uint64_t kQrngStream = 2;

struct PreparedSpan {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  double phase = 0.0;
  std::array<double, 2> p_d1{};  // open-interferometer P1 probability per choice bit
};

struct PreparedRun {
  const RunConfig* cfg = nullptr;
  std::vector<PreparedSpan> spans;
  std::array<double, 2> reflectivity{};  // per choice bit
  std::array<double, 2> v_eom{};
  double p_dark = 0.0;
  std::uint64_t n_chunks = 0;
};

/// Validates `cfg` (including the delayed-choice geometry) and precomputes
/// per-span probabilities. Throws on any invalid input.
PreparedRun prepare(const RunConfig& cfg);

/// Simulates triggers [chunk * kChunkTriggers, ...) and hands each record to `sink`.
template <class Sink>
void simulate_chunk(const PreparedRun& run, std::uint64_t chunk, Sink&& sink) {
  const RunConfig& cfg = *run.cfg;
  const std::uint64_t begin = chunk * kChunkTriggers;
  const std::uint64_t end = std::min(cfg.n_triggers, begin + kChunkTriggers);

  Rng rng(derive_seed(cfg.seed, kPhysicsStream, chunk));
  ShotNoiseComparator qrng({cfg.qrng_offset, derive_seed(cfg.seed, kQrngStream, chunk)}, begin);

  auto span = std::upper_bound(run.spans.begin(), run.spans.end(), begin,
                               [](std::uint64_t i, const PreparedSpan& s) { return i < s.end; });
  const double efficiency = cfg.detector.efficiency;
  const auto blocked = cfg.blocked_path;

  for (std::uint64_t i = begin; i < end; ++i) {
    while (i >= span->end) ++span;

    // One comparator bit per clock period, consumed even when the choice is forced.
    std::uint8_t bit = qrng.next_choice_bit().value;
    if (cfg.choice_mode == ChoiceMode::forced_zero) bit = 0;
    if (cfg.choice_mode == ChoiceMode::forced_one) bit = 1;

    const int photons = sample_emission(cfg.emission, rng).photon_count;
    bool click1 = false;
    bool click2 = false;
    for (int k = 0; k < photons; ++k) {
      if (!rng.bernoulli(efficiency)) continue;
      if (blocked == BlockedPath::none) {
        (rng.uniform() < span->p_d1[bit] ? click1 : click2) = true;
        continue;
      }
      const bool in_path1 = rng.uniform() < 0.5;
      if (in_path1 == (blocked == BlockedPath::path1)) continue;  // absorbed
      const bool aligned = rng.bernoulli(1.0 - run.reflectivity[bit]);
      ((in_path1 == aligned) ? click1 : click2) = true;
    }
    if (run.p_dark > 0.0) {
      if (rng.uniform() < run.p_dark) click1 = true;
      if (rng.uniform() < run.p_dark) click2 = true;
    }

    sink(TriggerRecord{i, bit, run.v_eom[bit], span->phase, blocked, click1, click2,
                       static_cast<std::uint8_t>(photons)});
  }
}

}  // namespace dcsim::detail
