#pragma once

#include <cstdint>

#include "inekf/lie_group.hpp"

namespace inekf {

/// Counter-based deterministic generator (SplitMix64 finalizer over a keyed
/// counter). Every noise channel derives its own substream from the run seed,
/// so channels can be added or re-ordered without disturbing each other.
class SubstreamRng {
 public:
  SubstreamRng(uint64_t seed, uint64_t stream);

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (pair-cached).
  double normal();
  Vec3 normal3(double std_dev);

  uint64_t next_u64();

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stream identifiers for the simulator's noise channels.
enum class NoiseStream : uint64_t {
  kGyro = 1,
  kAccel = 2,
  kGyroBias = 3,
  kAccelBias = 4,
  kEncoder = 5,
  kInit = 6,
  kMonteCarlo = 7,
  kSampling = 8,
};

SubstreamRng make_stream(uint64_t seed, NoiseStream stream, uint64_t salt = 0);

}  // namespace inekf
