#include "inekf/rng.hpp"

#include <cmath>

namespace inekf {

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

SubstreamRng::SubstreamRng(uint64_t seed, uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD2B74407B1CE6E93ULL))) {}

uint64_t SubstreamRng::next_u64() { return splitmix64(key_ ^ (++counter_ * 0xA0761D6478BD642FULL)); }

double SubstreamRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SubstreamRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SubstreamRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

Vec3 SubstreamRng::normal3(double std_dev) {
  return Vec3(normal(), normal(), normal()) * std_dev;
}

SubstreamRng make_stream(uint64_t seed, NoiseStream stream, uint64_t salt) {
  return SubstreamRng(seed, static_cast<uint64_t>(stream) + (salt << 8));
}

}  // namespace inekf
