#pragma once

#include <cmath>
#include <cstdint>

namespace hk {

// Counter-style splitmix64 generator. State advances by a fixed odd constant,
// so a seed fully determines the stream on every platform ("splitmix64-v1"
// in experiment reports).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static const char* version() { return "splitmix64-v1"; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1): 53-bit mantissa, never exactly 0 so log() is safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller transform; one fresh pair of uniforms per call keeps the
  // stream position independent of call parity.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t state_;
};

}  // namespace hk
