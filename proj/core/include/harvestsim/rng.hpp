#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace harvestsim {

// Seed mixer (splitmix64 finalizer). Used to derive independent streams
// from one root seed so that, e.g., per-invocation saturation draws do not
// depend on how many samples the policy consumed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled variate generation. The std distributions are
// implementation-defined; generating from raw 64-bit words keeps traces and
// rollouts reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Exponential with the given mean (mean = 1/rate).
  double exponential(double mean) {
    return -mean * std::log(1.0 - uniform01());
  }

  // Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Integer in [0, n), n >= 1. Modulo bias is irrelevant at our n.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace harvestsim
