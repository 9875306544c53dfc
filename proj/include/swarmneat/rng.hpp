#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace swarmneat {

// Portable seeded random source. Distributions are implemented here rather
// than taken from <random> so that streams are identical across standard
// libraries; only the engine (fully specified by the standard) is reused.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller; one engine pair per draw, no cached spare.
  double gaussian();
  double gaussian(double mean, double stdev) { return mean + stdev * gaussian(); }

  bool chance(double p) { return uniform() < p; }

  std::string state() const;
  void restore(const std::string& state);

private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stable seed derivation over an ordered list of integers. The mixing is
// fixed: h0 = splitmix64(0x5eed), h_{i+1} = splitmix64(h_i ^ splitmix64(v_i)).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace swarmneat
