#pragma once

#include <cstdint>
#include <random>

namespace ergo {

// Mixes (seed, index) into an independent stream seed. Batch drivers derive
// one stream per task so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Portable RNG: mt19937_64 engine with hand-rolled variate transforms, since
// std:: distributions are not bit-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ergo
