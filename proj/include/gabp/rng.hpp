#pragma once

#include <cstdint>
#include <random>

namespace gabp {

// Mix function of the splitmix64 generator; used to derive independent
// per-frame seeds from one scenario seed.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic draws built directly on raw mt19937_64 output so results do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1), 53-bit resolution.
  double uniform01();
  // +-1 with equal probability.
  double sign();
  // Standard normal via the Marsaglia polar method (one value per accepted
  // pair; the second is discarded to keep the stream position predictable).
  double gaussian();

 private:
  std::mt19937_64 gen_;
};

}  // namespace gabp
