#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace optimist {

// Seeded random stream. Each simulation owns one; streams derived from the
// same (seed, stream) pair replay identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();                 // [0, 1)
  double normal();                  // N(0, 1)
  double gamma(double shape);       // Gamma(shape, 1)
  int uniform_int(int lo, int hi);  // inclusive bounds

  // Index drawn with probabilities proportional to `weights`.
  int categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace optimist
