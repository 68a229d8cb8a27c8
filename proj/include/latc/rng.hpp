#ifndef LATC_RNG_HPP
#define LATC_RNG_HPP

#include <cmath>
#include <cstdint>

#include "latc/tensor.hpp"

namespace latc {

// Counter-based generator built on the SplitMix64 finalizer: output i of a
// stream is mix(seed + (i+1)*gamma). Pure function of (seed, index), so
// parallel callers partition the index space and runs replay exactly.
inline uint64_t splitmix64_at(uint64_t seed, uint64_t index) {
  uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  // Derives an independent stream; used to keep noise draws, component
  // choices etc. on disjoint index spaces.
  CounterRng split(uint64_t stream) const {
    return CounterRng(splitmix64_at(seed_ ^ 0xA02BDBF7BB3C0A7ULL, stream));
  }

  uint64_t bits(uint64_t i) const { return splitmix64_at(seed_, i); }

  // Uniform on the open interval (0, 1).
  double uniform_open(uint64_t i) const {
    return (static_cast<double>(bits(i) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on the open interval (-1/2, 1/2).
  double uniform_sym(uint64_t i) const { return uniform_open(i) - 0.5; }

  // Standard normal via Box-Muller; one draw consumes indices 2i and 2i+1.
  double gaussian(uint64_t i) const {
    const double u1 = uniform_open(2 * i);
    const double u2 = uniform_open(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Laplace(0, b) by inverse CDF.
  double laplace(uint64_t i, double b) const {
    const double u = uniform_sym(i);
    const double mag = -b * std::log1p(-2.0 * std::fabs(u));
    return u < 0 ? -mag : mag;
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

// Additive uniform noise on (-step/2, step/2), the training-time stand-in
// for quantization.
inline LatentTensor add_uniform_noise(const LatentTensor& y, uint64_t seed,
                                      double step = 1.0) {
  check_tensor(y);
  CounterRng rng(seed);
  LatentTensor out = y;
  for (size_t i = 0; i < out.size(); ++i)
    out.values[i] =
        static_cast<float>(out.values[i] + step * rng.uniform_sym(i));
  return out;
}

}  // namespace latc

#endif  // LATC_RNG_HPP
