#ifndef LATC_CDF_HPP
#define LATC_CDF_HPP

#include <cstdint>
#include <vector>

#include "latc/models.hpp"

namespace latc {

// Fixed-point cumulative table for the range coder: cum[0] = 0,
// cum[symbols()] = 2^precision, strictly increasing (every cell nonzero).
struct QuantizedCdf {
  std::vector<uint32_t> cum;
  int precision = kCoderPrecision;

  size_t symbols() const { return cum.size() - 1; }
  uint32_t freq(size_t s) const { return cum[s + 1] - cum[s]; }
  uint32_t total() const { return cum.back(); }
  // Index s with cum[s] <= value < cum[s+1].
  size_t lookup(uint32_t value) const;
};

// Largest-remainder allocation of 2^precision counts proportional to
// masses, then a fixup pass that lifts empty cells to one count by taking
// from the fullest cell. Throws if the alphabet cannot fit.
QuantizedCdf quantize_cdf(const std::vector<double>& masses, int precision);

// Conditional CDF of explicit magnitudes {2 .. K} given |q| > 1, with a
// final escape cell holding the mass beyond K. Symbol s is magnitude s + 2;
// the escape is the last symbol.
QuantizedCdf build_tail_cdf(double sigma, int support_cap,
                            int precision = kCoderPrecision);

// Full-support CDF of a truncated PMF over [-K .. K] plus a final escape
// cell for the tail mass. Symbol s is value s - K; escape is last.
QuantizedCdf build_model_cdf(const DiscretePmf& pmf,
                             int precision = kCoderPrecision);

}  // namespace latc

#endif  // LATC_CDF_HPP
