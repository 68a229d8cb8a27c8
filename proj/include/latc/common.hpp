#ifndef LATC_COMMON_HPP
#define LATC_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latc {

// Error taxonomy mirrored by the CLI exit codes: usage 1, data/format 2,
// numerical 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameter (and quantizer-center) granularity. Byte values match the
// LPRM file format.
enum class Granularity : uint8_t {
  kPerTensor = 0,
  kPerChannel = 1,
  kPerElement = 2,
};

// Probability clamp applied to flag probabilities and PMF cells before
// coding; keeps code lengths finite and coder intervals nonzero.
inline constexpr double kProbEps = 1.0 / 65536.0;  // 2^-16

// Fixed-point probability precision of the range coder.
inline constexpr int kCoderPrecision = 16;

// Default support cap for materialized PMF tables; magnitudes beyond it
// go through the ESCAPE path.
inline constexpr int kDefaultSupportCap = 255;

}  // namespace latc

#endif  // LATC_COMMON_HPP
