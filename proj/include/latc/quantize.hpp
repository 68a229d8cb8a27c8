#ifndef LATC_QUANTIZE_HPP
#define LATC_QUANTIZE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "latc/common.hpp"
#include "latc/tensor.hpp"

namespace latc {

// Uniform scalar quantizer: q = round((y - center) / step) with ties
// rounded half away from zero, so L(k) = L(-k) symmetry stays unbiased.
struct QuantSpec {
  double step = 1.0;
  Granularity center_granularity = Granularity::kPerTensor;
  std::vector<double> centers = {0.0};

  static QuantSpec unit() { return QuantSpec{}; }
  static QuantSpec with_step(double step) {
    QuantSpec s;
    s.step = step;
    return s;
  }
};

namespace detail {

inline void check_spec(const QuantSpec& spec, const Shape& shape) {
  if (!(spec.step > 0.0) || !std::isfinite(spec.step))
    throw UsageError("quantizer step must be positive");
  size_t want = 1;
  switch (spec.center_granularity) {
    case Granularity::kPerTensor: want = 1; break;
    case Granularity::kPerChannel: want = shape.channels; break;
    case Granularity::kPerElement: want = shape.elements(); break;
  }
  if (spec.centers.size() != want)
    throw UsageError("quantizer center count does not match granularity");
}

inline double center_at(const QuantSpec& spec, const Shape& shape, size_t i) {
  switch (spec.center_granularity) {
    case Granularity::kPerChannel:
      return spec.centers[i / shape.per_channel()];
    case Granularity::kPerElement:
      return spec.centers[i];
    case Granularity::kPerTensor:
    default:
      return spec.centers[0];
  }
}

}  // namespace detail

inline int32_t quantize_value(double y, double center, double step) {
  const double t = (y - center) / step;
  const long long q = std::llround(t);  // llround ties away from zero
  if (q > INT32_MAX || q < INT32_MIN)
    throw NumericError("quantized symbol overflows 32-bit range");
  return static_cast<int32_t>(q);
}

inline QuantizedTensor quantize(const LatentTensor& y, const QuantSpec& spec) {
  check_tensor(y);
  detail::check_spec(spec, y.shape);
  QuantizedTensor q(y.shape);
  for (size_t i = 0; i < y.size(); ++i)
    q.values[i] =
        quantize_value(y.values[i], detail::center_at(spec, y.shape, i), spec.step);
  return q;
}

inline LatentTensor dequantize(const QuantizedTensor& q, const QuantSpec& spec) {
  detail::check_spec(spec, q.shape);
  LatentTensor y(q.shape);
  for (size_t i = 0; i < q.size(); ++i)
    y.values[i] = static_cast<float>(detail::center_at(spec, q.shape, i) +
                                     spec.step * q.values[i]);
  return y;
}

}  // namespace latc

#endif  // LATC_QUANTIZE_HPP
