#ifndef LATC_TENSOR_HPP
#define LATC_TENSOR_HPP

#include <cstdint>
#include <vector>

#include "latc/common.hpp"

namespace latc {

struct Shape {
  uint32_t channels = 0;
  uint32_t height = 0;
  uint32_t width = 0;

  size_t elements() const {
    return static_cast<size_t>(channels) * height * width;
  }
  size_t per_channel() const { return static_cast<size_t>(height) * width; }
  bool operator==(const Shape&) const = default;
};

// Real-valued latents, row-major in channel-then-row order.
struct LatentTensor {
  Shape shape;
  std::vector<float> values;

  LatentTensor() = default;
  LatentTensor(Shape s, float fill = 0.0f)
      : shape(s), values(s.elements(), fill) {}

  size_t size() const { return values.size(); }
  float& at(size_t c, size_t y, size_t x) {
    return values[(c * shape.height + y) * shape.width + x];
  }
  float at(size_t c, size_t y, size_t x) const {
    return values[(c * shape.height + y) * shape.width + x];
  }
};

// Integer symbols after centering and uniform quantization.
struct QuantizedTensor {
  Shape shape;
  std::vector<int32_t> values;

  QuantizedTensor() = default;
  explicit QuantizedTensor(Shape s) : shape(s), values(s.elements(), 0) {}

  size_t size() const { return values.size(); }
};

inline void check_tensor(const LatentTensor& t) {
  if (t.values.size() != t.shape.elements())
    throw DataError("tensor value count does not match dims");
}

}  // namespace latc

#endif  // LATC_TENSOR_HPP
