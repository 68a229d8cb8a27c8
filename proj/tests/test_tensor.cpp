#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "latc/quantize.hpp"
#include "latc/rng.hpp"
#include "latc/tensor.hpp"
#include "latc/tensor_io.hpp"

using namespace latc;

TEST_CASE("quantize rounds half away from zero about the center") {
  CHECK(quantize_value(2.6, 0.0, 1.0) == 3);
  CHECK(quantize_value(2.6, 2.6, 1.0) == 0);
  CHECK(quantize_value(0.5, 0.0, 1.0) == 1);
  CHECK(quantize_value(-0.5, 0.0, 1.0) == -1);
  CHECK(quantize_value(-2.6, 0.0, 1.0) == -3);
  CHECK(quantize_value(1.2, 0.0, 0.5) == 2);
  CHECK(quantize_value(-1.0, 0.25, 0.5) == -3);
}

TEST_CASE("dequantize reconstructs center + step * q") {
  QuantizedTensor q(Shape{1, 1, 2});
  q.values = {3, 0};
  QuantSpec spec;
  spec.centers = {2.6};
  const LatentTensor y = dequantize(q, spec);
  CHECK(y.values[0] == doctest::Approx(5.6));
  CHECK(y.values[1] == doctest::Approx(2.6));

  spec.centers = {0.0};
  const LatentTensor y0 = dequantize(q, spec);
  CHECK(y0.values[0] == doctest::Approx(3.0));
}

TEST_CASE("quantize then dequantize stays within half a step") {
  const Shape shape{2, 16, 16};
  LatentTensor y(shape);
  const CounterRng rng(42);
  for (size_t i = 0; i < y.size(); ++i)
    y.values[i] = static_cast<float>(4.0 * rng.gaussian(i));
  for (const double step : {0.5, 1.0, 1.3}) {
    const QuantSpec spec = QuantSpec::with_step(step);
    const QuantizedTensor q = quantize(y, spec);
    const LatentTensor back = dequantize(q, spec);
    for (size_t i = 0; i < y.size(); ++i)
      CHECK(std::fabs(back.values[i] - y.values[i]) <= step / 2 + 1e-6);
    CHECK(quantize(back, spec).values == q.values);
  }
}

TEST_CASE("per-channel centers quantize each channel about its own mu") {
  const Shape shape{2, 1, 2};
  LatentTensor y(shape);
  y.values = {2.4f, 2.6f, -1.4f, -1.6f};
  QuantSpec spec;
  spec.center_granularity = Granularity::kPerChannel;
  spec.centers = {2.5, -1.5};
  const QuantizedTensor q = quantize(y, spec);
  CHECK(q.values == std::vector<int32_t>{0, 0, 0, 0});
  spec.centers = {2.5};
  CHECK_THROWS_AS(quantize(y, spec), UsageError);
}

TEST_CASE("quantize rejects bad steps and mismatched tensors") {
  LatentTensor y(Shape{1, 1, 4}, 0.0f);
  CHECK_THROWS_AS(quantize(y, QuantSpec::with_step(0.0)), UsageError);
  CHECK_THROWS_AS(quantize(y, QuantSpec::with_step(-1.0)), UsageError);
  y.values.pop_back();
  CHECK_THROWS_AS(quantize(y, QuantSpec::unit()), DataError);
}

TEST_CASE("additive noise is bounded, centered, and replayable") {
  const Shape shape{1, 64, 64};
  LatentTensor y(shape, 1.0f);
  const LatentTensor a = add_uniform_noise(y, 9, 1.0);
  const LatentTensor b = add_uniform_noise(y, 9, 1.0);
  CHECK(a.values == b.values);
  const LatentTensor c = add_uniform_noise(y, 10, 1.0);
  CHECK(a.values != c.values);

  double mean = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - 1.0;
    CHECK(std::fabs(d) < 0.5);
    mean += d;
  }
  mean /= double(a.size());
  CHECK(std::fabs(mean) < 0.02);

  const LatentTensor fine = add_uniform_noise(y, 9, 0.25);
  for (size_t i = 0; i < fine.size(); ++i)
    CHECK(std::fabs(fine.values[i] - 1.0) < 0.125);
}

TEST_CASE("counter rng streams are disjoint and pure") {
  const CounterRng rng(123);
  CHECK(rng.bits(0) == CounterRng(123).bits(0));
  CHECK(rng.split(1).bits(0) != rng.split(2).bits(0));
  double acc = 0.0;
  for (uint64_t i = 0; i < 4096; ++i) {
    const double u = rng.uniform_open(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    acc += u;
  }
  CHECK(acc / 4096.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("tensor file round trip is bit exact") {
  const Shape shape{3, 5, 7};
  LatentTensor y(shape);
  const CounterRng rng(7);
  for (size_t i = 0; i < y.size(); ++i)
    y.values[i] = static_cast<float>(100.0 * rng.uniform_sym(i));
  y.values[0] = 0.1f;  // not exactly representable; survives f32 round trip

  const std::vector<uint8_t> bytes = serialize_tensor(y);
  const LatentTensor back = parse_tensor(bytes);
  CHECK(back.shape == shape);
  CHECK(back.values == y.values);
}

TEST_CASE("tensor parser rejects corrupt headers and short payloads") {
  LatentTensor y(Shape{1, 2, 2}, 1.5f);
  std::vector<uint8_t> bytes = serialize_tensor(y);

  std::vector<uint8_t> bad = bytes;
  bad[0] ^= 0xFF;
  CHECK_THROWS_AS(parse_tensor(bad), DataError);

  std::vector<uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  CHECK_THROWS_AS(parse_tensor(truncated), DataError);

  std::vector<uint8_t> tiny(bytes.begin(), bytes.begin() + 3);
  CHECK_THROWS_AS(parse_tensor(tiny), DataError);
}
