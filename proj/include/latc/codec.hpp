#ifndef LATC_CODEC_HPP
#define LATC_CODEC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "latc/params.hpp"
#include "latc/quantize.hpp"
#include "latc/tensor.hpp"

namespace latc {

uint32_t crc32(const uint8_t* data, size_t size);

// Range-codes a quantized tensor under a parameter set.
//
// Binary kind: per element, a greater-than-zero flag, then a greater-than-one
// flag, a raw sign bit, and for magnitudes >= 2 a symbol from the shared
// conditional tail CDF. Magnitudes past the support cap send the escape
// symbol followed by 32 raw bits.
//
// Gaussian/Laplace kinds: one symbol from the full-support CDF; values past
// the cap send the escape followed by a raw sign bit and 32 raw magnitude
// bits.
std::vector<uint8_t> encode_payload(const QuantizedTensor& q,
                                    const ParamSet& params, double step = 1.0,
                                    int support_cap = kDefaultSupportCap);
QuantizedTensor decode_payload(const uint8_t* data, size_t size,
                               const Shape& shape, const ParamSet& params,
                               double step = 1.0,
                               int support_cap = kDefaultSupportCap);

// Self-contained coded tensor: shape, quantizer step, parameters, payload.
struct EncodedTensor {
  Shape shape;
  double step = 1.0;
  ParamSet params;
  std::vector<uint8_t> payload;
};

EncodedTensor encode_tensor(const QuantizedTensor& q, const ParamSet& params,
                            double step = 1.0,
                            int support_cap = kDefaultSupportCap);
QuantizedTensor decode_tensor(const EncodedTensor& enc,
                              int support_cap = kDefaultSupportCap);

// Container ("LBIN"): magic | version 0x01 | model-kind byte | 3 u32 LE dims
// | step f32 LE | parameter block | payload length u32 LE | payload CRC-32
// u32 LE | payload.
std::vector<uint8_t> serialize_encoded(const EncodedTensor& enc);
EncodedTensor parse_encoded(const uint8_t* data, size_t size);

void write_encoded(const EncodedTensor& enc, const std::string& path);
EncodedTensor read_encoded(const std::string& path);

}  // namespace latc

#endif  // LATC_CODEC_HPP
