#include "latc/codec.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <unordered_map>

#include "latc/cdf.hpp"
#include "latc/models.hpp"
#include "latc/range_coder.hpp"
#include "latc/wire.hpp"

namespace latc {

namespace {

constexpr char kMagic[4] = {'L', 'B', 'I', 'N'};
constexpr uint8_t kVersion = 1;

std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

uint32_t prob_fixed(double p) {
  const double clamped = clamp_probability(p);
  const long v = std::lround(clamped * double(rc::kProbScale));
  if (v < 1) return 1;
  if (v > long(rc::kProbScale) - 1) return rc::kProbScale - 1;
  return uint32_t(v);
}

// CDFs are deterministic functions of the parameters, so repeated records
// (per-channel, or per-element maps with ties) share one table. Keys are
// the exact parameter bit patterns.
struct CdfCache {
  std::unordered_map<uint64_t, QuantizedCdf> tail;
  std::map<std::pair<uint64_t, uint64_t>, QuantizedCdf> full;

  const QuantizedCdf& tail_for(double sigma, int cap) {
    const uint64_t key = std::bit_cast<uint64_t>(sigma);
    auto it = tail.find(key);
    if (it == tail.end()) {
      it = tail.emplace(key, build_tail_cdf(sigma, cap)).first;
    }
    return it->second;
  }

  const QuantizedCdf& full_for(ModelKind kind, const ModelParams& p, int cap,
                               double step) {
    const std::pair<uint64_t, uint64_t> key{std::bit_cast<uint64_t>(p.mu),
                                            std::bit_cast<uint64_t>(p.sigma)};
    auto it = full.find(key);
    if (it == full.end()) {
      it = full.emplace(key, build_model_cdf(model_pmf(kind, p, cap, step)))
               .first;
    }
    return it->second;
  }
};

void encode_binary_value(RangeEncoder& enc, int32_t q, const ModelParams& p,
                         const QuantizedCdf& tail, int cap) {
  const uint32_t p0 = prob_fixed(p.p_g0);
  if (q == 0) {
    enc.encode_bit(0, p0);
    return;
  }
  enc.encode_bit(1, p0);
  const uint32_t p1 = prob_fixed(p.p_g1);
  const uint32_t mag = q < 0 ? uint32_t(-int64_t(q)) : uint32_t(q);
  enc.encode_bit(mag > 1 ? 1 : 0, p1);
  enc.encode_bypass(q < 0 ? 1 : 0, 1);
  if (mag <= 1) return;
  if (mag <= uint32_t(cap)) {
    const size_t s = size_t(mag - 2);
    enc.encode_symbol(tail.cum[s], tail.freq(s));
  } else {
    const size_t esc = tail.symbols() - 1;
    enc.encode_symbol(tail.cum[esc], tail.freq(esc));
    enc.encode_bypass(mag, 32);
  }
}

int32_t decode_binary_value(RangeDecoder& dec, const ModelParams& p,
                            const QuantizedCdf& tail, int cap) {
  const uint32_t p0 = prob_fixed(p.p_g0);
  if (dec.decode_bit(p0) == 0) return 0;
  const uint32_t p1 = prob_fixed(p.p_g1);
  const int greater_one = dec.decode_bit(p1);
  const int negative = int(dec.decode_bypass(1));
  uint32_t mag = 1;
  if (greater_one) {
    const size_t s = tail.lookup(dec.decode_cum());
    dec.decode_advance(tail.cum[s], tail.freq(s));
    if (s == tail.symbols() - 1) {
      mag = dec.decode_bypass(32);
      if (mag <= uint32_t(cap) || mag > uint32_t(INT32_MAX)) {
        throw DataError("escaped magnitude out of range");
      }
    } else {
      mag = uint32_t(s) + 2;
    }
  }
  return negative ? -int32_t(mag) : int32_t(mag);
}

void encode_full_value(RangeEncoder& enc, int32_t q, const QuantizedCdf& cdf,
                       int cap) {
  if (q >= -cap && q <= cap) {
    const size_t s = size_t(q + cap);
    enc.encode_symbol(cdf.cum[s], cdf.freq(s));
    return;
  }
  const size_t esc = cdf.symbols() - 1;
  enc.encode_symbol(cdf.cum[esc], cdf.freq(esc));
  enc.encode_bypass(q < 0 ? 1 : 0, 1);
  const uint32_t mag = q < 0 ? uint32_t(-int64_t(q)) : uint32_t(q);
  enc.encode_bypass(mag, 32);
}

int32_t decode_full_value(RangeDecoder& dec, const QuantizedCdf& cdf, int cap) {
  const size_t s = cdf.lookup(dec.decode_cum());
  dec.decode_advance(cdf.cum[s], cdf.freq(s));
  if (s != cdf.symbols() - 1) return int32_t(s) - cap;
  const int negative = int(dec.decode_bypass(1));
  const uint32_t mag = dec.decode_bypass(32);
  if (mag <= uint32_t(cap) || mag > uint32_t(INT32_MAX)) {
    throw DataError("escaped magnitude out of range");
  }
  return negative ? -int32_t(mag) : int32_t(mag);
}

void check_coding_args(const Shape& shape, const ParamSet& params, double step,
                       int support_cap) {
  params.validate(shape);
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw UsageError("step must be positive");
  }
  if (support_cap < 2 || support_cap > 4096) {
    throw UsageError("support cap outside [2, 4096]");
  }
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t size) {
  static const std::array<uint32_t, 256> table = make_crc_table();
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::vector<uint8_t> encode_payload(const QuantizedTensor& q,
                                    const ParamSet& params, double step,
                                    int support_cap) {
  check_coding_args(q.shape, params, step, support_cap);
  RangeEncoder enc;
  CdfCache cache;
  const size_t n = q.shape.elements();
  for (size_t i = 0; i < n; ++i) {
    const ModelParams& p = params.at(q.shape, i);
    if (params.kind == ModelKind::kBinary) {
      encode_binary_value(enc, q.values[i], p,
                          cache.tail_for(p.sigma, support_cap), support_cap);
    } else {
      encode_full_value(enc, q.values[i],
                        cache.full_for(params.kind, p, support_cap, step),
                        support_cap);
    }
  }
  return enc.finish();
}

QuantizedTensor decode_payload(const uint8_t* data, size_t size,
                               const Shape& shape, const ParamSet& params,
                               double step, int support_cap) {
  check_coding_args(shape, params, step, support_cap);
  RangeDecoder dec(data, size);
  CdfCache cache;
  QuantizedTensor q;
  q.shape = shape;
  const size_t n = shape.elements();
  q.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const ModelParams& p = params.at(shape, i);
    if (params.kind == ModelKind::kBinary) {
      q.values[i] = decode_binary_value(
          dec, p, cache.tail_for(p.sigma, support_cap), support_cap);
    } else {
      q.values[i] = decode_full_value(
          dec, cache.full_for(params.kind, p, support_cap, step), support_cap);
    }
  }
  if (dec.consumed() != size) throw DataError("trailing bytes in payload");
  return q;
}

EncodedTensor encode_tensor(const QuantizedTensor& q, const ParamSet& params,
                            double step, int support_cap) {
  EncodedTensor enc;
  enc.shape = q.shape;
  enc.step = step;
  enc.params = params;
  enc.payload = encode_payload(q, params, step, support_cap);
  return enc;
}

QuantizedTensor decode_tensor(const EncodedTensor& enc, int support_cap) {
  return decode_payload(enc.payload.data(), enc.payload.size(), enc.shape,
                        enc.params, enc.step, support_cap);
}

std::vector<uint8_t> serialize_encoded(const EncodedTensor& enc) {
  enc.params.validate(enc.shape);
  ByteWriter w;
  w.magic(kMagic);
  w.u8(kVersion);
  w.u8(uint8_t(enc.params.kind));
  w.u32(enc.shape.channels);
  w.u32(enc.shape.height);
  w.u32(enc.shape.width);
  w.f32(float(enc.step));
  const std::vector<uint8_t> prm = serialize_params(enc.params);
  w.raw(prm.data(), prm.size());
  w.u32(uint32_t(enc.payload.size()));
  w.u32(crc32(enc.payload.data(), enc.payload.size()));
  w.raw(enc.payload.data(), enc.payload.size());
  return w.take();
}

EncodedTensor parse_encoded(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  r.expect_magic(kMagic, "coded tensor");
  if (r.u8() != kVersion) throw DataError("unsupported coded tensor version");
  const uint8_t kind = r.u8();
  if (kind > uint8_t(ModelKind::kBinary)) {
    throw DataError("unknown model kind in coded tensor");
  }

  EncodedTensor enc;
  enc.shape.channels = r.u32();
  enc.shape.height = r.u32();
  enc.shape.width = r.u32();
  const float step = r.f32();
  if (!(step > 0.0f) || !std::isfinite(step)) {
    throw DataError("bad step in coded tensor");
  }
  enc.step = double(step);

  size_t consumed = 0;
  enc.params = parse_params(r.cursor(), r.remaining(), &consumed);
  if (enc.params.kind != ModelKind(kind)) {
    throw DataError("model kind mismatch in coded tensor");
  }
  r.skip(consumed);

  const uint32_t payload_size = r.u32();
  const uint32_t checksum = r.u32();
  if (r.remaining() != payload_size) throw DataError("truncated coded tensor");
  enc.payload.assign(r.cursor(), r.cursor() + payload_size);
  if (crc32(enc.payload.data(), enc.payload.size()) != checksum) {
    throw DataError("coded tensor checksum mismatch");
  }
  enc.params.validate(enc.shape);
  return enc;
}

void write_encoded(const EncodedTensor& enc, const std::string& path) {
  write_file_bytes(path, serialize_encoded(enc));
}

EncodedTensor read_encoded(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  return parse_encoded(bytes.data(), bytes.size());
}

}  // namespace latc
