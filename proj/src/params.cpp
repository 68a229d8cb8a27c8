#include "latc/params.hpp"

#include <cmath>

#include "latc/wire.hpp"

namespace latc {

namespace {
constexpr char kMagic[4] = {'L', 'P', 'R', 'M'};
constexpr uint8_t kVersion = 0x01;
constexpr uint32_t kMaxRecords = uint32_t(1) << 31;
}  // namespace

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGaussian: return "gaussian";
    case ModelKind::kLaplace: return "laplace";
    case ModelKind::kBinary: return "binary";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "gaussian") return ModelKind::kGaussian;
  if (name == "laplace") return ModelKind::kLaplace;
  if (name == "binary") return ModelKind::kBinary;
  throw UsageError("unknown model kind: " + name);
}

const char* granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kPerTensor: return "per-tensor";
    case Granularity::kPerChannel: return "per-channel";
    case Granularity::kPerElement: return "per-element";
  }
  return "unknown";
}

Granularity granularity_from_name(const std::string& name) {
  if (name == "per-tensor") return Granularity::kPerTensor;
  if (name == "per-channel") return Granularity::kPerChannel;
  if (name == "per-element") return Granularity::kPerElement;
  throw UsageError("unknown granularity: " + name);
}

double clamp_probability(double p) {
  if (!(p > 0.0) || !(p < 1.0) || !std::isfinite(p))
    throw UsageError("probability must lie in (0, 1)");
  if (p < kProbEps) return kProbEps;
  if (p > 1.0 - kProbEps) return 1.0 - kProbEps;
  return p;
}

void validate_params(ModelKind kind, const ModelParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw UsageError("sigma must be positive");
  if (!std::isfinite(p.mu)) throw UsageError("mu must be finite");
  if (kind == ModelKind::kBinary) {
    if (!(p.p_g0 > 0.0 && p.p_g0 < 1.0 && p.p_g1 > 0.0 && p.p_g1 < 1.0))
      throw UsageError("flag probabilities must lie in (0, 1)");
  }
}

size_t ParamSet::expected_records(const Shape& shape) const {
  switch (granularity) {
    case Granularity::kPerChannel: return shape.channels;
    case Granularity::kPerElement: return shape.elements();
    case Granularity::kPerTensor:
    default: return 1;
  }
}

void ParamSet::validate(const Shape& shape) const {
  if (records.size() != expected_records(shape))
    throw DataError("parameter record count does not match tensor shape");
  for (const ModelParams& p : records) validate_params(kind, p);
}

std::vector<uint8_t> serialize_params(const ParamSet& params) {
  if (params.records.empty()) throw DataError("parameter set is empty");
  ByteWriter w;
  w.magic(kMagic);
  w.u8(kVersion);
  w.u8(uint8_t(params.kind));
  w.u8(uint8_t(params.granularity));
  w.u32(uint32_t(params.records.size()));
  const bool binary = params.kind == ModelKind::kBinary;
  for (const ModelParams& p : params.records) {
    w.f32(float(p.mu));
    w.f32(float(p.sigma));
    if (binary) {
      w.f32(float(p.p_g0));
      w.f32(float(p.p_g1));
    }
  }
  return w.take();
}

ParamSet parse_params(const uint8_t* data, size_t size, size_t* consumed) {
  ByteReader r(data, size);
  r.expect_magic(kMagic, "parameter");
  if (r.u8() != kVersion) throw DataError("unsupported parameter file version");
  const uint8_t kind_byte = r.u8();
  if (kind_byte > 2) throw DataError("unknown model kind byte");
  const uint8_t gran_byte = r.u8();
  if (gran_byte > 2) throw DataError("unknown granularity byte");
  const uint32_t count = r.u32();
  if (count == 0 || count > kMaxRecords)
    throw DataError("bad parameter record count");

  ParamSet params;
  params.kind = ModelKind(kind_byte);
  params.granularity = Granularity(gran_byte);
  params.records.resize(count);
  const bool binary = params.kind == ModelKind::kBinary;
  const size_t record_bytes = binary ? 16 : 8;
  if (r.remaining() < size_t(count) * record_bytes)
    throw DataError("truncated parameter records");
  for (uint32_t i = 0; i < count; ++i) {
    ModelParams& p = params.records[i];
    p.mu = r.f32();
    p.sigma = r.f32();
    if (binary) {
      p.p_g0 = clamp_probability(r.f32());
      p.p_g1 = clamp_probability(r.f32());
    }
    validate_params(params.kind, p);
  }
  if (consumed) *consumed = size - r.remaining();
  return params;
}

void write_params(const ParamSet& params, const std::string& path) {
  write_file_bytes(path, serialize_params(params));
}

ParamSet read_params(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  size_t consumed = 0;
  ParamSet p = parse_params(bytes.data(), bytes.size(), &consumed);
  if (consumed != bytes.size()) throw DataError("trailing bytes in parameter file");
  return p;
}

}  // namespace latc
