#ifndef LATC_PARAMS_HPP
#define LATC_PARAMS_HPP

#include <string>
#include <vector>

#include "latc/common.hpp"
#include "latc/tensor.hpp"

namespace latc {

// Byte values match the LPRM / LBIN model-kind field.
enum class ModelKind : uint8_t {
  kGaussian = 0,
  kLaplace = 1,
  kBinary = 2,
};

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

const char* granularity_name(Granularity g);
Granularity granularity_from_name(const std::string& name);

// One latent's distribution parameters. Gaussian/Laplace use (mu, sigma);
// the binary model uses the full quadruple (mu, sigma, p_g0, p_g1) where
// sigma is the Laplace scale of the explicit tail.
struct ModelParams {
  double mu = 0.0;
  double sigma = 1.0;
  double p_g0 = 0.5;
  double p_g1 = 0.5;
};

// Clamps a probability into [eps, 1-eps]; rejects values outside (0,1).
double clamp_probability(double p);
void validate_params(ModelKind kind, const ModelParams& p);

// Parameter set covering a tensor at some granularity.
struct ParamSet {
  ModelKind kind = ModelKind::kGaussian;
  Granularity granularity = Granularity::kPerTensor;
  std::vector<ModelParams> records;

  size_t expected_records(const Shape& shape) const;
  void validate(const Shape& shape) const;

  const ModelParams& at(const Shape& shape, size_t element_index) const {
    switch (granularity) {
      case Granularity::kPerChannel:
        return records[element_index / shape.per_channel()];
      case Granularity::kPerElement:
        return records[element_index];
      case Granularity::kPerTensor:
      default:
        return records[0];
    }
  }
};

// Parameter file ("LPRM"): magic | version 0x01 | model-kind byte |
// granularity byte | count u32 LE | records of f32 LE values,
// (mu, sigma) for Gaussian/Laplace and (mu, sigma, p_g0, p_g1) for binary.
std::vector<uint8_t> serialize_params(const ParamSet& params);
ParamSet parse_params(const uint8_t* data, size_t size, size_t* consumed = nullptr);

void write_params(const ParamSet& params, const std::string& path);
ParamSet read_params(const std::string& path);

}  // namespace latc

#endif  // LATC_PARAMS_HPP
