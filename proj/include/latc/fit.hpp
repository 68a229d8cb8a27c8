#ifndef LATC_FIT_HPP
#define LATC_FIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "latc/params.hpp"
#include "latc/tensor.hpp"

namespace latc {

// Synthetic latent sources for experiments and tests. The spike mixture is
// a narrow Gaussian at zero plus Laplace tails: mostly-dead latents with
// occasional large values.
enum class SourceKind : uint8_t {
  kGaussian = 0,
  kLaplace = 1,
  kSpikeMixture = 2,
};

const char* source_kind_name(SourceKind kind);
SourceKind source_kind_from_name(const std::string& name);

struct SourceSpec {
  SourceKind kind = SourceKind::kGaussian;
  double mu = 0.0;
  double sigma = 1.0;          // std / Laplace scale / mixture tail scale
  double spike_weight = 0.8;   // mixture mass of the near-zero component
  double spike_sigma = 0.05;   // std of the near-zero component
  double sigma_growth = 1.0;   // channel c scales sigma by growth^c
};

LatentTensor generate_synthetic(const SourceSpec& spec, const Shape& shape,
                                uint64_t seed);

// Rate-distortion objective: distortion + lambda * rate, where distortion
// is the squared quantization error (binary model centers at mu, baselines
// at zero) and rate is the mean relaxed code length per element. In
// noise_mode the rate term sees y plus fresh uniform noise; otherwise it is
// evaluated at the hard-quantized points, where it equals the exact code
// length.
struct LossBreakdown {
  double distortion = 0.0;
  double rate_bits = 0.0;
  double total = 0.0;
};

LossBreakdown loss(const LatentTensor& samples, ModelKind kind,
                   const ModelParams& params, double lambda, bool noise_mode,
                   uint64_t seed = 1);

// Gradient fit of one parameter group by Adam on the objective above.
// Scale goes through sigma = exp(s) and probabilities through
// p = eps + (1 - 2 eps) * sigmoid(a), so every iterate stays feasible.
//
// Default mode quantizes hard each step (exact histogram objective; the
// center's rate term is frozen there since its one-sided derivatives
// disagree at bin edges, so the center moves on distortion alone).
// noise_mode draws fresh uniform noise each step from a counter RNG, so
// runs replay exactly.
struct FitConfig {
  double lambda = 1.0;
  int steps = 2000;
  double learning_rate = 1e-4;
  std::vector<int> decay_milestones;  // steps at which lr *= decay_factor
  double decay_factor = 0.1;
  uint64_t seed = 1;
  bool noise_mode = false;
  int trace_every = 0;  // record the objective every this many steps
};

struct FitTracePoint {
  int step = 0;
  double distortion = 0.0;
  double rate_bits = 0.0;
  double total = 0.0;
};

struct FitResult {
  ModelParams params;
  double final_loss = 0.0;  // exact hard-quantized objective at the optimum
  std::vector<FitTracePoint> trace;
  int steps_run = 0;
};

FitResult fit_group(ModelKind kind, const float* samples, size_t count,
                    const FitConfig& cfg);

// Fits one record per granularity group. Per-element grouping would leave
// one sample per group and is rejected.
ParamSet fit_params(ModelKind kind, const LatentTensor& latents,
                    Granularity granularity, const FitConfig& cfg);

// Exact objective of a parameter setting on hard-quantized samples:
// reconstruction MSE plus lambda times the mean code length in bits.
double fit_objective(ModelKind kind, const float* samples, size_t count,
                     const ModelParams& params, double lambda);

// Frequency-count optimum of the two flag probabilities for already
// quantized symbols: p_g0 = P(|q| >= 1), p_g1 = P(|q| >= 2 given |q| >= 1),
// both clamped away from 0 and 1.
ModelParams closed_form_binary_flags(const std::vector<int32_t>& q,
                                     double sigma = 1.0);

}  // namespace latc

#endif  // LATC_FIT_HPP
