#ifndef LATC_MODELS_HPP
#define LATC_MODELS_HPP

#include <cstdint>
#include <vector>

#include "latc/params.hpp"

namespace latc {

// Truncated probability table over [-K, K] plus the mass beyond it.
struct DiscretePmf {
  int support_cap = 0;  // K
  std::vector<double> probs;  // index k + K
  double tail_mass = 0.0;

  double prob(int k) const { return probs[size_t(k + support_cap)]; }
  double total() const;
};

// Code length in bits of one entropy-coded flag: -log2(p) when the flag
// fires, -log2(1-p) otherwise.
double flag_code_length(double p, int bit);

// Conditional code length of an explicit magnitude k >= 2 given |q| > 1,
// under a centered Laplace tail with scale sigma (renormalized discretized
// Laplace; closed form).
double explicit_code_length(int k, double sigma);

// 2^-explicit_code_length: the conditional probability of magnitude k.
double explicit_conditional_prob(int k, double sigma);

// Conditional mass of magnitudes beyond K (sum of the conditional over
// k > K; closed form of the geometric remainder).
double explicit_tail_remainder(int support_cap, double sigma);

// Total code length of symbol q under the binary flag decomposition:
// G0 for zero, G0+G1+sign for +-1, G0+G1+sign+explicit for |q| >= 2.
// Exactly symmetric in q. Operates on the centered symbol; params.mu is a
// quantizer-side concern.
double binary_code_length(int32_t q, const ModelParams& params);

// PMF of the binary model on [-K, K] with the remainder in tail_mass.
DiscretePmf binary_pmf(const ModelParams& params, int support_cap);

// Discretized-likelihood code lengths: -log2 of the interval mass of width
// step centered on the reconstruction point of q. `center` is the
// quantizer center offset (zero for the baselines' convention).
double gaussian_code_length(int32_t q, const ModelParams& params,
                            double step = 1.0, double center = 0.0);
double laplace_code_length(int32_t q, const ModelParams& params,
                           double step = 1.0, double center = 0.0);

// Uniform dispatch used by the coder and eval modules.
double model_code_length(ModelKind kind, int32_t q, const ModelParams& params,
                         double step = 1.0);
DiscretePmf model_pmf(ModelKind kind, const ModelParams& params,
                      int support_cap, double step = 1.0);

// Interval masses of the two continuous baselines; exposed for the relaxed
// rates, which share the exact same discretization arithmetic.
double gaussian_interval_mass(double lo, double hi, double mu, double sigma);
double laplace_interval_mass(double lo, double hi, double mu, double sigma);

}  // namespace latc

#endif  // LATC_MODELS_HPP
