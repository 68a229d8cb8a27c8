#ifndef LATC_RELAXED_HPP
#define LATC_RELAXED_HPP

#include <vector>

#include "latc/params.hpp"

namespace latc {

// Piecewise-linear interpolation weight: 1 on [0, 1/2], 2 - 2t on (1/2, 1),
// floor(t) + 1 - t beyond, so it is exactly 1 at every integer. The flat
// zone keeps the optimization focused on the cost of zeros.
double gamma_weight(double t);

// Continuous surrogate of the binary code length: a weighted sum of the two
// nearest integer code lengths, evaluated on |y| so the surrogate inherits
// the exact sign symmetry of the discrete one. Agrees with
// binary_code_length at every integer. Operates on the centered value.
double relaxed_binary_rate(double y_tilde, const ModelParams& params);

// Noise-convolved baselines: -log2 of the unit-width interval mass
// centered at y. At integers this is exactly the discretized code length.
double relaxed_gaussian_rate(double y_tilde, const ModelParams& params);
double relaxed_laplace_rate(double y_tilde, const ModelParams& params);

double relaxed_rate(ModelKind kind, double y_tilde, const ModelParams& params);

// True at the surrogate's non-differentiable points: |y| = 1/2 and integer
// |y| >= 1.
bool relaxed_binary_kink(double y_tilde);

struct BinaryRateGrad {
  double d_y = 0.0;
  double d_sigma = 0.0;
  double d_pg0 = 0.0;
  double d_pg1 = 0.0;
  bool at_kink = false;  // d_y is the right one-sided derivative there
};

struct LocScaleRateGrad {
  double d_y = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

BinaryRateGrad relaxed_binary_rate_grad(double y_tilde, const ModelParams& params);
LocScaleRateGrad relaxed_gaussian_rate_grad(double y_tilde, const ModelParams& params);
LocScaleRateGrad relaxed_laplace_rate_grad(double y_tilde, const ModelParams& params);

// Central-difference verification of the analytic gradients.
struct FdCheckEntry {
  const char* name;
  double analytic;
  double numeric;
  double rel_error;
};

struct FdCheckReport {
  std::vector<FdCheckEntry> entries;
  double max_rel_error = 0.0;
};

// Compares analytic partials against central differences with step h.
// Rejects h <= 0 and points within 10h of a kink ("subgradient point").
FdCheckReport finite_difference_check(ModelKind kind, double y_tilde,
                                      const ModelParams& params, double h);

}  // namespace latc

#endif  // LATC_RELAXED_HPP
