#ifndef LATC_EVAL_HPP
#define LATC_EVAL_HPP

#include <string>
#include <vector>

#include "latc/params.hpp"
#include "latc/quantize.hpp"
#include "latc/tensor.hpp"

namespace latc {

// Quantizer implied by a parameter set: the binary model centers on its mu
// records, the baselines quantize about zero (their mu lives in the
// likelihood).
QuantSpec quantizer_for(const ParamSet& params, double step = 1.0);

struct RdPoint {
  double rate_bpp = 0.0;  // bits per element
  double quality = 0.0;   // PSNR-style, higher is better
};

// Rate-quality curve, sorted by rate. CSV form: header "rate_bpp,quality",
// one point per line.
struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;

  std::string to_csv() const;
  static RdCurve from_csv(const std::string& text);
};

struct RateEstimate {
  double total_bits = 0.0;
  double per_element = 0.0;
};

// Sum of model code lengths over the tensor. Tracks the real payload to
// within the coder's fixed-point and truncation losses.
RateEstimate estimate_rate(const QuantizedTensor& q, const ParamSet& params,
                           double step = 1.0);

// Plug-in entropy of the symbol histogram, bits per element.
double empirical_entropy(const QuantizedTensor& q);

// Mean code length under a single parameter record, bits per element.
// Exceeds empirical_entropy for any model (Gibbs); the gap estimates the
// divergence between data and model.
double empirical_cross_entropy(const QuantizedTensor& q, ModelKind kind,
                               const ModelParams& params, double step = 1.0);
double empirical_kl(const QuantizedTensor& q, ModelKind kind,
                    const ModelParams& params, double step = 1.0);

// Reported for an exact reconstruction instead of infinity.
inline constexpr double kPsnrSentinel = 999.0;

double psnr(double mse, double peak);

// Quantizes y at each step, measuring rate with step-scaled likelihoods
// (no refit) and quality as PSNR of the reconstruction with peak = max |y|.
// The binary model centers the quantizer on its mu records; baselines
// quantize about zero.
RdCurve rd_sweep(const LatentTensor& y, const ParamSet& params,
                 const std::vector<double>& steps);

// Average percent rate difference of test against reference at equal
// quality: least-squares cubic of log2-rate against quality fitted to each
// curve, the difference integrated over the common quality interval.
// Negative means test saves rate.
double bd_rate(const RdCurve& reference, const RdCurve& test);

}  // namespace latc

#endif  // LATC_EVAL_HPP
