#include "latc/models.hpp"

#include <cmath>

namespace latc {

namespace {

constexpr double kLn2 = 0.6931471805599453;
// Floor on interval masses so code lengths stay finite for any finite q.
constexpr double kTinyMass = 1e-300;

// ln(1 - e^-a) for a > 0 without cancellation on either side.
double log1mexp(double a) {
  return a <= kLn2 ? std::log(-std::expm1(-a)) : std::log1p(-std::exp(-a));
}

double neg_log2(double mass) {
  return -std::log2(mass < kTinyMass ? kTinyMass : mass);
}

}  // namespace

double DiscretePmf::total() const {
  double sum = tail_mass;
  for (double p : probs) sum += p;
  return sum;
}

double flag_code_length(double p, int bit) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("flag probability outside (0, 1)");
  return bit ? -std::log2(p) : -std::log2(1.0 - p);
}

double explicit_code_length(int k, double sigma) {
  if (k < 2) throw UsageError("explicit magnitude must be >= 2");
  if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
  // Laplace tail: conditional mass of k given |q| > 1 telescopes to a
  // geometric law in (k - 2) with ratio e^-1/sigma.
  return (double(k - 2) / sigma - log1mexp(1.0 / sigma)) / kLn2;
}

double explicit_conditional_prob(int k, double sigma) {
  if (k < 2) throw UsageError("explicit magnitude must be >= 2");
  if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
  return std::exp(-double(k - 2) / sigma) * (-std::expm1(-1.0 / sigma));
}

double explicit_tail_remainder(int support_cap, double sigma) {
  if (support_cap < 1) throw UsageError("support cap must be >= 1");
  if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
  return std::exp(-double(support_cap - 1) / sigma);
}

double binary_code_length(int32_t q, const ModelParams& params) {
  validate_params(ModelKind::kBinary, params);
  const double p0 = clamp_probability(params.p_g0);
  if (q == 0) return -std::log2(1.0 - p0);
  const double p1 = clamp_probability(params.p_g1);
  const int64_t mag = std::llabs(int64_t(q));
  double bits = -std::log2(p0) + 1.0;  // G0 fired plus equiprobable sign
  if (mag == 1) return bits - std::log2(1.0 - p1);
  bits += -std::log2(p1);
  if (mag > INT32_MAX) throw NumericError("magnitude out of range");
  return bits + explicit_code_length(int(mag), params.sigma);
}

DiscretePmf binary_pmf(const ModelParams& params, int support_cap) {
  if (support_cap < 1) throw UsageError("support cap must be >= 1");
  validate_params(ModelKind::kBinary, params);
  const double p0 = clamp_probability(params.p_g0);
  const double p1 = clamp_probability(params.p_g1);

  DiscretePmf pmf;
  pmf.support_cap = support_cap;
  pmf.probs.assign(size_t(2 * support_cap + 1), 0.0);
  pmf.probs[size_t(support_cap)] = 1.0 - p0;
  pmf.probs[size_t(support_cap + 1)] = p0 * (1.0 - p1) / 2.0;
  pmf.probs[size_t(support_cap - 1)] = p0 * (1.0 - p1) / 2.0;
  for (int k = 2; k <= support_cap; ++k) {
    const double p = p0 * p1 * 0.5 * explicit_conditional_prob(k, params.sigma);
    pmf.probs[size_t(support_cap + k)] = p;
    pmf.probs[size_t(support_cap - k)] = p;
  }
  pmf.tail_mass = p0 * p1 * explicit_tail_remainder(support_cap, params.sigma);
  return pmf;
}

double gaussian_interval_mass(double lo, double hi, double mu, double sigma) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  const double z1 = (lo - mu) / sigma * kInvSqrt2;
  const double z2 = (hi - mu) / sigma * kInvSqrt2;
  // Same-tail intervals go through erfc to keep relative precision.
  if (z1 >= 0.0) return 0.5 * (std::erfc(z1) - std::erfc(z2));
  if (z2 <= 0.0) return 0.5 * (std::erfc(-z2) - std::erfc(-z1));
  return 0.5 * (std::erf(z2) - std::erf(z1));
}

double laplace_interval_mass(double lo, double hi, double mu, double sigma) {
  const double u1 = (lo - mu) / sigma;
  const double u2 = (hi - mu) / sigma;
  if (u1 >= 0.0) return -0.5 * std::exp(-u1) * std::expm1(-(u2 - u1));
  if (u2 <= 0.0) return -0.5 * std::exp(u2) * std::expm1(u1 - u2);
  return 1.0 - 0.5 * std::exp(-u2) - 0.5 * std::exp(u1);
}

namespace {

double interval_code_length(ModelKind kind, int32_t q, const ModelParams& params,
                            double step, double center) {
  validate_params(kind, params);
  if (!(step > 0.0)) throw UsageError("step must be positive");
  const double lo = center + (double(q) - 0.5) * step;
  const double hi = center + (double(q) + 0.5) * step;
  const double mass = kind == ModelKind::kGaussian
                          ? gaussian_interval_mass(lo, hi, params.mu, params.sigma)
                          : laplace_interval_mass(lo, hi, params.mu, params.sigma);
  return neg_log2(mass);
}

}  // namespace

double gaussian_code_length(int32_t q, const ModelParams& params, double step,
                            double center) {
  return interval_code_length(ModelKind::kGaussian, q, params, step, center);
}

double laplace_code_length(int32_t q, const ModelParams& params, double step,
                           double center) {
  return interval_code_length(ModelKind::kLaplace, q, params, step, center);
}

double model_code_length(ModelKind kind, int32_t q, const ModelParams& params,
                         double step) {
  switch (kind) {
    case ModelKind::kGaussian: return gaussian_code_length(q, params, step);
    case ModelKind::kLaplace: return laplace_code_length(q, params, step);
    case ModelKind::kBinary: return binary_code_length(q, params);
  }
  throw UsageError("unknown model kind");
}

DiscretePmf model_pmf(ModelKind kind, const ModelParams& params,
                      int support_cap, double step) {
  if (kind == ModelKind::kBinary) return binary_pmf(params, support_cap);
  if (support_cap < 1) throw UsageError("support cap must be >= 1");
  validate_params(kind, params);
  if (!(step > 0.0)) throw UsageError("step must be positive");

  DiscretePmf pmf;
  pmf.support_cap = support_cap;
  pmf.probs.assign(size_t(2 * support_cap + 1), 0.0);
  for (int k = -support_cap; k <= support_cap; ++k) {
    const double lo = (double(k) - 0.5) * step;
    const double hi = (double(k) + 0.5) * step;
    pmf.probs[size_t(k + support_cap)] =
        kind == ModelKind::kGaussian
            ? gaussian_interval_mass(lo, hi, params.mu, params.sigma)
            : laplace_interval_mass(lo, hi, params.mu, params.sigma);
  }
  const double edge = (double(support_cap) + 0.5) * step;
  if (kind == ModelKind::kGaussian) {
    constexpr double kInvSqrt2 = 0.7071067811865476;
    pmf.tail_mass = 0.5 * std::erfc((edge - params.mu) / params.sigma * kInvSqrt2) +
                    0.5 * std::erfc((edge + params.mu) / params.sigma * kInvSqrt2);
  } else {
    const double v = (edge - params.mu) / params.sigma;   // upper tail > edge
    const double u = (-edge - params.mu) / params.sigma;  // lower tail < -edge
    pmf.tail_mass = (v >= 0 ? 0.5 * std::exp(-v) : 1.0 - 0.5 * std::exp(v)) +
                    (u <= 0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u));
  }
  return pmf;
}

}  // namespace latc
