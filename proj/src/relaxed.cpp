#include "latc/relaxed.hpp"

#include <algorithm>
#include <cmath>

#include "latc/common.hpp"
#include "latc/models.hpp"

namespace latc {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

double clamped(double p) {
  return std::min(std::max(p, kProbEps), 1.0 - kProbEps);
}

// Partials of the integer code length L(k) with respect to each parameter.
// Clamped probabilities make the length locally constant in that parameter.
double length_dp0(int k, double p0) {
  if (p0 <= kProbEps || p0 >= 1.0 - kProbEps) return 0.0;
  return k == 0 ? 1.0 / ((1.0 - p0) * kLn2) : -1.0 / (p0 * kLn2);
}

double length_dp1(int k, double p1) {
  if (k == 0) return 0.0;
  if (p1 <= kProbEps || p1 >= 1.0 - kProbEps) return 0.0;
  return k == 1 ? 1.0 / ((1.0 - p1) * kLn2) : -1.0 / (p1 * kLn2);
}

double length_dsigma(int k, double sigma) {
  if (k < 2) return 0.0;
  // d/dsigma of ((k-2)/sigma - ln(1 - e^(-1/sigma))) / ln 2.
  const double geo = 1.0 / std::expm1(1.0 / sigma);
  return -(double(k - 2) - geo) / (sigma * sigma * kLn2);
}

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005024);
}

double laplace_pdf(double x, double mu, double b) {
  return std::exp(-std::abs(x - mu) / b) / (2.0 * b);
}

double kink_distance(ModelKind kind, double y_tilde, const ModelParams& params) {
  if (kind == ModelKind::kGaussian) return 1e30;
  if (kind == ModelKind::kLaplace) {
    // The interval mass is C1 but loses curvature continuity where an
    // interval edge crosses the mode.
    return std::min(std::abs(y_tilde - (params.mu + 0.5)),
                    std::abs(y_tilde - (params.mu - 0.5)));
  }
  const double t = std::abs(y_tilde);
  double d = std::abs(t - 0.5);
  const double r = std::round(t);
  d = std::min(d, r >= 1.0 ? std::abs(t - r) : 1.0 - t);
  return d;
}

}  // namespace

double gamma_weight(double t) {
  if (!(t >= 0.0)) throw UsageError("gamma weight needs t >= 0");
  if (t <= 0.5) return 1.0;
  if (t < 1.0) return 2.0 - 2.0 * t;
  return std::floor(t) + 1.0 - t;
}

bool relaxed_binary_kink(double y_tilde) {
  const double t = std::abs(y_tilde);
  if (t == 0.5) return true;
  return t >= 1.0 && std::floor(t) == t;
}

double relaxed_binary_rate(double y_tilde, const ModelParams& params) {
  if (!std::isfinite(y_tilde)) throw NumericError("non-finite relaxed input");
  const double t = std::abs(y_tilde);
  if (t >= double(1 << 30)) throw NumericError("relaxed input out of range");
  const int32_t n = int32_t(std::floor(t));
  const double w = gamma_weight(t);
  const double len_n = binary_code_length(n, params);
  if (w == 1.0) return len_n;
  return w * len_n + (1.0 - w) * binary_code_length(n + 1, params);
}

BinaryRateGrad relaxed_binary_rate_grad(double y_tilde,
                                        const ModelParams& params) {
  validate_params(ModelKind::kBinary, params);
  if (!std::isfinite(y_tilde)) throw NumericError("non-finite relaxed input");
  const double t = std::abs(y_tilde);
  if (t >= double(1 << 30)) throw NumericError("relaxed input out of range");
  const int32_t n = int32_t(std::floor(t));
  const double w = gamma_weight(t);

  BinaryRateGrad g;
  g.at_kink = relaxed_binary_kink(y_tilde);

  const double p0 = clamped(params.p_g0);
  const double p1 = clamped(params.p_g1);
  g.d_sigma = w * length_dsigma(n, params.sigma) +
              (1.0 - w) * length_dsigma(n + 1, params.sigma);
  g.d_pg0 = w * length_dp0(n, p0) + (1.0 - w) * length_dp0(n + 1, p0);
  g.d_pg1 = w * length_dp1(n, p1) + (1.0 - w) * length_dp1(n + 1, p1);

  // Right one-sided derivative in y: pick the linear piece covering y+.
  // For y >= 0 that is the piece at t and above; for y < 0 the piece just
  // below t, since moving right shrinks |y|.
  auto len = [&](int32_t k) { return binary_code_length(k, params); };
  if (y_tilde >= 0.0) {
    if (t < 0.5) {
      g.d_y = 0.0;
    } else if (t < 1.0) {
      g.d_y = 2.0 * (len(1) - len(0));
    } else {
      g.d_y = len(n + 1) - len(n);
    }
  } else {
    if (t <= 0.5) {
      g.d_y = 0.0;
    } else if (t <= 1.0) {
      g.d_y = 2.0 * (len(0) - len(1));
    } else {
      const int32_t m = (std::floor(t) == t) ? n - 1 : n;
      g.d_y = len(m) - len(m + 1);
    }
  }
  return g;
}

double relaxed_gaussian_rate(double y_tilde, const ModelParams& params) {
  validate_params(ModelKind::kGaussian, params);
  if (!std::isfinite(y_tilde)) throw NumericError("non-finite relaxed input");
  const double mass = gaussian_interval_mass(y_tilde - 0.5, y_tilde + 0.5,
                                             params.mu, params.sigma);
  return -std::log2(std::max(mass, 1e-300));
}

double relaxed_laplace_rate(double y_tilde, const ModelParams& params) {
  validate_params(ModelKind::kLaplace, params);
  if (!std::isfinite(y_tilde)) throw NumericError("non-finite relaxed input");
  const double mass = laplace_interval_mass(y_tilde - 0.5, y_tilde + 0.5,
                                            params.mu, params.sigma);
  return -std::log2(std::max(mass, 1e-300));
}

double relaxed_rate(ModelKind kind, double y_tilde, const ModelParams& params) {
  switch (kind) {
    case ModelKind::kGaussian: return relaxed_gaussian_rate(y_tilde, params);
    case ModelKind::kLaplace: return relaxed_laplace_rate(y_tilde, params);
    case ModelKind::kBinary: return relaxed_binary_rate(y_tilde, params);
  }
  throw UsageError("unknown model kind");
}

LocScaleRateGrad relaxed_gaussian_rate_grad(double y_tilde,
                                            const ModelParams& params) {
  validate_params(ModelKind::kGaussian, params);
  const double mass = gaussian_interval_mass(y_tilde - 0.5, y_tilde + 0.5,
                                             params.mu, params.sigma);
  const double fp = gaussian_pdf(y_tilde + 0.5, params.mu, params.sigma);
  const double fm = gaussian_pdf(y_tilde - 0.5, params.mu, params.sigma);
  const double zp = (y_tilde + 0.5 - params.mu) / params.sigma;
  const double zm = (y_tilde - 0.5 - params.mu) / params.sigma;
  const double denom = std::max(mass, 1e-300) * kLn2;
  LocScaleRateGrad g;
  g.d_y = -(fp - fm) / denom;
  g.d_mu = -g.d_y;
  g.d_sigma = (zp * fp - zm * fm) / denom;
  return g;
}

LocScaleRateGrad relaxed_laplace_rate_grad(double y_tilde,
                                           const ModelParams& params) {
  validate_params(ModelKind::kLaplace, params);
  const double b = params.sigma;
  const double hi = y_tilde + 0.5;
  const double lo = y_tilde - 0.5;
  const double mass = laplace_interval_mass(lo, hi, params.mu, b);
  const double fp = laplace_pdf(hi, params.mu, b);
  const double fm = laplace_pdf(lo, params.mu, b);
  const double denom = std::max(mass, 1e-300) * kLn2;
  LocScaleRateGrad g;
  g.d_y = -(fp - fm) / denom;
  g.d_mu = -g.d_y;
  g.d_sigma = ((hi - params.mu) * fp - (lo - params.mu) * fm) / (b * denom);
  return g;
}

FdCheckReport finite_difference_check(ModelKind kind, double y_tilde,
                                      const ModelParams& params, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw UsageError("finite difference step must be positive");
  }
  validate_params(kind, params);
  if (kink_distance(kind, y_tilde, params) <= 10.0 * h) {
    throw NumericError("subgradient point: too close to a kink for h");
  }
  if (params.sigma <= 10.0 * h) {
    throw UsageError("finite difference step too large for sigma");
  }
  if (kind == ModelKind::kBinary &&
      (params.p_g0 <= 10.0 * h || params.p_g0 >= 1.0 - 10.0 * h ||
       params.p_g1 <= 10.0 * h || params.p_g1 >= 1.0 - 10.0 * h)) {
    throw UsageError("finite difference step too large for probabilities");
  }

  auto rate_at = [&](double y, const ModelParams& p) {
    return relaxed_rate(kind, y, p);
  };
  auto central = [&](auto&& bump) {
    ModelParams hi_p = params;
    ModelParams lo_p = params;
    double hi_y = y_tilde;
    double lo_y = y_tilde;
    bump(hi_p, hi_y, h);
    bump(lo_p, lo_y, -h);
    return (rate_at(hi_y, hi_p) - rate_at(lo_y, lo_p)) / (2.0 * h);
  };

  FdCheckReport report;
  auto add = [&](const char* name, double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    const double rel =
        denom < 1e-9 ? std::abs(analytic - numeric)
                     : std::abs(analytic - numeric) / denom;
    report.entries.push_back({name, analytic, numeric, rel});
    report.max_rel_error = std::max(report.max_rel_error, rel);
  };

  const double d_y_num =
      central([](ModelParams&, double& y, double dh) { y += dh; });
  const double d_sigma_num =
      central([](ModelParams& p, double&, double dh) { p.sigma += dh; });

  if (kind == ModelKind::kBinary) {
    BinaryRateGrad g = relaxed_binary_rate_grad(y_tilde, params);
    add("y", g.d_y, d_y_num);
    add("sigma", g.d_sigma, d_sigma_num);
    add("p_g0", g.d_pg0, central([](ModelParams& p, double&, double dh) {
          p.p_g0 += dh;
        }));
    add("p_g1", g.d_pg1, central([](ModelParams& p, double&, double dh) {
          p.p_g1 += dh;
        }));
  } else {
    LocScaleRateGrad g = kind == ModelKind::kGaussian
                             ? relaxed_gaussian_rate_grad(y_tilde, params)
                             : relaxed_laplace_rate_grad(y_tilde, params);
    add("y", g.d_y, d_y_num);
    add("mu", g.d_mu, central([](ModelParams& p, double&, double dh) {
          p.mu += dh;
        }));
    add("sigma", g.d_sigma, d_sigma_num);
  }
  return report;
}

}  // namespace latc
