#include "latc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "latc/models.hpp"
#include "latc/relaxed.hpp"
#include "latc/rng.hpp"

namespace latc {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double squash_prob(double a) {
  return kProbEps + (1.0 - 2.0 * kProbEps) * sigmoid(a);
}

double log1mexp(double a) {
  return a <= kLn2 ? std::log(-std::expm1(-a)) : std::log1p(-std::exp(-a));
}

struct SampleStats {
  std::vector<double> sorted;
  std::vector<double> sum1, sum2;  // prefix sums of y and y^2
  double mean = 0.0;
  double stddev = 0.0;
};

SampleStats make_stats(const float* samples, size_t count) {
  SampleStats s;
  s.sorted.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!std::isfinite(samples[i])) throw DataError("non-finite sample value");
    s.sorted.push_back(double(samples[i]));
  }
  std::sort(s.sorted.begin(), s.sorted.end());
  s.sum1.assign(count + 1, 0.0);
  s.sum2.assign(count + 1, 0.0);
  for (size_t i = 0; i < count; ++i) {
    s.sum1[i + 1] = s.sum1[i] + s.sorted[i];
    s.sum2[i + 1] = s.sum2[i] + s.sorted[i] * s.sorted[i];
  }
  s.mean = s.sum1[count] / double(count);
  const double var =
      std::max(s.sum2[count] / double(count) - s.mean * s.mean, 0.0);
  s.stddev = std::sqrt(var);
  return s;
}

// First sample index at or above the lower edge of bin k (center + k - 1/2).
// Ties round half away from zero: a sample exactly on a positive edge
// belongs to bin k, on a nonpositive edge to bin k - 1.
size_t bin_start(const SampleStats& s, double center, long long k) {
  const double edge = center + (double(k) - 0.5);
  if (k >= 1) {
    return size_t(std::lower_bound(s.sorted.begin(), s.sorted.end(), edge) -
                  s.sorted.begin());
  }
  return size_t(std::upper_bound(s.sorted.begin(), s.sorted.end(), edge) -
                s.sorted.begin());
}

// Magnitude occupancy of the symbol histogram; fractional under the
// relaxed objective, integral under hard quantization.
struct MagnitudeCounts {
  double n = 0.0;
  double zero = 0.0;
  double one = 0.0;
  double big = 0.0;         // magnitudes >= 2
  double big_excess = 0.0;  // sum of (magnitude - 2) over those
};

struct BinaryObjective {
  double rate = 0.0;
  double d_p0 = 0.0;
  double d_p1 = 0.0;
  double d_sigma = 0.0;
};

// Mean code length in bits and its partials, from the occupancy alone:
// the flag terms depend on how many symbols are zero / one / larger, the
// explicit tail on the total excess magnitude.
BinaryObjective binary_rate_from_counts(const MagnitudeCounts& c, double p0,
                                        double p1, double sigma) {
  const double nz = c.n - c.zero;
  BinaryObjective o;
  double bits = -c.zero * std::log2(1.0 - p0) - nz * std::log2(p0) + nz;
  bits += -c.one * std::log2(1.0 - p1) - c.big * std::log2(p1);
  bits += (c.big_excess / sigma - c.big * log1mexp(1.0 / sigma)) / kLn2;
  o.rate = bits / c.n;
  o.d_p0 = (c.zero / (1.0 - p0) - nz / p0) / (c.n * kLn2);
  o.d_p1 = (c.one / (1.0 - p1) - c.big / p1) / (c.n * kLn2);
  o.d_sigma = -(c.big_excess - c.big / std::expm1(1.0 / sigma)) /
              (c.n * sigma * sigma * kLn2);
  return o;
}

void tally_magnitude(MagnitudeCounts& c, long long k, double weight) {
  const long long mag = std::llabs(k);
  if (mag == 0) {
    c.zero += weight;
  } else if (mag == 1) {
    c.one += weight;
  } else {
    c.big += weight;
    c.big_excess += weight * double(mag - 2);
  }
}

constexpr long long kMaxBins = 1 << 22;

// One sweep of the exact histogram under center mu: occupancy plus the
// reconstruction error and its center derivative.
struct HardSweep {
  MagnitudeCounts counts;
  double distortion = 0.0;  // sum of squared residuals
  double d_dist_dmu = 0.0;
};

HardSweep hard_sweep(const SampleStats& s, double mu) {
  const size_t n = s.sorted.size();
  const long long kmin = std::llround(s.sorted.front() - mu);
  const long long kmax = std::llround(s.sorted.back() - mu);
  if (kmax - kmin > kMaxBins) throw NumericError("sample range too wide to bin");

  HardSweep sweep;
  sweep.counts.n = double(n);
  size_t lo = 0;
  for (long long k = kmin; k <= kmax; ++k) {
    const size_t hi = k == kmax ? n : bin_start(s, mu, k + 1);
    if (hi > lo) {
      const double cnt = double(hi - lo);
      tally_magnitude(sweep.counts, k, cnt);
      const double sum = s.sum1[hi] - s.sum1[lo];
      const double sumsq = s.sum2[hi] - s.sum2[lo];
      const double recon = mu + double(k);
      sweep.distortion += sumsq - 2.0 * recon * sum + cnt * recon * recon;
      sweep.d_dist_dmu += 2.0 * (cnt * recon - sum);
    }
    lo = hi;
  }
  return sweep;
}

struct StepEval {
  double loss = 0.0;
  double distortion = 0.0;
  double rate = 0.0;
  std::vector<double> grad;
};

ModelParams theta_to_params(ModelKind kind, const std::vector<double>& th) {
  ModelParams p;
  p.mu = th[0];
  p.sigma = std::exp(th[1]);
  if (kind == ModelKind::kBinary) {
    p.p_g0 = squash_prob(th[2]);
    p.p_g1 = squash_prob(th[3]);
  }
  return p;
}

// dL/d(logit) = dL/dp * (1 - 2 eps) * sig * (1 - sig).
double chain_logit(double d_p, double a) {
  const double s = sigmoid(a);
  return d_p * (1.0 - 2.0 * kProbEps) * s * (1.0 - s);
}

StepEval eval_binary_hard(const SampleStats& s, const std::vector<double>& th,
                          double lambda) {
  const ModelParams p = theta_to_params(ModelKind::kBinary, th);
  const HardSweep sweep = hard_sweep(s, p.mu);
  const BinaryObjective o =
      binary_rate_from_counts(sweep.counts, p.p_g0, p.p_g1, p.sigma);
  const double n = sweep.counts.n;
  StepEval e;
  e.distortion = sweep.distortion / n;
  e.rate = o.rate;
  e.loss = e.distortion + lambda * e.rate;
  e.grad = {sweep.d_dist_dmu / n, lambda * o.d_sigma * p.sigma,
            chain_logit(lambda * o.d_p0, th[2]),
            chain_logit(lambda * o.d_p1, th[3])};
  return e;
}

StepEval eval_binary_noise(const SampleStats& s, const std::vector<double>& th,
                           double lambda, const CounterRng& noise, int step) {
  const ModelParams p = theta_to_params(ModelKind::kBinary, th);
  const size_t n = s.sorted.size();
  const HardSweep sweep = hard_sweep(s, p.mu);

  const double bound = std::max(std::abs(s.sorted.front() - p.mu),
                                std::abs(s.sorted.back() - p.mu)) +
                       1.0;
  if (bound > double(kMaxBins)) throw NumericError("sample range too wide to bin");
  const size_t table = size_t(bound) + 3;
  std::vector<double> len(table);
  for (size_t k = 0; k < table; ++k) {
    len[k] = binary_code_length(int32_t(k), p);
  }

  // The relaxed rate is a weight-blend of neighboring integer lengths, so
  // the sample pass only gathers blend weights; the parameter partials then
  // come from the occupancy reduction, exactly as in the hard path.
  std::vector<double> weight(table, 0.0);
  double d_y_sum = 0.0;
  const uint64_t base = uint64_t(step) * n;
  for (size_t i = 0; i < n; ++i) {
    const double u = noise.uniform_sym(base + i);
    const double yt = (s.sorted[i] - p.mu) + u;
    const double t = std::abs(yt);
    const size_t k = size_t(t);
    double w;
    double slope;
    if (t <= 0.5) {
      w = 1.0;
      slope = 0.0;
    } else if (t < 1.0) {
      w = 2.0 - 2.0 * t;
      slope = -2.0;
    } else {
      w = double(k) + 1.0 - t;
      slope = -1.0;
    }
    weight[k] += w;
    weight[k + 1] += 1.0 - w;
    const double sign = yt > 0.0 ? 1.0 : (yt < 0.0 ? -1.0 : 0.0);
    d_y_sum += sign * slope * (len[k] - len[k + 1]);
  }

  MagnitudeCounts counts;
  counts.n = double(n);
  double rate_bits = 0.0;
  for (size_t k = 0; k < table; ++k) {
    tally_magnitude(counts, (long long)(k), weight[k]);
    rate_bits += weight[k] * len[k];
  }
  const BinaryObjective o =
      binary_rate_from_counts(counts, p.p_g0, p.p_g1, p.sigma);

  StepEval e;
  e.distortion = sweep.distortion / double(n);
  e.rate = rate_bits / double(n);
  e.loss = e.distortion + lambda * e.rate;
  e.grad = {sweep.d_dist_dmu / double(n) - lambda * d_y_sum / double(n),
            lambda * o.d_sigma * p.sigma, chain_logit(lambda * o.d_p0, th[2]),
            chain_logit(lambda * o.d_p1, th[3])};
  return e;
}

struct FixedBin {
  long long k;
  double cnt;
};

std::vector<FixedBin> fixed_histogram(const SampleStats& s) {
  const size_t n = s.sorted.size();
  const long long kmin = std::llround(s.sorted.front());
  const long long kmax = std::llround(s.sorted.back());
  if (kmax - kmin > kMaxBins) throw NumericError("sample range too wide to bin");
  std::vector<FixedBin> bins;
  size_t lo = 0;
  for (long long k = kmin; k <= kmax; ++k) {
    const size_t hi = k == kmax ? n : bin_start(s, 0.0, k + 1);
    if (hi > lo) bins.push_back({k, double(hi - lo)});
    lo = hi;
  }
  return bins;
}

// Baselines quantize about zero, so their reconstruction error is a
// constant of the data.
double baseline_distortion(const SampleStats& s,
                           const std::vector<FixedBin>& bins) {
  double dist = 0.0;
  size_t lo = 0;
  for (const FixedBin& b : bins) {
    const size_t hi = lo + size_t(b.cnt);
    dist += s.sum2[hi] - s.sum2[lo] -
            2.0 * double(b.k) * (s.sum1[hi] - s.sum1[lo]) +
            b.cnt * double(b.k) * double(b.k);
    lo = hi;
  }
  return dist;
}

StepEval eval_baseline_hard(ModelKind kind, const SampleStats& s,
                            const std::vector<FixedBin>& bins,
                            const std::vector<double>& th, double lambda,
                            double dist_const) {
  const ModelParams p = theta_to_params(kind, th);
  const double n = double(s.sorted.size());
  StepEval e;
  e.grad = {0.0, 0.0};
  double rate = 0.0;
  for (const FixedBin& b : bins) {
    const double y = double(b.k);
    const LocScaleRateGrad g = kind == ModelKind::kGaussian
                                   ? relaxed_gaussian_rate_grad(y, p)
                                   : relaxed_laplace_rate_grad(y, p);
    rate += b.cnt * (kind == ModelKind::kGaussian
                         ? relaxed_gaussian_rate(y, p)
                         : relaxed_laplace_rate(y, p));
    e.grad[0] += b.cnt * g.d_mu;
    e.grad[1] += b.cnt * g.d_sigma;
  }
  e.distortion = dist_const / n;
  e.rate = rate / n;
  e.loss = e.distortion + lambda * e.rate;
  e.grad[0] = lambda * e.grad[0] / n;
  e.grad[1] = lambda * e.grad[1] / n * p.sigma;
  return e;
}

StepEval eval_baseline_noise(ModelKind kind, const SampleStats& s,
                             const std::vector<double>& th, double lambda,
                             double dist_const, const CounterRng& noise,
                             int step) {
  const ModelParams p = theta_to_params(kind, th);
  const size_t n = s.sorted.size();
  StepEval e;
  e.grad = {0.0, 0.0};
  double rate = 0.0;
  const uint64_t base = uint64_t(step) * n;
  for (size_t i = 0; i < n; ++i) {
    const double yt = s.sorted[i] + noise.uniform_sym(base + i);
    const LocScaleRateGrad g = kind == ModelKind::kGaussian
                                   ? relaxed_gaussian_rate_grad(yt, p)
                                   : relaxed_laplace_rate_grad(yt, p);
    rate += kind == ModelKind::kGaussian ? relaxed_gaussian_rate(yt, p)
                                         : relaxed_laplace_rate(yt, p);
    e.grad[0] += g.d_mu;
    e.grad[1] += g.d_sigma;
  }
  e.distortion = dist_const / double(n);
  e.rate = rate / double(n);
  e.loss = e.distortion + lambda * e.rate;
  e.grad[0] = lambda * e.grad[0] / double(n);
  e.grad[1] = lambda * e.grad[1] / double(n) * p.sigma;
  return e;
}

struct Adam {
  std::vector<double> m, v;
  int t = 0;

  explicit Adam(size_t k) : m(k, 0.0), v(k, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& g,
            double lr) {
    ++t;
    const double b1 = 0.9, b2 = 0.999;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
    }
  }
};

LossBreakdown hard_breakdown(ModelKind kind, const SampleStats& stats,
                             const ModelParams& params, double lambda) {
  const double n = double(stats.sorted.size());
  LossBreakdown b;
  if (kind == ModelKind::kBinary) {
    const HardSweep sweep = hard_sweep(stats, params.mu);
    const BinaryObjective o = binary_rate_from_counts(
        sweep.counts, clamp_probability(params.p_g0),
        clamp_probability(params.p_g1), params.sigma);
    b.distortion = sweep.distortion / n;
    b.rate_bits = o.rate;
  } else {
    const std::vector<FixedBin> bins = fixed_histogram(stats);
    b.distortion = baseline_distortion(stats, bins) / n;
    double bits = 0.0;
    for (const FixedBin& bin : bins) {
      bits += bin.cnt * relaxed_rate(kind, double(bin.k), params);
    }
    b.rate_bits = bits / n;
  }
  b.total = b.distortion + lambda * b.rate_bits;
  return b;
}

void check_config(const FitConfig& cfg) {
  if (cfg.steps < 1) throw UsageError("fit needs at least one step");
  if (!(cfg.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (cfg.lambda < 0.0) throw UsageError("lambda must be nonnegative");
  if (!(cfg.decay_factor > 0.0)) throw UsageError("decay factor must be positive");
}

}  // namespace

const char* source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::kGaussian: return "gaussian";
    case SourceKind::kLaplace: return "laplace";
    case SourceKind::kSpikeMixture: return "spike";
  }
  throw UsageError("unknown source kind");
}

SourceKind source_kind_from_name(const std::string& name) {
  if (name == "gaussian") return SourceKind::kGaussian;
  if (name == "laplace") return SourceKind::kLaplace;
  if (name == "spike" || name == "spike-mixture") return SourceKind::kSpikeMixture;
  throw UsageError("unknown source kind: " + name);
}

LatentTensor generate_synthetic(const SourceSpec& spec, const Shape& shape,
                                uint64_t seed) {
  if (shape.elements() == 0) throw UsageError("empty tensor shape");
  if (!(spec.sigma > 0.0)) throw UsageError("source sigma must be positive");
  if (!(spec.spike_sigma > 0.0)) throw UsageError("spike sigma must be positive");
  if (!(spec.spike_weight >= 0.0 && spec.spike_weight <= 1.0)) {
    throw UsageError("spike weight outside [0, 1]");
  }
  if (!(spec.sigma_growth > 0.0)) throw UsageError("sigma growth must be positive");

  const CounterRng rng(seed);
  const CounterRng pick = rng.split(1);
  const CounterRng gauss = rng.split(2);
  const CounterRng lap = rng.split(3);

  LatentTensor out(shape);
  const size_t per_channel = shape.per_channel();
  for (size_t i = 0; i < out.size(); ++i) {
    const double scale =
        spec.sigma * std::pow(spec.sigma_growth, double(i / per_channel));
    double v;
    switch (spec.kind) {
      case SourceKind::kGaussian:
        v = spec.mu + scale * gauss.gaussian(i);
        break;
      case SourceKind::kLaplace:
        v = spec.mu + lap.laplace(i, scale);
        break;
      case SourceKind::kSpikeMixture:
      default:
        v = pick.uniform_open(i) < spec.spike_weight
                ? spec.mu + spec.spike_sigma * gauss.gaussian(i)
                : spec.mu + lap.laplace(i, scale);
        break;
    }
    out.values[i] = float(v);
  }
  return out;
}

LossBreakdown loss(const LatentTensor& samples, ModelKind kind,
                   const ModelParams& params, double lambda, bool noise_mode,
                   uint64_t seed) {
  check_tensor(samples);
  validate_params(kind, params);
  if (samples.size() == 0) throw UsageError("no samples");
  if (lambda < 0.0) throw UsageError("lambda must be nonnegative");
  const SampleStats stats = make_stats(samples.values.data(), samples.size());

  LossBreakdown out = hard_breakdown(kind, stats, params, lambda);
  if (noise_mode) {
    const CounterRng noise = CounterRng(seed).split(0);
    double bits = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const double u = noise.uniform_sym(i);
      const double y = double(samples.values[i]);
      bits += kind == ModelKind::kBinary
                  ? relaxed_binary_rate((y - params.mu) + u, params)
                  : relaxed_rate(kind, y + u, params);
    }
    out.rate_bits = bits / double(samples.size());
    out.total = out.distortion + lambda * out.rate_bits;
  }
  return out;
}

FitResult fit_group(ModelKind kind, const float* samples, size_t count,
                    const FitConfig& cfg) {
  check_config(cfg);
  if (count < 100) throw UsageError("need at least 100 samples per fit group");

  const SampleStats stats = make_stats(samples, count);
  std::vector<double> theta;
  const double sigma0 = std::max(stats.stddev, 1e-3);
  if (kind == ModelKind::kBinary) {
    theta = {stats.mean, std::log(sigma0), 0.0, 0.0};
  } else {
    theta = {stats.mean, std::log(sigma0)};
  }

  std::vector<FixedBin> bins;
  double dist_const = 0.0;
  if (kind != ModelKind::kBinary) {
    bins = fixed_histogram(stats);
    dist_const = baseline_distortion(stats, bins);
  }

  std::vector<int> milestones = cfg.decay_milestones;
  std::sort(milestones.begin(), milestones.end());
  const CounterRng noise = CounterRng(cfg.seed).split(0);

  Adam adam(theta.size());
  FitResult result;
  for (int step = 0; step < cfg.steps; ++step) {
    StepEval e;
    if (kind == ModelKind::kBinary) {
      e = cfg.noise_mode
              ? eval_binary_noise(stats, theta, cfg.lambda, noise, step)
              : eval_binary_hard(stats, theta, cfg.lambda);
    } else {
      e = cfg.noise_mode
              ? eval_baseline_noise(kind, stats, theta, cfg.lambda, dist_const,
                                    noise, step)
              : eval_baseline_hard(kind, stats, bins, theta, cfg.lambda,
                                   dist_const);
    }
    bool finite = std::isfinite(e.loss);
    for (double g : e.grad) finite = finite && std::isfinite(g);
    if (!finite) {
      throw NumericError("fit diverged at step " + std::to_string(step));
    }
    if (cfg.trace_every > 0 && step % cfg.trace_every == 0) {
      result.trace.push_back({step, e.distortion, e.rate, e.loss});
    }

    double lr = cfg.learning_rate;
    for (int ms : milestones) {
      if (step >= ms) lr *= cfg.decay_factor;
    }
    adam.step(theta, e.grad, lr);
    ++result.steps_run;
  }

  result.params = theta_to_params(kind, theta);
  const LossBreakdown last =
      hard_breakdown(kind, stats, result.params, cfg.lambda);
  result.final_loss = last.total;
  if (cfg.trace_every > 0) {
    result.trace.push_back(
        {cfg.steps, last.distortion, last.rate_bits, last.total});
  }
  return result;
}

ParamSet fit_params(ModelKind kind, const LatentTensor& latents,
                    Granularity granularity, const FitConfig& cfg) {
  check_tensor(latents);
  ParamSet set;
  set.kind = kind;
  set.granularity = granularity;
  switch (granularity) {
    case Granularity::kPerTensor:
      set.records.push_back(
          fit_group(kind, latents.values.data(), latents.size(), cfg).params);
      break;
    case Granularity::kPerChannel: {
      const size_t stride = latents.shape.per_channel();
      for (uint32_t c = 0; c < latents.shape.channels; ++c) {
        set.records.push_back(
            fit_group(kind, latents.values.data() + size_t(c) * stride, stride,
                      cfg)
                .params);
      }
      break;
    }
    case Granularity::kPerElement:
      throw UsageError("per-element fitting needs multiple samples per element");
  }
  set.validate(latents.shape);
  return set;
}

double fit_objective(ModelKind kind, const float* samples, size_t count,
                     const ModelParams& params, double lambda) {
  if (count == 0) throw UsageError("no samples");
  validate_params(kind, params);
  const SampleStats stats = make_stats(samples, count);
  return hard_breakdown(kind, stats, params, lambda).total;
}

ModelParams closed_form_binary_flags(const std::vector<int32_t>& q,
                                     double sigma) {
  if (q.empty()) throw UsageError("no samples");
  size_t nonzero = 0;
  size_t big = 0;
  for (int32_t v : q) {
    if (v != 0) ++nonzero;
    if (v >= 2 || v <= -2) ++big;
  }
  ModelParams p;
  p.mu = 0.0;
  p.sigma = sigma;
  p.p_g0 = std::clamp(double(nonzero) / double(q.size()), kProbEps,
                      1.0 - kProbEps);
  p.p_g1 = std::clamp(nonzero ? double(big) / double(nonzero) : 0.0, kProbEps,
                      1.0 - kProbEps);
  return p;
}

}  // namespace latc
