#include "latc/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "latc/models.hpp"
#include "latc/quantize.hpp"

namespace latc {

namespace {

void check_pair(const QuantizedTensor& q, const ParamSet& params) {
  if (q.values.size() != q.shape.elements()) {
    throw DataError("tensor value count does not match dims");
  }
  if (q.values.empty()) throw UsageError("empty tensor");
  params.validate(q.shape);
}

// Least-squares cubic through (x, y), solved by normal equations with
// partial pivoting. x is pre-normalized to order one.
std::array<double, 4> fit_cubic(const std::vector<double>& x,
                                const std::vector<double>& y) {
  double a[4][5] = {};
  for (size_t i = 0; i < x.size(); ++i) {
    double px[7] = {1, 0, 0, 0, 0, 0, 0};
    for (int p = 1; p < 7; ++p) px[p] = px[p - 1] * x[i];
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) a[r][c] += px[r + c];
      a[r][4] += px[r] * y[i];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw NumericError("degenerate rate-quality fit");
    }
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2],
          a[3][4] / a[3][3]};
}

void check_curve(const RdCurve& curve, const char* which) {
  if (curve.points.size() < 4) {
    throw UsageError(std::string(which) + " curve needs at least 4 points");
  }
  for (const RdPoint& p : curve.points) {
    if (!(p.rate_bpp > 0.0) || !std::isfinite(p.rate_bpp) ||
        !std::isfinite(p.quality)) {
      throw DataError(std::string(which) + " curve has an invalid point");
    }
  }
}

}  // namespace

QuantSpec quantizer_for(const ParamSet& params, double step) {
  QuantSpec spec;
  spec.step = step;
  if (params.kind == ModelKind::kBinary) {
    spec.center_granularity = params.granularity;
    spec.centers.clear();
    for (const ModelParams& r : params.records) spec.centers.push_back(r.mu);
  }
  return spec;
}

std::string RdCurve::to_csv() const {
  std::string out = "rate_bpp,quality\n";
  char line[80];
  for (const RdPoint& p : points) {
    std::snprintf(line, sizeof line, "%.10g,%.10g\n", p.rate_bpp, p.quality);
    out += line;
  }
  return out;
}

RdCurve RdCurve::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty RD curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rate_bpp,quality") throw DataError("bad RD curve header");

  RdCurve curve;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RdPoint p;
    char extra;
    if (std::sscanf(line.c_str(), "%lf,%lf %c", &p.rate_bpp, &p.quality,
                    &extra) != 2) {
      throw DataError("bad RD curve line: " + line);
    }
    curve.points.push_back(p);
  }
  if (curve.points.empty()) throw DataError("RD curve has no points");
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RdPoint& a, const RdPoint& b) {
              return a.rate_bpp < b.rate_bpp;
            });
  return curve;
}

RateEstimate estimate_rate(const QuantizedTensor& q, const ParamSet& params,
                           double step) {
  check_pair(q, params);
  RateEstimate est;
  for (size_t i = 0; i < q.values.size(); ++i) {
    est.total_bits += model_code_length(params.kind, q.values[i],
                                        params.at(q.shape, i), step);
  }
  est.per_element = est.total_bits / double(q.values.size());
  return est;
}

double empirical_entropy(const QuantizedTensor& q) {
  if (q.values.empty()) throw UsageError("empty tensor");
  std::map<int32_t, size_t> hist;
  for (int32_t v : q.values) ++hist[v];
  const double n = double(q.values.size());
  double bits = 0.0;
  for (const auto& [sym, cnt] : hist) {
    const double p = double(cnt) / n;
    bits -= p * std::log2(p);
  }
  return bits;
}

double empirical_cross_entropy(const QuantizedTensor& q, ModelKind kind,
                               const ModelParams& params, double step) {
  if (q.values.empty()) throw UsageError("empty tensor");
  double bits = 0.0;
  for (int32_t v : q.values) {
    bits += model_code_length(kind, v, params, step);
  }
  return bits / double(q.values.size());
}

double empirical_kl(const QuantizedTensor& q, ModelKind kind,
                    const ModelParams& params, double step) {
  return empirical_cross_entropy(q, kind, params, step) - empirical_entropy(q);
}

double psnr(double mse, double peak) {
  if (!(mse >= 0.0)) throw UsageError("mse must be nonnegative");
  if (!(peak > 0.0)) throw UsageError("peak must be positive");
  if (mse == 0.0) return kPsnrSentinel;
  return 10.0 * std::log10(peak * peak / mse);
}

RdCurve rd_sweep(const LatentTensor& y, const ParamSet& params,
                 const std::vector<double>& steps) {
  check_tensor(y);
  if (y.values.empty()) throw UsageError("empty tensor");
  if (steps.empty()) throw UsageError("no quantization steps");
  params.validate(y.shape);

  double peak = 0.0;
  for (float v : y.values) peak = std::max(peak, double(std::abs(v)));
  if (peak == 0.0) peak = 1.0;

  RdCurve curve;
  curve.label = model_kind_name(params.kind);
  for (double step : steps) {
    if (!(step > 0.0) || !std::isfinite(step)) {
      throw UsageError("quantization step must be positive");
    }
    const QuantSpec spec = quantizer_for(params, step);
    const QuantizedTensor q = quantize(y, spec);
    const LatentTensor recon = dequantize(q, spec);
    double mse = 0.0;
    for (size_t i = 0; i < y.values.size(); ++i) {
      const double d = double(recon.values[i]) - double(y.values[i]);
      mse += d * d;
    }
    mse /= double(y.values.size());
    RdPoint p;
    p.rate_bpp = estimate_rate(q, params, step).per_element;
    p.quality = psnr(mse, peak);
    curve.points.push_back(p);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RdPoint& a, const RdPoint& b) {
              return a.rate_bpp < b.rate_bpp;
            });
  return curve;
}

double bd_rate(const RdCurve& reference, const RdCurve& test) {
  check_curve(reference, "reference");
  check_curve(test, "test");

  const auto quality_span = [](const RdCurve& c) {
    double lo = c.points.front().quality, hi = lo;
    for (const RdPoint& p : c.points) {
      lo = std::min(lo, p.quality);
      hi = std::max(hi, p.quality);
    }
    return std::pair<double, double>(lo, hi);
  };
  const auto [rlo, rhi] = quality_span(reference);
  const auto [tlo, thi] = quality_span(test);
  const double lo = std::max(rlo, tlo);
  const double hi = std::min(rhi, thi);
  if (!(hi > lo)) throw DataError("quality ranges do not overlap");

  // Both fits share one normalized quality variable so that identical
  // curves cancel exactly.
  const auto log_fit = [&](const RdCurve& c) {
    std::vector<double> x, yv;
    for (const RdPoint& p : c.points) {
      x.push_back((p.quality - lo) / (hi - lo));
      yv.push_back(std::log2(p.rate_bpp));
    }
    return fit_cubic(x, yv);
  };
  const std::array<double, 4> ref = log_fit(reference);
  const std::array<double, 4> tst = log_fit(test);

  // Mean of the cubic difference over the common interval, which maps to
  // [0, 1] in the normalized variable.
  double avg = 0.0;
  for (int i = 0; i < 4; ++i) avg += (tst[i] - ref[i]) / double(i + 1);
  return (std::exp2(avg) - 1.0) * 100.0;
}

}  // namespace latc
