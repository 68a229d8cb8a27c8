#include "latc/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latc/codec.hpp"
#include "latc/common.hpp"
#include "latc/eval.hpp"
#include "latc/fit.hpp"
#include "latc/models.hpp"
#include "latc/quantize.hpp"
#include "latc/relaxed.hpp"
#include "latc/rng.hpp"
#include "latc/tensor_io.hpp"
#include "latc/wire.hpp"

namespace latc {
namespace {

std::string read_text_file(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
  std::string out;
  std::string source = "gaussian";
  uint32_t channels = 4;
  uint32_t height = 64;
  uint32_t width = 64;
  double mu = 0.0;
  double sigma = 1.0;
  double spike_weight = 0.8;
  double spike_sigma = 0.05;
  double sigma_growth = 1.0;
  uint64_t seed = 1;
};

void run_gen(const GenOpts& o) {
  SourceSpec spec;
  spec.kind = source_kind_from_name(o.source);
  spec.mu = o.mu;
  spec.sigma = o.sigma;
  spec.spike_weight = o.spike_weight;
  spec.spike_sigma = o.spike_sigma;
  spec.sigma_growth = o.sigma_growth;
  const Shape shape{o.channels, o.height, o.width};
  const LatentTensor t = generate_synthetic(spec, shape, o.seed);
  write_tensor(t, o.out);
  std::printf("seed: %" PRIu64 "\n", o.seed);
  std::printf("wrote %s: %s source, %ux%ux%u (%zu elements)\n", o.out.c_str(),
              source_kind_name(spec.kind), shape.channels, shape.height,
              shape.width, shape.elements());
}

// ---------------------------------------------------------------- fit ----

struct FitOpts {
  std::string in;
  std::string out;
  std::string trace_path;
  std::string model;
  std::string granularity = "per-tensor";
  double lambda = 1.0;
  int steps = 2000;
  double learning_rate = 1e-4;
  std::vector<int> decay_milestones;
  double decay_factor = 0.1;
  bool noise = false;
  uint64_t seed = 1;
  int trace_every = 10;
};

void print_record(size_t index, ModelKind kind, const ModelParams& p) {
  if (kind == ModelKind::kBinary)
    std::printf("group %zu: mu=%.6g sigma=%.6g p_g0=%.6g p_g1=%.6g\n", index,
                p.mu, p.sigma, p.p_g0, p.p_g1);
  else
    std::printf("group %zu: mu=%.6g sigma=%.6g\n", index, p.mu, p.sigma);
}

void run_fit(const FitOpts& o) {
  const LatentTensor t = read_tensor(o.in);
  const ModelKind kind = model_kind_from_name(o.model);
  const Granularity granularity = granularity_from_name(o.granularity);

  FitConfig cfg;
  cfg.lambda = o.lambda;
  cfg.steps = o.steps;
  cfg.learning_rate = o.learning_rate;
  cfg.decay_milestones = o.decay_milestones;
  cfg.decay_factor = o.decay_factor;
  cfg.seed = o.seed;
  cfg.noise_mode = o.noise;
  cfg.trace_every = o.trace_path.empty() ? 0 : o.trace_every;

  ParamSet set;
  set.kind = kind;
  set.granularity = granularity;

  std::string trace_csv = "step,distortion,rate,total\n";
  double loss_sum = 0.0;
  const auto run_one = [&](const float* samples, size_t count) {
    const FitResult r = fit_group(kind, samples, count, cfg);
    set.records.push_back(r.params);
    loss_sum += r.final_loss;
    for (const FitTracePoint& pt : r.trace) {
      char line[128];
      std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g\n", pt.step,
                    pt.distortion, pt.rate_bits, pt.total);
      trace_csv += line;
    }
  };

  if (granularity == Granularity::kPerTensor) {
    run_one(t.values.data(), t.values.size());
  } else if (granularity == Granularity::kPerChannel) {
    const size_t per = t.shape.per_channel();
    for (uint32_t c = 0; c < t.shape.channels; ++c)
      run_one(t.values.data() + size_t(c) * per, per);
  } else {
    throw UsageError("per-element fitting needs more than one sample per group");
  }

  write_params(set, o.out);
  if (!o.trace_path.empty()) write_text_file(o.trace_path, trace_csv);

  std::printf("seed: %" PRIu64 "\n", o.seed);
  std::printf("fit %s %s over %s: %zu group(s), %d step(s)%s\n",
              model_kind_name(kind), granularity_name(granularity),
              o.in.c_str(), set.records.size(), o.steps,
              o.noise ? ", noise relaxation" : "");
  for (size_t i = 0; i < set.records.size(); ++i)
    print_record(i, kind, set.records[i]);
  std::printf("mean final loss: %.6f\n", loss_sum / double(set.records.size()));
  std::printf("wrote %s\n", o.out.c_str());
  if (!o.trace_path.empty()) std::printf("wrote %s\n", o.trace_path.c_str());
}

// ------------------------------------------------------------- encode ----

struct EncodeOpts {
  std::string in;
  std::string params;
  std::string out;
  double step = 1.0;
  int support_cap = kDefaultSupportCap;
};

void run_encode(const EncodeOpts& o) {
  const LatentTensor y = read_tensor(o.in);
  const ParamSet params = read_params(o.params);
  params.validate(y.shape);
  const QuantizedTensor q = quantize(y, quantizer_for(params, o.step));
  const EncodedTensor enc = encode_tensor(q, params, o.step, o.support_cap);
  write_encoded(enc, o.out);

  const RateEstimate est = estimate_rate(q, params, o.step);
  const double n = double(y.shape.elements());
  std::printf("payload: %zu bytes, %.3f bits/element\n", enc.payload.size(),
              8.0 * double(enc.payload.size()) / n);
  std::printf("estimate: %.3f bits/element\n", est.per_element);
  std::printf("wrote %s\n", o.out.c_str());
}

// ------------------------------------------------------------- decode ----

struct DecodeOpts {
  std::string in;
  std::string out;
  int support_cap = kDefaultSupportCap;
};

void run_decode(const DecodeOpts& o) {
  const EncodedTensor enc = read_encoded(o.in);
  const QuantizedTensor q = decode_tensor(enc, o.support_cap);
  const LatentTensor recon = dequantize(q, quantizer_for(enc.params, enc.step));
  write_tensor(recon, o.out);
  std::printf("decoded %s: %s model, %ux%ux%u, step %.6g\n", o.in.c_str(),
              model_kind_name(enc.params.kind), enc.shape.channels,
              enc.shape.height, enc.shape.width, enc.step);
  std::printf("wrote %s\n", o.out.c_str());
}

// --------------------------------------------------------------- rate ----

struct RateOpts {
  std::string in;
  std::string params;
  double step = 1.0;
};

void run_rate(const RateOpts& o) {
  const LatentTensor y = read_tensor(o.in);
  const ParamSet params = read_params(o.params);
  params.validate(y.shape);
  const QuantizedTensor q = quantize(y, quantizer_for(params, o.step));
  const RateEstimate est = estimate_rate(q, params, o.step);
  std::printf("total: %.1f bits over %zu elements\n", est.total_bits,
              y.shape.elements());
  std::printf("rate: %.3f bits/element\n", est.per_element);
  if (params.granularity == Granularity::kPerTensor) {
    const double h = empirical_entropy(q);
    const double ce =
        empirical_cross_entropy(q, params.kind, params.records[0], o.step);
    std::printf("empirical entropy: %.3f bits/element\n", h);
    std::printf("cross-entropy: %.3f bits/element\n", ce);
    std::printf("divergence: %.3f bits/element\n", ce - h);
  }
}

// -------------------------------------------------------------- sweep ----

struct SweepOpts {
  std::string in;
  std::string params;
  std::string out;
  std::vector<double> steps = {0.8, 0.9, 1.0, 1.1, 1.25};
  std::string label;
};

void run_sweep(const SweepOpts& o) {
  const LatentTensor y = read_tensor(o.in);
  const ParamSet params = read_params(o.params);
  params.validate(y.shape);
  RdCurve curve = rd_sweep(y, params, o.steps);
  curve.label = o.label.empty() ? o.in : o.label;
  write_text_file(o.out, curve.to_csv());
  for (const RdPoint& p : curve.points)
    std::printf("rate %.4f bits/element, quality %.2f dB\n", p.rate_bpp,
                p.quality);
  std::printf("wrote %s (%zu points)\n", o.out.c_str(), curve.points.size());
}

// ------------------------------------------------------------- bdrate ----

struct BdOpts {
  std::string reference;
  std::string test;
};

void run_bdrate(const BdOpts& o) {
  RdCurve ref = RdCurve::from_csv(read_text_file(o.reference));
  RdCurve tst = RdCurve::from_csv(read_text_file(o.test));
  ref.label = o.reference;
  tst.label = o.test;
  const double v = bd_rate(ref, tst) + 0.0;
  std::printf("bd-rate: %.4f%%\n", v);
}

// ----------------------------------------------------------- gradcheck ----

struct GradOpts {
  uint64_t seed = 1;
  int points = 1000;
  double h = 1e-5;
  double tolerance = 1e-5;
};

double span(const CounterRng& rng, uint64_t i, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform_open(i);
}

double log_span(const CounterRng& rng, uint64_t i, double lo, double hi) {
  return std::exp(span(rng, i, std::log(lo), std::log(hi)));
}

void run_gradcheck(const GradOpts& o) {
  if (o.points <= 0) throw UsageError("gradcheck needs a positive point count");
  const CounterRng rng(o.seed);
  std::printf("seed: %" PRIu64 "\n", o.seed);

  const ModelKind kinds[] = {ModelKind::kGaussian, ModelKind::kLaplace,
                             ModelKind::kBinary};
  double worst = 0.0;
  for (const ModelKind kind : kinds) {
    const CounterRng stream = rng.split(uint64_t(kind) + 1);
    double max_err = 0.0;
    int accepted = 0;
    uint64_t i = 0;
    const uint64_t budget = uint64_t(o.points) * 64;
    while (accepted < o.points && i < budget) {
      const uint64_t base = 8 * i++;
      ModelParams p;
      double y;
      if (kind == ModelKind::kBinary) {
        y = span(stream, base, -8.0, 8.0);
        p.sigma = log_span(stream, base + 1, 0.3, 3.0);
        p.p_g0 = span(stream, base + 2, 0.05, 0.95);
        p.p_g1 = span(stream, base + 3, 0.05, 0.95);
      } else {
        y = span(stream, base, -6.0, 6.0);
        p.mu = span(stream, base + 1, -2.0, 2.0);
        p.sigma = log_span(stream, base + 2, 0.3, 3.0);
      }
      try {
        const FdCheckReport report = finite_difference_check(kind, y, p, o.h);
        max_err = std::max(max_err, report.max_rel_error);
        ++accepted;
      } catch (const NumericError&) {
        // Kink-adjacent draw; resample.
      }
    }
    if (accepted < o.points)
      throw NumericError("could not sample enough smooth points");
    std::printf("%s: max relative error %.3g over %d points\n",
                model_kind_name(kind), max_err, accepted);
    worst = std::max(worst, max_err);
  }

  if (worst >= o.tolerance) {
    std::printf("gradcheck failed: %.3g >= tolerance %.3g\n", worst,
                o.tolerance);
    throw NumericError("gradient check failed");
  }
  std::printf("gradcheck passed: max relative error %.3g < %.3g\n", worst,
              o.tolerance);
}

// ----------------------------------------------------------- selftest ----

struct SelftestOpts {
  uint64_t seed = 7;
};

void check(bool cond, const char* what) {
  std::printf("%s %s\n", cond ? "pass:" : "FAIL:", what);
  if (!cond) throw NumericError(std::string("selftest failed: ") + what);
}

ModelParams random_params(const CounterRng& rng, uint64_t base,
                          ModelKind kind) {
  ModelParams p;
  if (kind == ModelKind::kBinary) {
    p.sigma = log_span(rng, base, 0.3, 4.0);
    p.p_g0 = span(rng, base + 1, 0.02, 0.98);
    p.p_g1 = span(rng, base + 2, 0.02, 0.98);
  } else {
    p.mu = span(rng, base, -3.0, 3.0);
    p.sigma = log_span(rng, base + 1, 0.3, 4.0);
  }
  return p;
}

void run_selftest(const SelftestOpts& o) {
  const CounterRng rng(o.seed);
  std::printf("seed: %" PRIu64 "\n", o.seed);
  const ModelKind kinds[] = {ModelKind::kGaussian, ModelKind::kLaplace,
                             ModelKind::kBinary};

  {  // PMF cells sum to one.
    double worst = 0.0;
    const CounterRng s = rng.split(1);
    for (uint64_t i = 0; i < 100; ++i)
      for (const ModelKind kind : kinds) {
        const DiscretePmf pmf =
            model_pmf(kind, random_params(s, 8 * i, kind), 64);
        worst = std::max(worst, std::fabs(pmf.total() - 1.0));
      }
    check(worst < 1e-9, "probability masses normalize");
  }

  {  // Relaxed rate meets the exact code length at integers.
    double worst = 0.0;
    const CounterRng s = rng.split(2);
    for (uint64_t i = 0; i < 50; ++i)
      for (const ModelKind kind : kinds) {
        const ModelParams p = random_params(s, 8 * i, kind);
        for (int32_t k = -30; k <= 30; ++k) {
          const double exact = model_code_length(kind, k, p);
          const double relaxed = relaxed_rate(kind, double(k), p);
          worst = std::max(worst, std::fabs(exact - relaxed));
        }
      }
    check(worst < 1e-12, "relaxed rate is coherent at integers");
  }

  {  // Coder round trip over fuzzed tensors, escapes included.
    bool all = true;
    const CounterRng s = rng.split(3);
    for (uint64_t t = 0; t < 30 && all; ++t) {
      const Shape shape{1, 8, 25};
      QuantizedTensor q(shape);
      ParamSet set;
      set.kind = kinds[t % 3];
      set.granularity = Granularity::kPerTensor;
      set.records = {random_params(s, 8 * (t + 1000), set.kind)};
      const int cap = 8;
      for (size_t i = 0; i < q.values.size(); ++i) {
        const uint64_t r = s.bits(10000 + 64 * t + i);
        int32_t v = int32_t(r % 7) - 3;
        if (r % 97 == 0) v = int32_t(r % 4000) - 2000;
        q.values[i] = v;
      }
      const std::vector<uint8_t> payload =
          encode_payload(q, set, 1.0, cap);
      const QuantizedTensor back =
          decode_payload(payload.data(), payload.size(), shape, set, 1.0, cap);
      all = all && back.values == q.values;
    }
    check(all, "range coder round trips fuzzed tensors");
  }

  {  // Payload tracks the rate estimate.
    SourceSpec spec;
    spec.kind = SourceKind::kLaplace;
    spec.sigma = 1.5;
    const Shape shape{1, 100, 200};
    const LatentTensor y = generate_synthetic(spec, shape, o.seed);
    ParamSet set;
    set.kind = ModelKind::kLaplace;
    set.granularity = Granularity::kPerTensor;
    set.records = {ModelParams{0.0, 1.5, 0.5, 0.5}};
    const QuantizedTensor q = quantize(y, quantizer_for(set));
    const RateEstimate est = estimate_rate(q, set);
    const std::vector<uint8_t> payload = encode_payload(q, set);
    check(8.0 * double(payload.size()) <= 1.01 * est.total_bits + 8.0 * 512,
          "payload stays near the rate estimate");
  }

  {  // Gradients agree with central differences on a smooth sample.
    GradOpts g;
    g.seed = o.seed;
    g.points = 50;
    run_gradcheck(g);
    std::printf("pass: analytic gradients match central differences\n");
  }

  {  // End-to-end: generate, fit, encode, decode, reconstruct.
    SourceSpec spec;
    spec.kind = SourceKind::kSpikeMixture;
    spec.sigma = 1.0;
    const Shape shape{2, 40, 50};
    const LatentTensor y = generate_synthetic(spec, shape, o.seed + 1);
    FitConfig cfg;
    cfg.steps = 200;
    cfg.lambda = 4.0;
    cfg.seed = o.seed;
    const ParamSet set =
        fit_params(ModelKind::kBinary, y, Granularity::kPerTensor, cfg);
    const QuantSpec quant = quantizer_for(set);
    const QuantizedTensor q = quantize(y, quant);
    const EncodedTensor enc = encode_tensor(q, set);
    const std::vector<uint8_t> blob = serialize_encoded(enc);
    const EncodedTensor back = parse_encoded(blob.data(), blob.size());
    const QuantizedTensor dq = decode_tensor(back);
    const LatentTensor recon = dequantize(dq, quant);
    const LatentTensor direct = dequantize(q, quant);
    check(dq.values == q.values && recon.values == direct.values,
          "pipeline reproduces the quantized reconstruction");
  }

  std::printf("selftest passed\n");
}

// ----------------------------------------------------------------- app ----

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Latent-tensor compressor with binary and Gaussian/Laplace "
               "probability models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read option defaults from an INI file");
  app.set_version_flag("--version", "latc 1.0.0");

  GenOpts gen;
  CLI::App* sub = app.add_subcommand("gen", "Generate a synthetic latent tensor");
  sub->add_option("--out", gen.out, "Output tensor path")->required();
  sub->add_option("--source", gen.source,
                  "Source: gaussian, laplace, spike");
  sub->add_option("--channels", gen.channels, "Channel count");
  sub->add_option("--height", gen.height, "Rows per channel");
  sub->add_option("--width", gen.width, "Columns per row");
  sub->add_option("--mu", gen.mu, "Source location");
  sub->add_option("--sigma", gen.sigma, "Source scale");
  sub->add_option("--spike-weight", gen.spike_weight,
                  "Mixture mass of the near-zero component");
  sub->add_option("--spike-sigma", gen.spike_sigma,
                  "Scale of the near-zero component");
  sub->add_option("--sigma-growth", gen.sigma_growth,
                  "Per-channel scale growth factor");
  sub->add_option("--seed", gen.seed, "RNG seed");
  sub->callback([&gen] { run_gen(gen); });

  FitOpts fit;
  sub = app.add_subcommand("fit", "Fit model parameters to a latent tensor");
  sub->add_option("--in", fit.in, "Input tensor path")->required();
  sub->add_option("--out", fit.out, "Output parameter path")->required();
  sub->add_option("--model", fit.model, "Model: gaussian, laplace, binary")
      ->required();
  sub->add_option("--granularity", fit.granularity,
                  "Grouping: per-tensor or per-channel");
  sub->add_option("--lambda", fit.lambda, "Rate weight in the objective");
  sub->add_option("--steps", fit.steps, "Adam step count");
  sub->add_option("--lr", fit.learning_rate, "Adam learning rate");
  sub->add_option("--decay-at", fit.decay_milestones,
                  "Steps at which the learning rate decays");
  sub->add_option("--decay-factor", fit.decay_factor,
                  "Learning-rate decay multiplier");
  sub->add_flag("--noise", fit.noise,
                "Relax the rate term with additive uniform noise");
  sub->add_option("--seed", fit.seed, "RNG seed for the noise draws");
  sub->add_option("--trace", fit.trace_path, "Write a loss-trace CSV here");
  sub->add_option("--trace-every", fit.trace_every,
                  "Steps between trace records");
  sub->callback([&fit] { run_fit(fit); });

  EncodeOpts enc;
  sub = app.add_subcommand("encode", "Quantize and range-code a tensor");
  sub->add_option("--in", enc.in, "Input tensor path")->required();
  sub->add_option("--params", enc.params, "Parameter path")->required();
  sub->add_option("--out", enc.out, "Output bitstream path")->required();
  sub->add_option("--step", enc.step, "Quantizer step size");
  sub->add_option("--support-cap", enc.support_cap,
                  "Largest magnitude coded without escape");
  sub->callback([&enc] { run_encode(enc); });

  DecodeOpts dec;
  sub = app.add_subcommand("decode", "Decode a bitstream to a reconstruction");
  sub->add_option("--in", dec.in, "Input bitstream path")->required();
  sub->add_option("--out", dec.out, "Output tensor path")->required();
  sub->add_option("--support-cap", dec.support_cap,
                  "Largest magnitude coded without escape");
  sub->callback([&dec] { run_decode(dec); });

  RateOpts rate;
  sub = app.add_subcommand("rate", "Estimate the code length of a tensor");
  sub->add_option("--in", rate.in, "Input tensor path")->required();
  sub->add_option("--params", rate.params, "Parameter path")->required();
  sub->add_option("--step", rate.step, "Quantizer step size");
  sub->callback([&rate] { run_rate(rate); });

  SweepOpts sweep;
  sub = app.add_subcommand("sweep", "Rate-quality sweep over quantizer steps");
  sub->add_option("--in", sweep.in, "Input tensor path")->required();
  sub->add_option("--params", sweep.params, "Parameter path")->required();
  sub->add_option("--out", sweep.out, "Output curve CSV path")->required();
  sub->add_option("--steps", sweep.steps, "Quantizer steps to sweep")
      ->expected(-1);
  sub->add_option("--label", sweep.label, "Curve label");
  sub->callback([&sweep] { run_sweep(sweep); });

  BdOpts bd;
  sub = app.add_subcommand("bdrate",
                           "Average rate difference between two curves");
  sub->add_option("--reference", bd.reference, "Reference curve CSV")
      ->required();
  sub->add_option("--test", bd.test, "Test curve CSV")->required();
  sub->callback([&bd] { run_bdrate(bd); });

  GradOpts grad;
  sub = app.add_subcommand("gradcheck",
                           "Check analytic gradients against differences");
  sub->add_option("--seed", grad.seed, "RNG seed");
  sub->add_option("--points", grad.points, "Smooth points per model");
  sub->add_option("--fd-step", grad.h, "Central-difference step");
  sub->add_option("--tolerance", grad.tolerance,
                  "Largest acceptable relative error");
  sub->callback([&grad] { run_gradcheck(grad); });

  SelftestOpts self;
  sub = app.add_subcommand("selftest", "Run the built-in invariant checks");
  sub->add_option("--seed", self.seed, "RNG seed");
  sub->callback([&self] { run_selftest(self); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace latc
