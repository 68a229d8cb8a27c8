#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "latc/models.hpp"
#include "latc/relaxed.hpp"
#include "latc/rng.hpp"

using namespace latc;

namespace {

ModelParams binary_params(double sigma, double p0, double p1) {
  ModelParams p;
  p.sigma = sigma;
  p.p_g0 = p0;
  p.p_g1 = p1;
  return p;
}

ModelParams loc_scale(double mu, double sigma) {
  ModelParams p;
  p.mu = mu;
  p.sigma = sigma;
  return p;
}

ModelParams random_params(const CounterRng& rng, uint64_t base,
                          ModelKind kind) {
  ModelParams p;
  if (kind == ModelKind::kBinary) {
    p.sigma = std::exp(1.5 * rng.uniform_sym(base));
    p.p_g0 = 0.02 + 0.96 * rng.uniform_open(base + 1);
    p.p_g1 = 0.02 + 0.96 * rng.uniform_open(base + 2);
  } else {
    p.mu = 4.0 * rng.uniform_sym(base);
    p.sigma = std::exp(1.5 * rng.uniform_sym(base + 1));
  }
  return p;
}

}  // namespace

TEST_CASE("interpolation weight follows the piecewise schedule") {
  CHECK(gamma_weight(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_weight(0.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_weight(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_weight(0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_weight(1.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(gamma_weight(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_weight(2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_weight(3.6) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("relaxed binary rate interpolates the discrete lengths") {
  const ModelParams p = binary_params(1.0, 0.5, 0.5);
  CHECK(relaxed_binary_rate(0.25, p) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(relaxed_binary_rate(0.75, p) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(relaxed_binary_rate(-0.75, p) == doctest::Approx(2.0).epsilon(1e-14));
  // Halfway between |k|=1 and |k|=2 the weight is one half.
  const double mid = 0.5 * (binary_code_length(1, p) + binary_code_length(2, p));
  CHECK(relaxed_binary_rate(1.5, p) == doctest::Approx(mid).epsilon(1e-14));
}

TEST_CASE("relaxed rates agree with exact code lengths at integers") {
  const CounterRng rng(21);
  const ModelKind kinds[] = {ModelKind::kGaussian, ModelKind::kLaplace,
                             ModelKind::kBinary};
  for (uint64_t i = 0; i < 300; ++i)
    for (const ModelKind kind : kinds) {
      const ModelParams p = random_params(rng, 8 * i, kind);
      for (int32_t k = -50; k <= 50; ++k) {
        const double exact = model_code_length(kind, k, p);
        const double relaxed = relaxed_rate(kind, double(k), p);
        CHECK(std::fabs(exact - relaxed) < 1e-12);
      }
    }
}

TEST_CASE("relaxed binary rate is continuous across its kinks") {
  const ModelParams p = binary_params(0.7, 0.35, 0.65);
  for (const double kink : {0.5, 1.0, 1.5, 2.0, 3.0, -0.5, -1.0, -2.5}) {
    const double lo = relaxed_binary_rate(kink - 1e-9, p);
    const double hi = relaxed_binary_rate(kink + 1e-9, p);
    CHECK(std::fabs(hi - lo) < 1e-7);
  }
}

TEST_CASE("relaxed binary rate is linear between kinks and symmetric") {
  const ModelParams p = binary_params(1.3, 0.42, 0.58);
  for (const double a : {0.55, 1.1, 2.2, 3.4}) {
    const double b = a + 0.2;
    const double mid = relaxed_binary_rate((a + b) / 2, p);
    const double avg =
        0.5 * (relaxed_binary_rate(a, p) + relaxed_binary_rate(b, p));
    CHECK(mid == doctest::Approx(avg).epsilon(1e-12));
  }
  for (double x = -4.0; x <= 4.0; x += 0.19)
    CHECK(relaxed_binary_rate(x, p) ==
          doctest::Approx(relaxed_binary_rate(-x, p)).epsilon(1e-13));
}

TEST_CASE("one-sided slopes at kinks take the right-hand segment") {
  const ModelParams p = binary_params(1.0, 0.3, 0.6);
  const double l0 = binary_code_length(0, p);
  const double l1 = binary_code_length(1, p);
  const double l2 = binary_code_length(2, p);

  CHECK(relaxed_binary_rate_grad(0.5, p).d_y ==
        doctest::Approx(2.0 * (l1 - l0)).epsilon(1e-12));
  CHECK(relaxed_binary_rate_grad(1.0, p).d_y ==
        doctest::Approx(l2 - l1).epsilon(1e-12));
  CHECK(relaxed_binary_rate_grad(-0.5, p).d_y == doctest::Approx(0.0));
  CHECK(relaxed_binary_rate_grad(-1.0, p).d_y ==
        doctest::Approx(2.0 * (l0 - l1)).epsilon(1e-12));
  CHECK(relaxed_binary_rate_grad(-2.0, p).d_y ==
        doctest::Approx(l1 - l2).epsilon(1e-12));
  CHECK(relaxed_binary_rate_grad(0.2, p).d_y == doctest::Approx(0.0));
}

TEST_CASE("flag probability gradient matches a central difference") {
  const double h = 1e-6;
  const auto numeric_dp0 = [&](const ModelParams& p) {
    ModelParams hi = p, lo = p;
    hi.p_g0 += h;
    lo.p_g0 -= h;
    return (relaxed_binary_rate(0.75, hi) - relaxed_binary_rate(0.75, lo)) /
           (2 * h);
  };

  // p_g0 = 1/2 sits at the symmetric point where the derivative vanishes.
  const ModelParams sym = binary_params(1.0, 0.5, 0.5);
  CHECK(std::fabs(relaxed_binary_rate_grad(0.75, sym).d_pg0) < 1e-12);
  CHECK(std::fabs(relaxed_binary_rate_grad(0.75, sym).d_pg0 -
                  numeric_dp0(sym)) < 1e-9);

  const ModelParams skew = binary_params(1.0, 0.3, 0.5);
  const double analytic = relaxed_binary_rate_grad(0.75, skew).d_pg0;
  const double numeric = numeric_dp0(skew);
  CHECK(std::fabs(analytic - numeric) / std::fabs(numeric) < 1e-6);
}

TEST_CASE("analytic gradients pass a randomized difference check") {
  const CounterRng rng(31);
  const ModelKind kinds[] = {ModelKind::kGaussian, ModelKind::kLaplace,
                             ModelKind::kBinary};
  for (const ModelKind kind : kinds) {
    const CounterRng stream = rng.split(uint64_t(kind));
    int accepted = 0;
    uint64_t i = 0;
    while (accepted < 100 && i < 5000) {
      const uint64_t base = 8 * i++;
      ModelParams p = random_params(stream, base, kind);
      if (kind == ModelKind::kBinary) {
        p.p_g0 = 0.05 + 0.9 * stream.uniform_open(base + 5);
        p.p_g1 = 0.05 + 0.9 * stream.uniform_open(base + 6);
      }
      const double y = 12.0 * stream.uniform_sym(base + 7);
      try {
        const FdCheckReport r = finite_difference_check(kind, y, p, 1e-5);
        CHECK(r.max_rel_error < 1e-5);
        ++accepted;
      } catch (const NumericError&) {
        // Too close to a kink; draw again.
      }
    }
    CHECK(accepted == 100);
  }
}

TEST_CASE("difference check rejects kinks and bad steps") {
  const ModelParams p = binary_params(1.0, 0.5, 0.5);
  CHECK_THROWS_AS(finite_difference_check(ModelKind::kBinary, 0.5, p, 1e-5),
                  NumericError);
  CHECK_THROWS_AS(
      finite_difference_check(ModelKind::kBinary, 0.5000001, p, 1e-5),
      NumericError);
  CHECK_THROWS_AS(finite_difference_check(ModelKind::kBinary, 0.25, p, 0.0),
                  UsageError);
  CHECK_THROWS_AS(finite_difference_check(ModelKind::kBinary, 0.25, p, -1e-5),
                  UsageError);
  const ModelParams lap = loc_scale(0.0, 1.0);
  CHECK_THROWS_AS(finite_difference_check(ModelKind::kLaplace, 0.5, lap, 1e-5),
                  NumericError);
  // Gaussian has no kinks; the same point is fine there.
  const FdCheckReport r =
      finite_difference_check(ModelKind::kGaussian, 0.5, lap, 1e-5);
  CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("kink predicate flags half-integers and nonzero integers") {
  CHECK(relaxed_binary_kink(0.5));
  CHECK(relaxed_binary_kink(-0.5));
  CHECK(relaxed_binary_kink(1.0));
  CHECK(relaxed_binary_kink(-3.0));
  CHECK_FALSE(relaxed_binary_kink(0.0));
  CHECK_FALSE(relaxed_binary_kink(0.25));
  CHECK_FALSE(relaxed_binary_kink(1.75));
  CHECK_FALSE(relaxed_binary_kink(2.5));
}
