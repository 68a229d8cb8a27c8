#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "latc/models.hpp"
#include "latc/params.hpp"
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

}  // namespace

TEST_CASE("flag code length is the binary self-information") {
  CHECK(flag_code_length(0.25, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(flag_code_length(0.25, 0) ==
        doctest::Approx(0.41503749927884382).epsilon(1e-12));
  CHECK(flag_code_length(0.5, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flag_code_length(0.5, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("explicit tail lengths match their closed form") {
  CHECK(explicit_code_length(2, 1.0) ==
        doctest::Approx(0.661728357628967344).epsilon(1e-14));
  CHECK(explicit_code_length(3, 1.0) ==
        doctest::Approx(2.10442339851793075).epsilon(1e-14));
  CHECK(explicit_code_length(2, 0.5) ==
        doctest::Approx(0.20978727454591917).epsilon(1e-14));
  CHECK(explicit_code_length(10, 1.0) ==
        doctest::Approx(12.2032886847406746).epsilon(1e-14));
}

TEST_CASE("explicit conditional probabilities telescope to one") {
  for (const double sigma : {0.3, 1.0, 2.5, 17.0}) {
    double sum = 0.0;
    for (int k = 2; k <= 400; ++k) sum += explicit_conditional_prob(k, sigma);
    sum += explicit_tail_remainder(400, sigma);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(explicit_conditional_prob(2, sigma) ==
          doctest::Approx(std::exp2(-explicit_code_length(2, sigma)))
              .epsilon(1e-12));
  }
}

TEST_CASE("binary code length decomposes over the flags") {
  const ModelParams p = binary_params(1.0, 0.5, 0.5);
  CHECK(binary_code_length(0, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary_code_length(1, p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(binary_code_length(-1, p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(binary_code_length(-2, p) ==
        doctest::Approx(3.66172835762896734).epsilon(1e-13));
  for (int32_t q = -40; q <= 40; ++q)
    CHECK(binary_code_length(q, p) ==
          doctest::Approx(binary_code_length(-q, p)).epsilon(1e-15));
}

TEST_CASE("binary code length is monotone in magnitude past one") {
  const ModelParams p = binary_params(0.8, 0.3, 0.6);
  double prev = binary_code_length(2, p);
  for (int32_t q = 3; q < 60; ++q) {
    const double cur = binary_code_length(q, p);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("binary pmf sums to one and matches the code lengths") {
  const CounterRng rng(5);
  for (uint64_t i = 0; i < 200; ++i) {
    const ModelParams p =
        binary_params(0.2 + 4.0 * rng.uniform_open(4 * i),
                      0.02 + 0.96 * rng.uniform_open(4 * i + 1),
                      0.02 + 0.96 * rng.uniform_open(4 * i + 2));
    const DiscretePmf pmf = binary_pmf(p, 32);
    CHECK(pmf.total() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = -32; k <= 32; ++k)
      CHECK(pmf.prob(k) ==
            doctest::Approx(std::exp2(-binary_code_length(k, p)))
                .epsilon(1e-12));
  }
}

TEST_CASE("binary model reproduces any symmetric mass split on -1,0,1") {
  const double pi0 = 0.8;
  const ModelParams p = binary_params(1.0, 1.0 - pi0, kProbEps);
  const DiscretePmf pmf = binary_pmf(p, 8);
  CHECK(pmf.prob(0) == doctest::Approx(pi0).epsilon(1e-12));
  CHECK(pmf.prob(1) == doctest::Approx((1.0 - pi0) / 2).epsilon(1e-4));
  CHECK(pmf.prob(-1) == doctest::Approx((1.0 - pi0) / 2).epsilon(1e-4));
}

TEST_CASE("discretized gaussian length is the interval self-information") {
  const ModelParams p = loc_scale(0.0, 1.0);
  // Phi(1/2) - Phi(-1/2) with Phi(1/2) = 0.69146246127401310.
  CHECK(gaussian_code_length(0, p) ==
        doctest::Approx(1.38486653429098968).epsilon(1e-13));
  CHECK(gaussian_code_length(3, p) ==
        doctest::Approx(gaussian_code_length(-3, p)).epsilon(1e-13));
  const ModelParams shifted = loc_scale(2.0, 1.0);
  CHECK(gaussian_code_length(2, shifted) ==
        doctest::Approx(gaussian_code_length(0, p)).epsilon(1e-13));
}

TEST_CASE("discretized laplace length is the interval self-information") {
  const ModelParams p = loc_scale(0.0, 1.0);
  CHECK(laplace_code_length(0, p) ==
        doctest::Approx(1.34567687170520281).epsilon(1e-13));
  for (int32_t q = -20; q <= 20; ++q)
    CHECK(laplace_code_length(q, p) ==
          doctest::Approx(laplace_code_length(-q, p)).epsilon(1e-12));
}

TEST_CASE("far-tail code lengths stay finite and monotone") {
  const ModelParams g = loc_scale(0.0, 1.0);
  double prev = 0.0;
  for (const int32_t q : {10, 20, 30, 38}) {
    const double len = gaussian_code_length(q, g);
    CHECK(std::isfinite(len));
    CHECK(len > prev);
    prev = len;
  }
  CHECK(std::isfinite(laplace_code_length(600, g)));
  CHECK(std::isfinite(binary_code_length(100000, binary_params(1.0, .5, .5))));
}

TEST_CASE("step scaling widens the integration interval") {
  const ModelParams p = loc_scale(0.0, 1.0);
  CHECK(gaussian_code_length(0, p, 2.0) < gaussian_code_length(0, p, 1.0));
  CHECK(laplace_code_length(0, p, 0.5) > laplace_code_length(0, p, 1.0));
  // Masses over a partition of the line still sum to one.
  double total = 0.0;
  for (int32_t q = -200; q <= 200; ++q)
    total += std::exp2(-gaussian_code_length(q, p, 0.25));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("model pmf dispatch normalizes for every kind") {
  const CounterRng rng(11);
  const ModelKind kinds[] = {ModelKind::kGaussian, ModelKind::kLaplace,
                             ModelKind::kBinary};
  for (uint64_t i = 0; i < 100; ++i)
    for (const ModelKind kind : kinds) {
      ModelParams p;
      p.mu = 3.0 * rng.uniform_sym(8 * i);
      p.sigma = std::exp(2.0 * rng.uniform_sym(8 * i + 1));
      p.p_g0 = 0.05 + 0.9 * rng.uniform_open(8 * i + 2);
      p.p_g1 = 0.05 + 0.9 * rng.uniform_open(8 * i + 3);
      const DiscretePmf pmf = model_pmf(kind, p, 48);
      CHECK(pmf.total() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(pmf.tail_mass >= 0.0);
    }
}

TEST_CASE("invalid parameters are rejected up front") {
  CHECK_THROWS_AS(binary_code_length(0, binary_params(0.0, .5, .5)),
                  UsageError);
  CHECK_THROWS_AS(binary_code_length(0, binary_params(1.0, 0.0, .5)),
                  UsageError);
  CHECK_THROWS_AS(binary_code_length(0, binary_params(1.0, .5, 1.0)),
                  UsageError);
  CHECK_THROWS_AS(gaussian_code_length(0, loc_scale(0.0, -1.0)), UsageError);
  CHECK_THROWS_AS(explicit_code_length(1, 1.0), UsageError);
  CHECK_THROWS_AS(clamp_probability(1.5), UsageError);
  CHECK(clamp_probability(1e-9) == doctest::Approx(kProbEps));
}
