#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bohrkit/bohrint.hpp"
#include "bohrkit/riesz.hpp"

using namespace bohrkit;
using cd = std::complex<double>;

namespace {

BasisPtr basis4() { return SymbolBasis::make({{"one", 1.0}, {"a", 0.7071}, {"b", 1.618}, {"c", 2.2}}); }

Frequency F(const BasisPtr& b, const char* text) { return Frequency::parse(b, text); }

// (1/2pi) int_0^{2pi} |1 + e^{i theta}| d theta by a fine midpoint rule.
double oracle_mean_abs_one_plus_char() {
  const int n = 2'000'000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * (i + 0.5) / n;
    acc += 2.0 * std::abs(std::cos(th / 2.0));
  }
  return acc / n;
}

Budget mc(std::uint64_t samples, std::uint64_t seed = 1) {
  Budget b;
  b.method = Method::monte_carlo;
  b.samples = samples;
  b.seed = seed;
  return b;
}

APPoly random_poly(std::mt19937_64& rng, const BasisPtr& b, std::size_t symbols, std::size_t terms) {
  std::uniform_int_distribution<int> e(-3, 3);
  std::uniform_real_distribution<double> u(-1, 1);
  APPoly p(b);
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<Rational> v(b->size());
    for (std::size_t s = 1; s <= symbols; ++s) v[s] = e(rng);
    p.add_term(Frequency::from_dense(b, v), cd(u(rng), u(rng)));
  }
  return p;
}

}  // namespace

TEST(BohrIntegral, IdentityOfCharacterIsZero) {
  auto b = basis4();
  APPoly p = APPoly::monomial(F(b, "a"));
  auto e = bohr_integral([](std::span<const cd> v) { return v[0].real(); }, std::span(&p, 1), Budget{});
  EXPECT_EQ(e.method, Method::tensor_quadrature);
  EXPECT_NEAR(e.value, 0.0, 1e-15);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(BohrIntegral, MeanAbsOfOnePlusCharacter) {
  auto b = basis4();
  const double oracle = oracle_mean_abs_one_plus_char();
  EXPECT_NEAR(oracle, 4.0 / std::numbers::pi, 1e-9);
  APPoly p = poly_add(APPoly::constant(b, 1.0), APPoly::monomial(F(b, "a")));
  auto e = mean_abs(p, Budget{});
  EXPECT_EQ(e.method, Method::tensor_quadrature);
  EXPECT_EQ(e.torus_dim, 1u);
  // The kink of |.| limits the trapezoid rule to second order; the reported
  // refinement delta bounds the actual error.
  EXPECT_LE(std::abs(e.value - oracle), e.refinement_delta);
  EXPECT_LT(e.refinement_delta, 2e-3);
  Budget fine;
  fine.min_nodes = 4096;
  EXPECT_NEAR(mean_abs(p, fine).value, oracle, 1e-6);

  auto m = mean_abs(p, mc(1 << 18, 3));
  EXPECT_EQ(m.method, Method::monte_carlo);
  EXPECT_NEAR(m.value, oracle, 4 * m.std_error);
}

TEST(BohrIntegral, TrivialMeanAbs) {
  auto b = basis4();
  EXPECT_NEAR(mean_abs(APPoly::monomial(F(b, "b")), Budget{}).value, 1.0, 1e-14);
  EXPECT_NEAR(mean_abs(APPoly::constant(b, cd(3.0, 4.0)), Budget{}).value, 5.0, 1e-14);
  auto e = mean_abs(APPoly::constant(b, cd(3.0, 4.0)), Budget{});
  EXPECT_EQ(e.torus_dim, 0u);
}

TEST(BohrIntegral, IdentityAgreesWithExactMean) {
  std::mt19937_64 rng(8);
  auto b = basis4();
  for (int trial = 0; trial < 20; ++trial) {
    APPoly p = random_poly(rng, b, 3, 6);
    p.add_term(Frequency(b), cd(0.3, -0.2));
    auto re = bohr_integral([](std::span<const cd> v) { return v[0].real(); }, std::span(&p, 1), Budget{});
    auto im = bohr_integral([](std::span<const cd> v) { return v[0].imag(); }, std::span(&p, 1), Budget{});
    EXPECT_NEAR(re.value, mean(p).real(), 1e-12);
    EXPECT_NEAR(im.value, mean(p).imag(), 1e-12);
  }
}

TEST(BohrIntegral, TensorAndMonteCarloAgree) {
  std::mt19937_64 rng(12);
  auto b = basis4();
  for (int trial = 0; trial < 10; ++trial) {
    APPoly p = random_poly(rng, b, 1 + trial % 3, 5);
    auto t = mean_abs(p, Budget{});
    auto m = mean_abs(p, mc(1 << 16, trial));
    ASSERT_EQ(t.method, Method::tensor_quadrature);
    const double err = std::hypot(m.std_error, t.refinement_delta);
    EXPECT_LE(std::abs(t.value - m.value), 3 * err + 1e-12) << to_string(p);
  }
}

TEST(BohrIntegral, CauchySchwarz) {
  std::mt19937_64 rng(13);
  auto b = basis4();
  for (int trial = 0; trial < 10; ++trial) {
    APPoly p = random_poly(rng, b, 3, 7);
    auto e = mean_abs(p, Budget{});
    EXPECT_LE(e.value * e.value, mean(abs2(p)).real() + 3 * e.refinement_delta + 1e-12);
  }
}

TEST(BohrIntegral, SeededDeterminism) {
  std::uint32_t ps[] = {8};
  auto params = make_independent_params(ps, 4);
  APPoly p = build_polynomial(params, 0);
  auto b1 = mc(100'000, 42), b2 = mc(100'000, 42), b3 = mc(100'000, 43);
  b1.threads = 1;
  b2.threads = 3;
  auto e1 = mean_abs(p, b1), e2 = mean_abs(p, b2), e3 = mean_abs(p, b3);
  EXPECT_EQ(e1.value, e2.value);
  EXPECT_EQ(e1.std_error, e2.std_error);
  EXPECT_NE(e1.value, e3.value);
  EXPECT_EQ(e1.seed, 42u);
}

TEST(BohrIntegral, MethodLimits) {
  std::uint32_t ps[] = {8};
  auto params = make_independent_params(ps, 4);
  APPoly p = build_polynomial(params, 0);  // torus dimension 7
  Budget t;
  t.method = Method::tensor_quadrature;
  EXPECT_THROW(mean_abs(p, t), BudgetError);
  EXPECT_EQ(mean_abs(p, Budget{}).method, Method::monte_carlo);

  auto b = basis4();
  APPoly q = APPoly::monomial(F(b, "a"));
  EXPECT_THROW(bohr_integral([](std::span<const cd>) { return std::nan(""); }, std::span(&q, 1), Budget{}),
               ValidationError);
}

TEST(BohrIntegral, MultiEstimateCovariance) {
  auto b = basis4();
  APPoly p = poly_add(APPoly::constant(b, 1.0), APPoly::monomial(F(b, "a")));
  p.add_term(F(b, "b"), 0.5);
  const Functional g = [](std::span<const cd> v, std::span<double> out) {
    out[0] = std::abs(v[0]);
    out[1] = 2.0 * std::abs(v[0]);
  };
  auto e = bohr_integrals(g, 2, std::span(&p, 1), mc(1 << 15, 9));
  const double w[] = {2.0, -1.0};
  EXPECT_NEAR(e.linear_error(w), 0.0, 1e-9);
  EXPECT_NEAR(e.component(1).std_error, 2.0 * e.component(0).std_error, 1e-12);
}

TEST(BohrIntegral, JsonRecord) {
  auto b = basis4();
  auto e = mean_abs(APPoly::monomial(F(b, "a")), mc(1000, 5));
  auto j = to_json(e);
  EXPECT_EQ(j["method"], "monte-carlo");
  EXPECT_EQ(j["n"], 1000);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["torus_dim"], 1);
}

TEST(RealLine, ConstantAndCharacter) {
  auto b = basis4();
  EXPECT_NEAR(real_line_mean(APPoly::constant(b, 1.0), 37.0).real(), 1.0, 1e-13);
  const double alpha = 0.7071;
  for (double T : {3.0, 50.0, 700.0}) {
    const cd m = real_line_mean(APPoly::monomial(F(b, "a")), T);
    EXPECT_NEAR(m.real(), std::sin(alpha * T) / (alpha * T), 1e-12);
    EXPECT_NEAR(m.imag(), 0.0, 1e-12);
    EXPECT_LE(std::abs(m), 1.0 / (alpha * T) + 1e-12);
  }
}

TEST(RealLine, RandomPolynomialsAgainstSincOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> w(0.1, 10.0), u(-1, 1);
  std::bernoulli_distribution neg(0.5);
  for (int trial = 0; trial < 5; ++trial) {
    RealLinePoly p;
    for (int k = 0; k < 5; ++k) {
      p.freqs.push_back(neg(rng) ? -w(rng) : w(rng));
      p.coeffs.emplace_back(u(rng), u(rng));
    }
    const double Ts[] = {100.0, 1000.0, 10000.0};
    const auto prof = real_line_mean_profile(p, Ts);
    for (int i = 0; i < 3; ++i) {
      cd oracle{0.0, 0.0};
      for (int k = 0; k < 5; ++k) oracle += p.coeffs[k] * std::sin(p.freqs[k] * Ts[i]) / (p.freqs[k] * Ts[i]);
      EXPECT_NEAR(std::abs(prof[i] - oracle), 0.0, 1e-11);
      EXPECT_NEAR(std::abs(real_line_mean(p, Ts[i]) - oracle), 0.0, 1e-11);
    }
  }
}

TEST(RealLine, IntervalDistortion) {
  auto b = basis4();
  EXPECT_NEAR(interval_l1_distortion(APPoly::monomial(F(b, "a")), 0.0, 5.0).value, 0.0, 1e-14);
  EXPECT_NEAR(interval_l1_distortion(APPoly::constant(b, 1.0), 0.0, 5.0).value, 0.0, 1e-14);

  const double r = 1.0 / std::sqrt(2.0);
  APPoly p = poly_add(APPoly::constant(b, r), APPoly::monomial(F(b, "one"), r));
  auto e = interval_l1_distortion(p, 0.0, 2.0 * std::numbers::pi);
  // (1/2pi) int_0^{2pi} |cos t| dt
  EXPECT_NEAR(e.value, 2.0 / std::numbers::pi, 1e-7);
  EXPECT_LE(e.refinement_delta, 1e-8);
  EXPECT_THROW(interval_l1_distortion(p, 1.0, 1.0), ValidationError);
}
