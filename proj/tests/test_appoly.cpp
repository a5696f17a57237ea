#include <gtest/gtest.h>

#include <random>

#include "bohrkit/appoly.hpp"

using namespace bohrkit;
using cd = std::complex<double>;

namespace {

BasisPtr basis3() { return SymbolBasis::make({{"one", 1.0}, {"a", 0.7}, {"b", 1.3}}); }

Frequency F(const BasisPtr& b, const char* text) { return Frequency::parse(b, text); }

ExactPoly random_exact(std::mt19937_64& rng, const BasisPtr& b, std::size_t terms) {
  std::uniform_int_distribution<int> c(-3, 3), e(-2, 2);
  ExactPoly p(b);
  for (std::size_t t = 0; t < terms; ++t) {
    Frequency f = Frequency::from_dense(b, {Rational(e(rng)), Rational(e(rng)), Rational(e(rng), 2)});
    p.add_term(f, ExactComplex(Rational(c(rng)), Rational(c(rng), 3)));
  }
  return p;
}

}  // namespace

TEST(APPoly, AdditionCancels) {
  auto b = basis3();
  APPoly x = APPoly::monomial(F(b, "a"));
  APPoly zero(b);
  EXPECT_EQ(poly_add(x, zero), x);
  EXPECT_TRUE(poly_add(x, x.scaled(-1.0)).empty());
  APPoly s = poly_add(APPoly::constant(b, 1.0), x);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.coeff(Frequency(b)), cd(1.0));
  EXPECT_EQ(s.coeff(F(b, "a")), cd(1.0));
}

TEST(APPoly, MultiplicationExamples) {
  auto b = basis3();
  EXPECT_EQ(poly_mul(APPoly::monomial(F(b, "a")), APPoly::monomial(F(b, "b"))), APPoly::monomial(F(b, "a + b")));

  ExactPoly one = ExactPoly::constant(b, 1);
  ExactPoly x = ExactPoly::monomial(F(b, "a"));
  ExactPoly lhs = poly_mul(poly_add(one, x), poly_sub(one, x));
  ExactPoly rhs = poly_sub(one, ExactPoly::monomial(F(b, "2*a")));
  EXPECT_EQ(lhs, rhs);

  // (1/sqrt2)(1 + e^{iht}) times its conjugate.
  const double r = 1.0 / std::sqrt(2.0);
  APPoly p0(b);
  p0.add_term(Frequency(b), r);
  p0.add_term(F(b, "one"), r);
  APPoly q = abs2(p0);
  ASSERT_EQ(q.size(), 3u);
  EXPECT_NEAR(q.coeff(Frequency(b)).real(), 1.0, 1e-15);
  EXPECT_NEAR(q.coeff(F(b, "one")).real(), 0.5, 1e-15);
  EXPECT_NEAR(q.coeff(F(b, "-1")).real(), 0.5, 1e-15);
  EXPECT_NEAR(fourier_coeff(q, F(b, "one")).real(), 0.5, 1e-15);
}

TEST(APPoly, ConjugationAndMeans) {
  auto b = basis3();
  EXPECT_EQ(poly_conj(APPoly::constant(b, 1.0)), APPoly::constant(b, 1.0));
  APPoly m = APPoly::monomial(F(b, "a"), cd(2.0, 3.0));
  APPoly c = poly_conj(m);
  EXPECT_EQ(c.coeff(F(b, "-1*a")), cd(2.0, -3.0));
  EXPECT_EQ(poly_conj(c), m);

  EXPECT_EQ(mean(APPoly::constant(b, 1.0)), cd(1.0));
  EXPECT_EQ(mean(APPoly::monomial(F(b, "a"))), cd(0.0));
  EXPECT_EQ(abs2(APPoly::monomial(F(b, "a"))), APPoly::constant(b, 1.0));
  EXPECT_TRUE(abs2(APPoly(b)).empty());
  EXPECT_EQ(fourier_coeff(APPoly::monomial(F(b, "a")), F(b, "a")), cd(1.0));
  EXPECT_EQ(fourier_coeff(APPoly::monomial(F(b, "a")), F(b, "b")), cd(0.0));
}

TEST(APPoly, NormsAndDegree) {
  auto b = basis3();
  EXPECT_DOUBLE_EQ(l2_norm(APPoly::monomial(F(b, "a"))).value, 1.0);
  APPoly p = poly_add(APPoly::constant(b, 1.0), APPoly::monomial(F(b, "a")));
  EXPECT_DOUBLE_EQ(l2_norm(p).value, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(degree(APPoly::monomial(F(b, "-2*a"))), 1.4);
  EXPECT_DOUBLE_EQ(degree(APPoly::constant(b, 3.0)), 0.0);
  EXPECT_THROW(degree(APPoly(b)), ValidationError);
}

TEST(APPoly, BasisMismatch) {
  auto b1 = basis3();
  auto b2 = SymbolBasis::make({{"one", 1.0}, {"z", 0.5}});
  EXPECT_THROW(poly_mul(APPoly::monomial(F(b1, "a")), APPoly::monomial(Frequency::parse(b2, "z"))), BasisMismatch);
}

TEST(APPoly, RingLawsOnRandomInstances) {
  std::mt19937_64 rng(3);
  auto b = basis3();
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_exact(rng, b, 1 + trial % 5);
    auto q = random_exact(rng, b, 1 + trial % 4);
    auto r = random_exact(rng, b, 1 + trial % 3);
    EXPECT_EQ(poly_mul(p, q), poly_mul(q, p));
    EXPECT_EQ(poly_mul(poly_mul(p, q), r), poly_mul(p, poly_mul(q, r)));
    // Parseval: the mean of |p|^2 is the squared norm.
    EXPECT_EQ(mean(abs2(p)).re, l2_norm(p).squared);
    EXPECT_EQ(mean(abs2(p)).im, 0);
    // Hermitian symmetry of |p|^2.
    auto a = abs2(p);
    for (const auto& [f, c] : a.terms()) EXPECT_EQ(a.coeff(-f), CoeffTraits<ExactComplex>::conj(c));
    // Off-support Fourier coefficients vanish.
    EXPECT_TRUE(CoeffTraits<ExactComplex>::is_zero(fourier_coeff(p, F(b, "7*b"))));
  }
}

TEST(APPoly, ParallelConvolutionMatchesSerial) {
  std::mt19937_64 rng(9);
  auto b = SymbolBasis::make({{"one", 1.0}, {"a", 0.7}, {"b", 1.3}, {"c", 2.1}});
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> e(-6, 6);
  APPoly p(b), q(b);
  for (int t = 0; t < 400; ++t)
    p.add_term(Frequency::from_dense(b, {e(rng), e(rng), e(rng), e(rng)}), cd(u(rng), u(rng)));
  for (int t = 0; t < 50; ++t) q.add_term(Frequency::from_dense(b, {e(rng), e(rng), 0, e(rng)}), cd(u(rng), u(rng)));
  const APPoly serial = poly_mul_serial(p, q);
  for (int threads : {1, 2, 4}) {
    const APPoly par = poly_mul(p, q, threads);
    ASSERT_EQ(par.size(), serial.size());
    for (const auto& [f, c] : serial.terms()) EXPECT_NEAR(std::abs(par.coeff(f) - c), 0.0, 1e-12);
    // Deterministic merge order: identical across thread counts.
    EXPECT_EQ(par, poly_mul(p, q, 1));
  }
}

TEST(APPoly, SymbolicKacFactorization) {
  auto b = SymbolBasis::make({{"one", 1.0}, {"a", 0.7}, {"b", 1.3}, {"c", 2.1}});
  // supp P spans {a, b}; supp Q spans {c}: ranks add, means factorize.
  ExactPoly p = ExactPoly::constant(b, ExactComplex(2, 1));
  p.add_term(F(b, "a"), 3);
  p.add_term(F(b, "a - b"), ExactComplex(0, 5));
  ExactPoly q = ExactPoly::constant(b, ExactComplex(Rational(1, 2)));
  q.add_term(F(b, "c"), 1);
  q.add_term(F(b, "-2*c"), 7);
  EXPECT_EQ(mean(poly_mul(p, q)), mean(p) * mean(q));
  EXPECT_EQ(mean(poly_mul(abs2(p), abs2(q))), mean(abs2(p)) * mean(abs2(q)));
}

TEST(APPoly, FloatingPruneRemovesRoundoffOnly) {
  auto b = basis3();
  APPoly p(b);
  p.add_term(F(b, "a"), 1.0);
  p.add_term(F(b, "b"), 1e-17);
  p.add_term(F(b, "one"), 1e-10);
  p.prune();
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p.coeff(F(b, "b")), cd(0.0));
}

TEST(APPoly, JsonRoundTrip) {
  auto b = basis3();
  APPoly p(b);
  p.add_term(F(b, "1/2*a + -3*b"), cd(0.25, -1.5));
  p.add_term(Frequency(b), cd(1.0, 0.0));
  EXPECT_EQ(appoly_from_json(b, to_json(p)), p);
  ExactPoly e(b);
  e.add_term(F(b, "a"), ExactComplex(Rational(1, 3), Rational(-2, 7)));
  EXPECT_EQ(exact_poly_from_json(b, to_json(e)), e);
  EXPECT_EQ(to_string(APPoly(b)), "0");
}
