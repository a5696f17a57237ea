#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bohrkit/criteria.hpp"
#include "support/generators.hpp"

using namespace bohrkit;

namespace {

const double kGaussAbs = std::sqrt(std::numbers::pi) / 2.0;

Budget mc(std::uint64_t samples, std::uint64_t seed = 1) {
  Budget b;
  b.method = Method::monte_carlo;
  b.samples = samples;
  b.seed = seed;
  return b;
}

// prod_j 2^{-l_j} C(l_j, l_j/2), by Pascal's triangle in doubles.
double moment_oracle(const std::vector<std::uint32_t>& l) {
  double r = 1.0;
  for (std::uint32_t n : l) {
    if (n % 2) return 0.0;
    std::vector<double> row{1.0};
    for (std::uint32_t i = 0; i < n; ++i) {
      std::vector<double> next(row.size() + 1, 0.0);
      for (std::size_t j = 0; j < row.size(); ++j) {
        next[j] += row[j] / 2;
        next[j + 1] += row[j] / 2;
      }
      row = std::move(next);
    }
    r *= row[n / 2];
  }
  return r;
}

}  // namespace

TEST(KacMoments, Examples) {
  std::uint32_t two[] = {2}, one[] = {1}, mixed[] = {2, 4};
  EXPECT_EQ(kac_moment_identity(two).formula, Rational(1, 2));
  EXPECT_EQ(kac_moment_identity(one).formula, 0);
  auto m = kac_moment_identity(mixed);
  EXPECT_EQ(m.formula, Rational(3, 16));
  EXPECT_TRUE(m.agree);
  EXPECT_EQ(kac_moment_identity(std::span<const std::uint32_t>{}).formula, 1);
}

TEST(KacMoments, AllSmallTuples) {
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<std::uint32_t> l(k, 0);
    while (true) {
      std::uint32_t total = 0;
      for (auto x : l) total += x;
      if (total <= 8) {
        auto r = kac_moment_identity(l);
        EXPECT_TRUE(r.agree);
        EXPECT_NEAR(r.formula.get_d(), moment_oracle(l), 1e-15);
      }
      std::size_t i = 0;
      while (i < k && ++l[i] > 8) l[i++] = 0;
      if (i == k) break;
    }
  }
}

TEST(KacClt, SingleTerm) {
  auto d = kac_clt_diagnostics(1, 1000, 3);
  EXPECT_NEAR(d.mean_abs.value, 1.0, 1e-14);
  EXPECT_NEAR(d.mean_abs2.value, 1.0, 1e-14);
  EXPECT_THROW(kac_clt_diagnostics(0, 10, 1), ValidationError);
}

TEST(KacClt, GaussianLimit) {
  auto d = kac_clt_diagnostics(128, 100'000, 11);
  EXPECT_NEAR(d.mean_abs.value, kGaussAbs, 0.01);
  EXPECT_NEAR(d.mean_abs2.value, 1.0, 3 * d.mean_abs2.std_error);
  EXPECT_LT(d.ks_re, 0.01);
  EXPECT_LT(d.ks_im, 0.01);
  auto again = kac_clt_diagnostics(128, 100'000, 11, 3);
  EXPECT_EQ(again.ks_re, d.ks_re);
  EXPECT_EQ(again.mean_abs.value, d.mean_abs.value);
}

TEST(KacClt, KsDistance) {
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_DOUBLE_EQ(ks_distance({0.5}, uniform), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance({0.25, 0.75}, uniform), 0.25);
  EXPECT_THROW(ks_distance({}, uniform), ValidationError);
}

TEST(BourgainScan, SingleStepIsMeanAbs) {
  std::uint32_t ps[] = {5, 6};
  auto params = make_independent_params(ps, 2);
  ScanOptions o;
  o.strategy = ScanStrategy::fixed_stride;
  o.k_max = 1;
  o.budget = mc(1 << 14, 4);
  auto r = bourgain_scan(params, o);
  ASSERT_EQ(r.integrals.size(), 2u);
  EXPECT_EQ(r.integrals[0].value, 1.0);
  EXPECT_EQ(r.indices, std::vector<std::size_t>{0});
  EXPECT_LE(r.integrals[1].value, 1.0 + 3 * r.integrals[1].std_error);
  EXPECT_DOUBLE_EQ(r.decay_ratios[0], r.integrals[1].value);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(BourgainScan, GreedyDecay) {
  std::vector<std::uint32_t> ps(9, 32);
  auto params = make_independent_params(ps, 5);
  ScanOptions o;
  o.k_max = 3;
  o.budget = mc(1 << 14, 6);
  auto r = bourgain_scan(params, o);
  ASSERT_EQ(r.indices.size(), 3u);
  for (std::size_t k = 1; k < r.indices.size(); ++k) {
    EXPECT_GT(r.indices[k], r.indices[k - 1]);
    EXPECT_LE(r.indices[k], r.indices[k - 1] + o.window);
  }
  EXPECT_TRUE(r.nonincreasing());
  for (double d : r.decay_ratios) EXPECT_NEAR(d, kGaussAbs, 0.04);
  const auto j = to_json(r);
  EXPECT_EQ(j["I"].size(), 4u);
  EXPECT_EQ(j["verdict"], "inconclusive");

  // Replays bit for bit.
  EXPECT_EQ(to_json(bourgain_scan(params, o)).dump(), j.dump());

  o.k_max = 4;
  o.window = 1;
  std::vector<std::uint32_t> short_ps(3, 4);
  EXPECT_THROW(bourgain_scan(make_independent_params(short_ps, 1), o), BudgetError);
}

TEST(CsBound, TrivialSubsets) {
  std::uint32_t ps[] = {3, 4, 3, 2};
  auto params = make_independent_params(ps, 7);
  auto empty = cs_subsequence_bound(params, 3, {}, mc(1 << 13));
  EXPECT_EQ(empty.rhs, 1.0);
  EXPECT_TRUE(empty.holds);
  std::size_t all[] = {0, 1, 2, 3};
  auto full = cs_subsequence_bound(params, 3, all, mc(1 << 13));
  EXPECT_NEAR(full.rhs, std::sqrt(full.lhs), 1e-15);
  EXPECT_TRUE(full.holds);
  std::size_t bad[] = {4};
  EXPECT_THROW(cs_subsequence_bound(params, 3, bad, mc(100)), ValidationError);
}

TEST(CsBound, RandomCases) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    auto params = gen::random_params(rng, 4, 2, 5);
    std::size_t sub[] = {1, 3};
    EXPECT_TRUE(cs_subsequence_bound(params, 3, sub, mc(1 << 13, trial)).holds);
  }
}

TEST(Klemes, EmptyQ) {
  std::uint32_t ps[] = {64};
  auto params = make_independent_params(ps, 8);
  auto k = klemes_inequality_check(params, {}, 0, mc(1 << 15, 9));
  EXPECT_NEAR(k.q_integral, 1.0, 1e-15);
  EXPECT_NEAR(k.q_distortion, 2.0 / std::numbers::e, 0.03);
  EXPECT_NEAR(k.check.rhs, 1.0 - k.q_distortion * k.q_distortion / 8.0, 3 * k.check.std_error + 0.01);
  EXPECT_TRUE(k.check.holds);
}

TEST(Klemes, RandomCasesAndValidation) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    auto params = gen::random_independent_params(rng, 3, 2, 6);
    std::size_t q[] = {0, 1};
    EXPECT_TRUE(klemes_inequality_check(params, q, 2, mc(1 << 13, trial)).check.holds);
  }
  std::uint32_t ps[] = {2, 2};
  auto params = make_independent_params(ps, 1);
  std::size_t q[] = {1};
  EXPECT_THROW(klemes_inequality_check(params, q, 1, mc(100)), ValidationError);
}

TEST(Haar, IndependentStagesFactorize) {
  std::uint32_t ps[] = {3, 2, 4, 3};
  auto params = make_independent_params(ps, 10);
  std::size_t q[] = {0, 1};
  std::size_t ms[] = {2, 3};
  auto recs = haar_weak_limit_check(params, q, ms, mc(1 << 14, 2));
  ASSERT_EQ(recs.size(), 2u);
  for (const auto& r : recs) {
    ASSERT_TRUE(r.symbolic_deviation.has_value());
    EXPECT_EQ(*r.symbolic_deviation, 0);
    EXPECT_NEAR(r.deviation, 0.0, 4 * r.std_error + 1e-12);
  }
  // Q = 1: int |P_m|^2 = 1.
  auto trivial = haar_weak_limit_check(params, {}, ms, mc(1 << 14, 2));
  EXPECT_EQ(*trivial[0].symbolic_deviation, 0);
  EXPECT_TRUE(to_json(trivial[0])["symbolic_deviation"] == "0");
}

TEST(Haar, SymbolicCap) {
  std::uint32_t ps[] = {8, 8, 8};
  auto params = make_independent_params(ps, 1);
  std::size_t q[] = {0, 1};
  std::size_t ms[] = {2};
  auto recs = haar_weak_limit_check(params, q, ms, mc(1000), 100);
  EXPECT_FALSE(recs[0].symbolic_deviation.has_value());
}

TEST(Guenais, EmptyAndGaussian) {
  std::vector<std::uint32_t> ps(3, 64);
  auto params = make_independent_params(ps, 12);
  auto empty = guenais_sum(params, 0, mc(100));
  EXPECT_TRUE(empty.partial_sums.empty());
  EXPECT_FALSE(empty.tail_slope.has_value());

  auto r = guenais_sum(params, 3, mc(1 << 15, 13));
  const double target = std::sqrt(1.0 - std::numbers::pi / 4.0);
  EXPECT_NEAR(target, 0.4633, 1e-4);
  ASSERT_EQ(r.increments.size(), 3u);
  for (double inc : r.increments) EXPECT_NEAR(inc, target, 0.03);
  EXPECT_NEAR(r.partial_sums.back(), r.increments[0] + r.increments[1] + r.increments[2], 1e-14);
  EXPECT_TRUE(r.tail_slope.has_value());
  EXPECT_THROW(guenais_sum(params, 4, mc(100)), ValidationError);
}

TEST(Guenais, DominantCharacter) {
  auto b = SymbolBasis::make({{"one", 1.0}, {"a", 0.9}});
  RankOneParams params;
  params.basis = b;
  Stage s;
  s.p = 2;
  s.spacers = {Frequency(b), Frequency(b), Frequency(b)};
  params.stages.push_back(s);
  // |(1 + e^{it})/sqrt 2| has norm 2 sqrt 2 / pi; increment sqrt(1 - 8/pi^2).
  Budget fine;
  fine.min_nodes = 1 << 14;
  auto r = guenais_sum(params, 1, fine);
  EXPECT_NEAR(r.increments[0], std::sqrt(1.0 - 8.0 / (std::numbers::pi * std::numbers::pi)), 1e-6);
}

TEST(Fejer, IndependentStages) {
  std::uint32_t ps[] = {16, 16};
  auto params = make_independent_params(ps, 14);
  std::size_t q[] = {0};
  auto c = fejer_factorization_check(params, q, 1, mc(1 << 15, 15));
  EXPECT_TRUE(c.holds);
  ASSERT_TRUE(c.symbolic_holds.has_value());
  EXPECT_TRUE(*c.symbolic_holds);

  auto trivial = fejer_factorization_check(params, {}, 1, mc(1 << 12));
  EXPECT_EQ(trivial.relative_gap, 0.0);
}

TEST(Fejer, DependentStagesRejected) {
  auto b = SymbolBasis::make({{"one", 1.0}, {"a", 0.9}});
  RankOneParams params;
  params.basis = b;
  for (int k = 0; k < 2; ++k) {
    Stage s;
    s.p = 2;
    s.spacers = {Frequency(b), Frequency(b), Frequency(b)};
    params.stages.push_back(s);
  }
  std::size_t q[] = {0};
  EXPECT_THROW(fejer_factorization_check(params, q, 1, mc(100)), ValidationError);
}
