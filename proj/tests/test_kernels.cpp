#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bohrkit/kernels.hpp"

using namespace bohrkit::kernels;
using cd = std::complex<double>;

namespace {

TorusProblem random_problem(std::mt19937_64& rng, std::size_t dim, std::size_t polys, std::size_t terms) {
  std::uniform_int_distribution<std::int64_t> e(-5, 5);
  std::uniform_real_distribution<double> u(-1, 1);
  TorusProblem pr;
  pr.dim = dim;
  for (std::size_t p = 0; p < polys; ++p) {
    TorusPoly tp;
    for (std::size_t t = 0; t < terms; ++t) {
      std::vector<std::pair<std::uint32_t, std::int64_t>> ex;
      for (std::uint32_t d = 0; d < dim; ++d) ex.emplace_back(d, e(rng));
      tp.add_term(cd(u(rng), u(rng)), ex);
    }
    pr.polys.push_back(std::move(tp));
  }
  return pr;
}

const Functional kAbsAndSquare = [](std::span<const cd> v, std::span<double> out) {
  out[0] = std::abs(v[0]);
  out[1] = std::norm(v[0] * v[1]);
};

}  // namespace

TEST(Kernels, MonteCarloParallelMatchesSerialReference) {
  std::mt19937_64 rng(1);
  auto pr = random_problem(rng, 3, 2, 6);
  const std::uint64_t n = 3 * kBatch + 123;
  const auto ref = serial::torus_monte_carlo(pr, kAbsAndSquare, 2, n, 77);
  for (int threads : {1, 2, 3}) {
    const auto par = omp::torus_monte_carlo(pr, kAbsAndSquare, 2, n, 77, threads);
    EXPECT_EQ(par.n, ref.n);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(par.sum[i], ref.sum[i], 1e-9 * std::abs(ref.sum[i]));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(par.cross[i], ref.cross[i], 1e-9 * std::abs(ref.cross[i]));
  }
  // The block reduction order is fixed, so the thread count never matters.
  const auto a = omp::torus_monte_carlo(pr, kAbsAndSquare, 2, n, 77, 1);
  const auto b = omp::torus_monte_carlo(pr, kAbsAndSquare, 2, n, 77, 4);
  EXPECT_EQ(a.sum, b.sum);
  EXPECT_EQ(a.cross, b.cross);
}

TEST(Kernels, GridParallelMatchesSerialReference) {
  std::mt19937_64 rng(2);
  auto pr = random_problem(rng, 2, 2, 5);
  const std::uint32_t sizes[] = {64, 32};
  const auto ref = serial::torus_grid(pr, kAbsAndSquare, 2, sizes);
  const auto par = omp::torus_grid(pr, kAbsAndSquare, 2, sizes, 2);
  EXPECT_EQ(par.nodes, 64u * 32u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(par.sum[i], ref.sum[i], 1e-9 * std::abs(ref.sum[i]));
    EXPECT_NEAR(par.half_sum[i], ref.half_sum[i], 1e-9 * std::abs(ref.half_sum[i]));
    EXPECT_NEAR(par.max[i], ref.max[i], 1e-9 * std::abs(ref.max[i]));
    EXPECT_NEAR(par.min[i], ref.min[i], 1e-9 * std::abs(ref.min[i]) + 1e-12);
  }
}

TEST(Kernels, GridIsExactForTrigonometricIntegrands) {
  // mean of |P|^2 is the sum of squared moduli when the grid resolves every
  // exponent difference.
  std::mt19937_64 rng(4);
  auto pr = random_problem(rng, 3, 1, 4);
  double parseval = 0.0;
  for (auto c : pr.polys[0].coeffs) parseval += std::norm(c);
  const std::uint32_t sizes[] = {32, 32, 32};
  const Functional sq = [](std::span<const cd> v, std::span<double> out) { out[0] = std::norm(v[0]); };
  const auto s = omp::torus_grid(pr, sq, 1, sizes, 1);
  EXPECT_NEAR(s.sum[0] / static_cast<double>(s.nodes), parseval, 1e-12);
}

TEST(Kernels, TorusCoordinatesAreSharedAcrossDimensions) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const double u = torus_coordinate(5, s, 2);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, torus_coordinate(5, s, 2));
    EXPECT_NE(u, torus_coordinate(6, s, 2));
  }
}

TEST(Kernels, RealLineSegmentsParallelMatchesSerial) {
  const double freqs[] = {0.0, 1.3, -2.7, 9.5};
  const cd coeffs[] = {{1, 0}, {0.5, 0.25}, {-0.3, 0.1}, {0.2, 0}};
  const double breaks[] = {0.0, 3.0, 50.0, 400.0};
  RealLineTask task{freqs, coeffs, breaks, 1.0, 1};
  const PointFunctional h = [](cd z) { return cd(std::abs(z), 0.0); };
  const auto ref = serial::real_line_segments(task, h);
  const auto par = omp::real_line_segments(task, h, 3);
  ASSERT_EQ(ref.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(par[i] - ref[i]), 0.0, 1e-10);
}

TEST(Kernels, GaussLegendreIntegratesOscillations) {
  const double freqs[] = {2.0};
  const cd coeffs[] = {{1, 0}};
  const double breaks[] = {0.0, 10.0};
  RealLineTask task{freqs, coeffs, breaks, 1.0, 1};
  const auto r = omp::real_line_segments(task, [](cd z) { return z; }, 1);
  // int_0^10 e^{2it} dt = (e^{20i} - 1) / (2i)
  const cd exact = (std::polar(1.0, 20.0) - 1.0) / cd(0, 2);
  EXPECT_NEAR(std::abs(r[0] - exact), 0.0, 1e-13);
}
