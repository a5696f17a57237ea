#pragma once

// Data-parallel inner loops of the integration engine. Every kernel has a
// plain serial reference (namespace serial) and an OpenMP version (namespace
// omp). The OpenMP versions split work into fixed blocks and reduce the block
// partials in block order, so their output does not depend on the thread
// count. The serial references accumulate in a single pass and agree with the
// parallel versions up to summation-order roundoff.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bohrkit::kernels {

// sum_k coeffs[k] * exp(2 pi i <e_k, u>) for u in [0,1)^d. Exponent vectors are
// stored sparsely: term k uses dims/exps[offsets[k] .. offsets[k+1]).
struct TorusPoly {
  std::vector<std::complex<double>> coeffs;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> dims;
  std::vector<std::int64_t> exps;

  std::size_t size() const { return coeffs.size(); }
  void add_term(std::complex<double> c, std::span<const std::pair<std::uint32_t, std::int64_t>> exponent);
};

struct TorusProblem {
  std::size_t dim = 0;
  std::vector<TorusPoly> polys;
};

// Maps the values of all polynomials at one point to `out.size()` reals.
using Functional = std::function<void(std::span<const std::complex<double>> values, std::span<double> out)>;

// Raw moment sums of the functional outputs.
struct MomentSums {
  std::uint64_t n = 0;
  std::vector<double> sum;    // per output
  std::vector<double> cross;  // outputs x outputs, sum of products
};

struct GridSums {
  std::uint64_t nodes = 0;
  std::vector<double> sum;       // over the full grid
  std::vector<double> half_sum;  // over the subgrid with every index even
  std::vector<double> max;
  std::vector<double> min;
};

// Monte Carlo samples per reduction block.
inline constexpr std::uint64_t kBatch = std::uint64_t{1} << 14;
// Grid nodes per reduction block.
inline constexpr std::uint64_t kGridChunk = 4096;

// Coordinate `dim` of Monte Carlo sample `sample`. Depends only on
// (seed, sample, dim), so problems of different dimension share draws.
double torus_coordinate(std::uint64_t seed, std::uint64_t sample, std::uint32_t dim);

// Nodes per Gauss-Legendre panel.
inline constexpr std::size_t kGaussPoints = 8;

// Gauss-Legendre panels over consecutive segments [b_0,b_1], [b_1,b_2], ...
// of the integrand h(P(t)) where P(t) = sum c_k exp(i w_k t).
struct RealLineTask {
  std::span<const double> freqs;
  std::span<const std::complex<double>> coeffs;
  std::span<const double> breakpoints;
  double max_phase_per_panel = 1.0;
  std::size_t min_panels_per_segment = 1;
};
using PointFunctional = std::function<std::complex<double>(std::complex<double>)>;

// Number of panels assigned to segment s.
std::size_t panels_for_segment(const RealLineTask& task, std::size_t s);

namespace serial {
MomentSums torus_monte_carlo(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                             std::uint64_t samples, std::uint64_t seed);
GridSums torus_grid(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                    std::span<const std::uint32_t> grid_sizes);
std::vector<std::complex<double>> real_line_segments(const RealLineTask& task, const PointFunctional& h);
}  // namespace serial

namespace omp {
MomentSums torus_monte_carlo(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                             std::uint64_t samples, std::uint64_t seed, int threads);
GridSums torus_grid(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                    std::span<const std::uint32_t> grid_sizes, int threads);
std::vector<std::complex<double>> real_line_segments(const RealLineTask& task, const PointFunctional& h,
                                                     int threads);
}  // namespace omp

int default_threads();

}  // namespace bohrkit::kernels
