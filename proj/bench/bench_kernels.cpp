// Serial reference kernels against their OpenMP counterparts. Arg(0) is the
// serial version; Arg(t > 0) runs the OpenMP kernel with t threads.

#include <benchmark/benchmark.h>

#include <cmath>

#include "bohrkit/bohrint.hpp"
#include "bohrkit/riesz.hpp"

using namespace bohrkit;
namespace k = bohrkit::kernels;

namespace {

kernels::TorusProblem problem(std::uint32_t p, std::size_t stages) {
  std::vector<std::uint32_t> ps(stages, p);
  const auto params = make_independent_params(ps, 7);
  std::vector<APPoly> polys;
  for (std::size_t i = 0; i < stages; ++i) polys.push_back(build_polynomial(params, i));
  return compile_torus(polys);
}

void abs_value(std::span<const std::complex<double>> v, std::span<double> out) { out[0] = std::abs(v[0]); }

void MonteCarlo(benchmark::State& state) {
  const auto pr = problem(64, 1);
  const int threads = int(state.range(0));
  const std::uint64_t samples = 1 << 15;
  for (auto _ : state) {
    auto r = threads == 0 ? k::serial::torus_monte_carlo(pr, abs_value, 1, samples, 3)
                          : k::omp::torus_monte_carlo(pr, abs_value, 1, samples, 3, threads);
    benchmark::DoNotOptimize(r.sum);
  }
  state.SetItemsProcessed(state.iterations() * samples);
}

void Grid(benchmark::State& state) {
  const auto pr = problem(4, 1);
  const std::vector<std::uint32_t> sizes(pr.dim, 64);
  const int threads = int(state.range(0));
  for (auto _ : state) {
    auto r = threads == 0 ? k::serial::torus_grid(pr, abs_value, 1, sizes)
                          : k::omp::torus_grid(pr, abs_value, 1, sizes, threads);
    benchmark::DoNotOptimize(r.sum);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(std::pow(64.0, double(pr.dim))));
}

void RealLine(benchmark::State& state) {
  std::vector<double> freqs;
  std::vector<std::complex<double>> coeffs;
  for (int j = 0; j < 64; ++j) {
    freqs.push_back(100.0 * std::exp(j / 64.0));
    coeffs.emplace_back(0.125, 0.0);
  }
  std::vector<double> breaks;
  for (int i = 0; i <= 64; ++i) breaks.push_back(1.0 + i / 64.0);
  k::RealLineTask task{freqs, coeffs, breaks};
  const auto h = [](std::complex<double> z) { return std::complex<double>(std::abs(z)); };
  const int threads = int(state.range(0));
  for (auto _ : state) {
    auto r = threads == 0 ? k::serial::real_line_segments(task, h) : k::omp::real_line_segments(task, h, threads);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK(MonteCarlo)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(Grid)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(RealLine)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
