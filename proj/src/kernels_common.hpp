#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "bohrkit/kernels.hpp"
#include "bohrkit/rng.hpp"

namespace bohrkit::kernels::detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using GaussRule = boost::math::quadrature::gauss<double, 8>;

inline void check_grid(const TorusProblem& problem, std::span<const std::uint32_t> grid_sizes) {
  if (grid_sizes.size() != problem.dim) throw std::invalid_argument("torus_grid: one grid size per dimension");
  for (auto n : grid_sizes)
    if (n == 0 || (n & (n - 1))) throw std::invalid_argument("torus_grid: grid sizes must be powers of two");
}

// Value of every polynomial at the torus point u.
inline void evaluate_torus(const TorusProblem& problem, std::span<const double> u,
                           std::span<std::complex<double>> values) {
  for (std::size_t p = 0; p < problem.polys.size(); ++p) {
    const TorusPoly& poly = problem.polys[p];
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < poly.size(); ++k) {
      double x = 0.0;
      for (std::uint32_t q = poly.offsets[k]; q < poly.offsets[k + 1]; ++q)
        x += static_cast<double>(poly.exps[q]) * u[poly.dims[q]];
      x -= std::floor(x);
      acc += poly.coeffs[k] * std::complex<double>(std::cos(kTwoPi * x), std::sin(kTwoPi * x));
    }
    values[p] = acc;
  }
}

inline void fill_sample(std::uint64_t seed, std::uint64_t sample, std::span<double> u) {
  const std::uint64_t key = rng::stream_key(seed, sample);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = rng::to_unit(rng::draw(key, j));
}

inline std::complex<double> evaluate_real_line(std::span<const double> freqs,
                                               std::span<const std::complex<double>> coeffs, double t) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double ph = freqs[k] * t;
    acc += coeffs[k] * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return acc;
}

// Gauss-Legendre integral of h(P(t)) over [lo, hi].
inline std::complex<double> panel_integral(const RealLineTask& task, const PointFunctional& h, double lo,
                                           double hi) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const auto& x = GaussRule::abscissa();
  const auto& w = GaussRule::weights();
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      acc += w[i] * h(evaluate_real_line(task.freqs, task.coeffs, mid));
    } else {
      acc += w[i] * (h(evaluate_real_line(task.freqs, task.coeffs, mid - half * x[i])) +
                     h(evaluate_real_line(task.freqs, task.coeffs, mid + half * x[i])));
    }
  }
  return half * acc;
}

}  // namespace bohrkit::kernels::detail
