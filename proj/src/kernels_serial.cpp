#include <algorithm>
#include <cstdlib>
#include <limits>

#include <omp.h>

#include "kernels_common.hpp"

namespace bohrkit::kernels {

void TorusPoly::add_term(std::complex<double> c, std::span<const std::pair<std::uint32_t, std::int64_t>> exponent) {
  coeffs.push_back(c);
  for (const auto& [d, e] : exponent) {
    if (e == 0) continue;
    dims.push_back(d);
    exps.push_back(e);
  }
  offsets.push_back(static_cast<std::uint32_t>(dims.size()));
}

double torus_coordinate(std::uint64_t seed, std::uint64_t sample, std::uint32_t dim) {
  return rng::to_unit(rng::draw(rng::stream_key(seed, sample), dim));
}

std::size_t panels_for_segment(const RealLineTask& task, std::size_t s) {
  double wmax = 0.0;
  for (double w : task.freqs) wmax = std::max(wmax, std::abs(w));
  const double len = task.breakpoints[s + 1] - task.breakpoints[s];
  const double need = std::ceil(len * wmax / task.max_phase_per_panel);
  return std::max<std::size_t>(task.min_panels_per_segment, static_cast<std::size_t>(need));
}

int default_threads() {
  if (const char* env = std::getenv("BOHRKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

namespace serial {

MomentSums torus_monte_carlo(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                             std::uint64_t samples, std::uint64_t seed) {
  MomentSums out{samples, std::vector<double>(outputs), std::vector<double>(outputs * outputs)};
  std::vector<double> u(problem.dim), r(outputs);
  std::vector<std::complex<double>> values(problem.polys.size());
  for (std::uint64_t s = 0; s < samples; ++s) {
    detail::fill_sample(seed, s, u);
    detail::evaluate_torus(problem, u, values);
    g(values, r);
    for (std::size_t i = 0; i < outputs; ++i) {
      out.sum[i] += r[i];
      for (std::size_t j = 0; j < outputs; ++j) out.cross[i * outputs + j] += r[i] * r[j];
    }
  }
  return out;
}

GridSums torus_grid(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                    std::span<const std::uint32_t> grid_sizes) {
  detail::check_grid(problem, grid_sizes);
  GridSums out;
  out.sum.assign(outputs, 0.0);
  out.half_sum.assign(outputs, 0.0);
  out.max.assign(outputs, -std::numeric_limits<double>::infinity());
  out.min.assign(outputs, std::numeric_limits<double>::infinity());
  std::uint64_t nodes = 1;
  for (auto n : grid_sizes) nodes *= n;
  out.nodes = nodes;

  const std::size_t d = grid_sizes.size();
  std::vector<std::uint32_t> k(d, 0);
  std::vector<std::complex<double>> values(problem.polys.size());
  std::vector<double> r(outputs);
  for (std::uint64_t node = 0; node < nodes; ++node) {
    bool even = true;
    for (std::size_t p = 0; p < problem.polys.size(); ++p) {
      const TorusPoly& poly = problem.polys[p];
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t t = 0; t < poly.size(); ++t) {
        double x = 0.0;
        for (std::uint32_t q = poly.offsets[t]; q < poly.offsets[t + 1]; ++q)
          x += static_cast<double>(poly.exps[q]) * k[poly.dims[q]] / grid_sizes[poly.dims[q]];
        acc += std::polar(1.0, detail::kTwoPi * (x - std::floor(x))) * poly.coeffs[t];
      }
      values[p] = acc;
    }
    for (std::size_t i = 0; i < d; ++i) even = even && (k[i] % 2 == 0);
    g(values, r);
    for (std::size_t i = 0; i < outputs; ++i) {
      out.sum[i] += r[i];
      if (even) out.half_sum[i] += r[i];
      out.max[i] = std::max(out.max[i], r[i]);
      out.min[i] = std::min(out.min[i], r[i]);
    }
    for (std::size_t i = d; i-- > 0;) {
      if (++k[i] < grid_sizes[i]) break;
      k[i] = 0;
    }
  }
  return out;
}

std::vector<std::complex<double>> real_line_segments(const RealLineTask& task, const PointFunctional& h) {
  const std::size_t nseg = task.breakpoints.size() - 1;
  std::vector<std::complex<double>> out(nseg);
  for (std::size_t s = 0; s < nseg; ++s) {
    const std::size_t panels = panels_for_segment(task, s);
    const double a = task.breakpoints[s], width = (task.breakpoints[s + 1] - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + width * static_cast<double>(p);
      const double hi = (p + 1 == panels) ? task.breakpoints[s + 1] : lo + width;
      out[s] += detail::panel_integral(task, h, lo, hi);
    }
  }
  return out;
}

}  // namespace serial
}  // namespace bohrkit::kernels
