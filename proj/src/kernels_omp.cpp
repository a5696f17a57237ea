#include <algorithm>
#include <limits>

#include "kernels_common.hpp"

namespace bohrkit::kernels::omp {

MomentSums torus_monte_carlo(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                             std::uint64_t samples, std::uint64_t seed, int threads) {
  const std::uint64_t nb = (samples + kBatch - 1) / kBatch;
  std::vector<MomentSums> partial(nb);

#pragma omp parallel num_threads(threads)
  {
    std::vector<double> u(problem.dim), r(outputs);
    std::vector<std::complex<double>> values(problem.polys.size());
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
      MomentSums& m = partial[b];
      m.sum.assign(outputs, 0.0);
      m.cross.assign(outputs * outputs, 0.0);
      const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBatch, hi = std::min(samples, lo + kBatch);
      for (std::uint64_t s = lo; s < hi; ++s) {
        detail::fill_sample(seed, s, u);
        detail::evaluate_torus(problem, u, values);
        g(values, r);
        for (std::size_t i = 0; i < outputs; ++i) {
          m.sum[i] += r[i];
          for (std::size_t j = 0; j < outputs; ++j) m.cross[i * outputs + j] += r[i] * r[j];
        }
      }
      m.n = hi - lo;
    }
  }

  MomentSums out{samples, std::vector<double>(outputs), std::vector<double>(outputs * outputs)};
  for (const auto& m : partial) {
    for (std::size_t i = 0; i < outputs; ++i) out.sum[i] += m.sum[i];
    for (std::size_t i = 0; i < out.cross.size(); ++i) out.cross[i] += m.cross[i];
  }
  return out;
}

GridSums torus_grid(const TorusProblem& problem, const Functional& g, std::size_t outputs,
                    std::span<const std::uint32_t> grid_sizes, int threads) {
  detail::check_grid(problem, grid_sizes);
  const std::size_t d = grid_sizes.size();
  std::uint64_t nodes = 1, table = 1;
  for (auto n : grid_sizes) {
    nodes *= n;
    table = std::max<std::uint64_t>(table, n);
  }
  const std::uint64_t mask = table - 1;

  // Roots of unity of order `table`; every grid size divides it.
  std::vector<std::complex<double>> roots(table);
  for (std::uint64_t j = 0; j < table; ++j)
    roots[j] = std::polar(1.0, detail::kTwoPi * static_cast<double>(j) / static_cast<double>(table));

  // Per-term, per-dimension phase increment in table units.
  struct Compiled {
    std::vector<std::uint64_t> step;  // dims per term, flattened
  };
  std::vector<Compiled> compiled(problem.polys.size());
  for (std::size_t p = 0; p < problem.polys.size(); ++p) {
    const TorusPoly& poly = problem.polys[p];
    compiled[p].step.assign(poly.size() * d, 0);
    for (std::size_t t = 0; t < poly.size(); ++t)
      for (std::uint32_t q = poly.offsets[t]; q < poly.offsets[t + 1]; ++q) {
        const std::uint32_t dim = poly.dims[q];
        const auto n = static_cast<std::int64_t>(grid_sizes[dim]);
        const std::int64_t e = ((poly.exps[q] % n) + n) % n;
        compiled[p].step[t * d + dim] = static_cast<std::uint64_t>(e) * (table / grid_sizes[dim]) & mask;
      }
  }

  const std::uint64_t nchunks = (nodes + kGridChunk - 1) / kGridChunk;
  std::vector<GridSums> partial(nchunks);

#pragma omp parallel num_threads(threads)
  {
    std::vector<std::uint32_t> k(d);
    std::vector<std::complex<double>> values(problem.polys.size());
    std::vector<double> r(outputs);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
      GridSums& m = partial[c];
      m.sum.assign(outputs, 0.0);
      m.half_sum.assign(outputs, 0.0);
      m.max.assign(outputs, -std::numeric_limits<double>::infinity());
      m.min.assign(outputs, std::numeric_limits<double>::infinity());
      const std::uint64_t lo = static_cast<std::uint64_t>(c) * kGridChunk, hi = std::min(nodes, lo + kGridChunk);
      std::uint64_t rest = lo;
      for (std::size_t i = d; i-- > 0;) {
        k[i] = static_cast<std::uint32_t>(rest % grid_sizes[i]);
        rest /= grid_sizes[i];
      }
      for (std::uint64_t node = lo; node < hi; ++node) {
        bool even = true;
        for (std::size_t i = 0; i < d; ++i) even = even && (k[i] % 2 == 0);
        for (std::size_t p = 0; p < problem.polys.size(); ++p) {
          const TorusPoly& poly = problem.polys[p];
          const std::uint64_t* step = compiled[p].step.data();
          std::complex<double> acc{0.0, 0.0};
          for (std::size_t t = 0; t < poly.size(); ++t) {
            std::uint64_t idx = 0;
            for (std::size_t i = 0; i < d; ++i) idx += step[t * d + i] * k[i];
            acc += poly.coeffs[t] * roots[idx & mask];
          }
          values[p] = acc;
        }
        g(values, r);
        for (std::size_t i = 0; i < outputs; ++i) {
          m.sum[i] += r[i];
          if (even) m.half_sum[i] += r[i];
          m.max[i] = std::max(m.max[i], r[i]);
          m.min[i] = std::min(m.min[i], r[i]);
        }
        for (std::size_t i = d; i-- > 0;) {
          if (++k[i] < grid_sizes[i]) break;
          k[i] = 0;
        }
      }
    }
  }

  GridSums out;
  out.nodes = nodes;
  out.sum.assign(outputs, 0.0);
  out.half_sum.assign(outputs, 0.0);
  out.max.assign(outputs, -std::numeric_limits<double>::infinity());
  out.min.assign(outputs, std::numeric_limits<double>::infinity());
  for (const auto& m : partial)
    for (std::size_t i = 0; i < outputs; ++i) {
      out.sum[i] += m.sum[i];
      out.half_sum[i] += m.half_sum[i];
      out.max[i] = std::max(out.max[i], m.max[i]);
      out.min[i] = std::min(out.min[i], m.min[i]);
    }
  return out;
}

std::vector<std::complex<double>> real_line_segments(const RealLineTask& task, const PointFunctional& h,
                                                     int threads) {
  constexpr std::size_t kPanelsPerChunk = 64;
  const std::size_t nseg = task.breakpoints.size() - 1;

  struct Chunk {
    std::size_t segment, first, last, panels;
  };
  std::vector<Chunk> chunks;
  for (std::size_t s = 0; s < nseg; ++s) {
    const std::size_t panels = panels_for_segment(task, s);
    for (std::size_t p = 0; p < panels; p += kPanelsPerChunk)
      chunks.push_back({s, p, std::min(panels, p + kPanelsPerChunk), panels});
  }

  std::vector<std::complex<double>> partial(chunks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks.size()); ++c) {
    const Chunk& ch = chunks[c];
    const double a = task.breakpoints[ch.segment], b = task.breakpoints[ch.segment + 1];
    const double width = (b - a) / static_cast<double>(ch.panels);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t p = ch.first; p < ch.last; ++p) {
      const double lo = a + width * static_cast<double>(p);
      const double hi = (p + 1 == ch.panels) ? b : lo + width;
      acc += detail::panel_integral(task, h, lo, hi);
    }
    partial[c] = acc;
  }

  std::vector<std::complex<double>> out(nseg);
  for (std::size_t c = 0; c < chunks.size(); ++c) out[chunks[c].segment] += partial[c];
  return out;
}

}  // namespace bohrkit::kernels::omp
