#include "bohrkit/bohrint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace bohrkit {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::automatic: return "automatic";
    case Method::tensor_quadrature: return "tensor-quadrature";
    case Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

nlohmann::json to_json(const IntegralEstimate& e) {
  nlohmann::json j{{"value", e.value},
                   {"std_error", e.std_error},
                   {"method", method_name(e.method)},
                   {"n", e.nodes_or_samples},
                   {"seed", e.seed},
                   {"torus_dim", e.torus_dim}};
  if (e.method == Method::tensor_quadrature) j["refinement_delta"] = e.refinement_delta;
  return j;
}

IntegralEstimate MultiEstimate::component(std::size_t i) const {
  IntegralEstimate e;
  e.value = values.at(i);
  e.std_error = std::sqrt(std::max(0.0, covariance[i * size() + i]));
  e.method = method;
  e.nodes_or_samples = nodes_or_samples;
  e.seed = method == Method::monte_carlo ? seed : 0;
  e.torus_dim = torus_dim;
  e.refinement_delta = refinement_delta.empty() ? 0.0 : refinement_delta[i];
  return e;
}

double MultiEstimate::linear_error(std::span<const double> w) const {
  if (w.size() != size()) throw ValidationError("weight vector has the wrong length");
  double var = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) var += w[i] * w[j] * covariance[i * size() + j];
  return std::sqrt(std::max(0.0, var));
}

kernels::TorusProblem compile_torus(std::span<const APPoly> polys) {
  BasisPtr basis;
  std::map<Frequency, std::size_t> index;
  std::vector<Frequency> freqs;
  for (const auto& p : polys) {
    if (p.basis()) {
      if (basis) require_same_basis(basis, p.basis());
      else basis = p.basis();
    }
    for (const auto& [f, c] : p.terms()) {
      if (f.is_zero() || index.contains(f)) continue;
      index.emplace(f, freqs.size());
      freqs.push_back(f);
    }
  }

  const TorusReduction red = freqs.empty() ? TorusReduction{} : torus_reduce(freqs);
  kernels::TorusProblem problem;
  problem.dim = red.dim;
  std::vector<std::pair<std::uint32_t, std::int64_t>> exponent;
  for (const auto& p : polys) {
    kernels::TorusPoly tp;
    for (const auto& [f, c] : p.terms()) {
      exponent.clear();
      if (!f.is_zero()) {
        const std::size_t row = index.at(f);
        for (std::size_t j = 0; j < red.dim; ++j) {
          const BigInt& e = red.exponents(row, j);
          if (e == 0) continue;
          if (!e.fits_slong_p()) throw BudgetError("torus exponent does not fit in 64 bits");
          exponent.emplace_back(static_cast<std::uint32_t>(j), e.get_si());
        }
      }
      tp.add_term(c, exponent);
    }
    problem.polys.push_back(std::move(tp));
  }
  return problem;
}

namespace {

int resolve_threads(int threads) { return threads > 0 ? threads : kernels::default_threads(); }

// Per-dimension grid sizes; `total` saturates at 2^62 on overflow.
std::vector<std::uint32_t> grid_sizes(const kernels::TorusProblem& problem, std::uint32_t min_nodes,
                                      std::uint64_t& total) {
  std::vector<std::int64_t> maxe(problem.dim, 0);
  for (const auto& p : problem.polys)
    for (std::size_t q = 0; q < p.dims.size(); ++q)
      maxe[p.dims[q]] = std::max(maxe[p.dims[q]], std::abs(p.exps[q]));
  std::vector<std::uint32_t> sizes(problem.dim);
  total = 1;
  for (std::size_t i = 0; i < problem.dim; ++i) {
    std::uint64_t n = std::max<std::uint32_t>(min_nodes, 1);
    n = std::bit_ceil(n);
    while (n <= static_cast<std::uint64_t>(2 * maxe[i]) && n < (std::uint64_t{1} << 31)) n *= 2;
    sizes[i] = static_cast<std::uint32_t>(n);
    total = (total > (std::uint64_t{1} << 62) / n) ? std::uint64_t{1} << 62 : total * n;
  }
  return sizes;
}

void require_finite(const MultiEstimate& e) {
  for (double v : e.values)
    if (!std::isfinite(v)) throw ValidationError("integrand produced non-finite values");
}

}  // namespace

MultiEstimate integrate_on_torus(const kernels::TorusProblem& problem, const Functional& g, std::size_t outputs,
                                 const Budget& budget) {
  const int threads = resolve_threads(budget.threads);
  std::uint64_t total = 1;
  const auto sizes = grid_sizes(problem, budget.min_nodes, total);

  Method method = budget.method;
  if (method == Method::automatic)
    method = (problem.dim <= kMaxTensorDim && total <= budget.max_nodes) ? Method::tensor_quadrature
                                                                          : Method::monte_carlo;
  if (method == Method::tensor_quadrature) {
    if (problem.dim > kMaxTensorDim)
      throw BudgetError("tensor quadrature needs torus dimension <= 4, got " + std::to_string(problem.dim));
    if (total > budget.max_nodes)
      throw BudgetError("tensor grid of " + std::to_string(total) + " nodes exceeds the node budget");
  }

  MultiEstimate out;
  out.method = method;
  out.torus_dim = problem.dim;
  out.covariance.assign(outputs * outputs, 0.0);
  out.values.assign(outputs, 0.0);

  if (method == Method::tensor_quadrature) {
    const kernels::GridSums s = kernels::omp::torus_grid(problem, g, outputs, sizes, threads);
    const double half_nodes = static_cast<double>(s.nodes >> problem.dim);
    out.nodes_or_samples = s.nodes;
    out.refinement_delta.resize(outputs);
    for (std::size_t i = 0; i < outputs; ++i) {
      out.values[i] = s.sum[i] / static_cast<double>(s.nodes);
      out.refinement_delta[i] = std::abs(out.values[i] - s.half_sum[i] / half_nodes);
    }
  } else {
    if (budget.samples < 2) throw ValidationError("Monte Carlo needs at least 2 samples");
    const kernels::MomentSums s =
        kernels::omp::torus_monte_carlo(problem, g, outputs, budget.samples, budget.seed, threads);
    const double n = static_cast<double>(s.n);
    out.nodes_or_samples = s.n;
    out.seed = budget.seed;
    for (std::size_t i = 0; i < outputs; ++i) out.values[i] = s.sum[i] / n;
    for (std::size_t i = 0; i < outputs; ++i)
      for (std::size_t j = 0; j < outputs; ++j) {
        const double c = (s.cross[i * outputs + j] / n - out.values[i] * out.values[j]) * n / (n - 1.0);
        out.covariance[i * outputs + j] = c / n;
      }
  }
  require_finite(out);
  return out;
}

MultiEstimate bohr_integrals(const Functional& g, std::size_t outputs, std::span<const APPoly> polys,
                             const Budget& budget) {
  return integrate_on_torus(compile_torus(polys), g, outputs, budget);
}

IntegralEstimate bohr_integral(const ScalarFunctional& g, std::span<const APPoly> polys, const Budget& budget) {
  const Functional wrapped = [&g](std::span<const std::complex<double>> v, std::span<double> out) {
    out[0] = g(v);
  };
  return bohr_integrals(wrapped, 1, polys, budget).component(0);
}

IntegralEstimate mean_abs(const APPoly& p, const Budget& budget) {
  return bohr_integral([](std::span<const std::complex<double>> v) { return std::abs(v[0]); },
                       std::span<const APPoly>(&p, 1), budget);
}

std::complex<double> RealLinePoly::operator()(double t) const {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < freqs.size(); ++k) acc += coeffs[k] * std::polar(1.0, freqs[k] * t);
  return acc;
}

std::complex<double> RealLinePoly::mean() const {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < freqs.size(); ++k)
    if (freqs[k] == 0.0) acc += coeffs[k];
  return acc;
}

double RealLinePoly::max_abs_freq() const {
  double m = 0.0;
  for (double w : freqs) m = std::max(m, std::abs(w));
  return m;
}

RealLinePoly to_real_line(const APPoly& p) {
  RealLinePoly out;
  for (const auto& [f, c] : p.terms()) {
    out.freqs.push_back(f.real_value());
    out.coeffs.push_back(c);
  }
  return out;
}

std::vector<std::complex<double>> real_line_mean_profile(const RealLinePoly& p, std::span<const double> Ts,
                                                         const Resolution& res) {
  if (Ts.empty()) return {};
  std::vector<double> breaks{0.0};
  for (double T : Ts) {
    if (!(T > breaks.back())) throw ValidationError("mean horizons must be positive and strictly increasing");
    breaks.push_back(T);
  }
  // P(t) + P(-t) integrated over [0, T].
  RealLinePoly sym;
  for (std::size_t k = 0; k < p.size(); ++k) {
    sym.freqs.push_back(p.freqs[k]);
    sym.coeffs.push_back(p.coeffs[k]);
    sym.freqs.push_back(-p.freqs[k]);
    sym.coeffs.push_back(p.coeffs[k]);
  }
  kernels::RealLineTask task{sym.freqs, sym.coeffs, breaks, res.max_phase_per_panel, 1};
  const auto seg = kernels::omp::real_line_segments(task, [](std::complex<double> z) { return z; },
                                                    resolve_threads(res.threads));
  std::vector<std::complex<double>> out;
  std::complex<double> cum{0.0, 0.0};
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    cum += seg[i];
    out.push_back(cum / (2.0 * Ts[i]));
  }
  return out;
}

std::complex<double> real_line_mean(const RealLinePoly& p, double T, const Resolution& res) {
  if (!(T > 0.0)) throw ValidationError("real_line_mean needs T > 0");
  return real_line_mean_profile(p, std::span<const double>(&T, 1), res).front();
}

std::complex<double> real_line_mean(const APPoly& p, double T, const Resolution& res) {
  return real_line_mean(to_real_line(p), T, res);
}

IntervalEstimate interval_l1_distortion(const RealLinePoly& p, double a, double b, const Resolution& res) {
  if (!(a < b)) throw ValidationError("interval_l1_distortion needs a < b");
  const double breaks[2] = {a, b};
  const auto h = [](std::complex<double> z) { return std::complex<double>(std::abs(std::norm(z) - 1.0), 0.0); };
  const int threads = resolve_threads(res.threads);

  kernels::RealLineTask task{p.freqs, p.coeffs, breaks, res.max_phase_per_panel, 1};
  std::size_t panels = kernels::panels_for_segment(task, 0);
  IntervalEstimate out;
  double prev = 0.0;
  for (int it = 0; it <= res.max_doublings; ++it) {
    task.min_panels_per_segment = panels;
    task.max_phase_per_panel = 1e300;  // panel count fixed by min_panels_per_segment
    const double v = kernels::omp::real_line_segments(task, h, threads)[0].real() / (b - a);
    out.value = v;
    out.nodes = panels * kernels::kGaussPoints;
    if (it > 0) {
      out.refinement_delta = std::abs(v - prev);
      if (out.refinement_delta <= res.tolerance) break;
    }
    prev = v;
    panels *= 2;
  }
  return out;
}

IntervalEstimate interval_l1_distortion(const APPoly& p, double a, double b, const Resolution& res) {
  return interval_l1_distortion(to_real_line(p), a, b, res);
}

}  // namespace bohrkit
