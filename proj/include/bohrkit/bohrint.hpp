#pragma once

// Integrals over the Bohr compactification. A finite set of polynomials only
// sees the closed subgroup generated by its frequencies; after torus reduction
// that subgroup is T^d with independent uniform coordinates, and
//   int g(P_1, ..., P_k) dh = int_{T^d} g(P_1(u), ..., P_k(u)) du.
// The torus integral is done by a tensor trapezoid grid (d <= 4) or by seeded
// Monte Carlo. Real-line Cesaro means and interval integrals live here too.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "bohrkit/appoly.hpp"
#include "bohrkit/kernels.hpp"
#include "json.hpp"

namespace bohrkit {

enum class Method { automatic, tensor_quadrature, monte_carlo };

std::string_view method_name(Method m);

inline constexpr std::size_t kMaxTensorDim = 4;

struct Budget {
  Method method = Method::automatic;
  std::uint64_t samples = std::uint64_t{1} << 16;  // Monte Carlo sample count
  std::uint32_t min_nodes = 64;                    // per-dimension grid floor
  std::uint64_t max_nodes = std::uint64_t{1} << 22;  // total tensor nodes
  std::uint64_t seed = 0;
  int threads = 0;  // <= 0: kernels::default_threads()
};

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo only
  Method method = Method::tensor_quadrature;
  std::uint64_t nodes_or_samples = 1;
  std::uint64_t seed = 0;
  std::size_t torus_dim = 0;
  double refinement_delta = 0.0;  // quadrature only: |full grid - half grid|
};

nlohmann::json to_json(const IntegralEstimate& e);

// Several functionals integrated on the same nodes or samples.
struct MultiEstimate {
  std::vector<double> values;
  // Covariance matrix of the estimated means (row-major); zero for quadrature.
  std::vector<double> covariance;
  std::vector<double> refinement_delta;
  Method method = Method::tensor_quadrature;
  std::uint64_t nodes_or_samples = 1;
  std::uint64_t seed = 0;
  std::size_t torus_dim = 0;

  std::size_t size() const { return values.size(); }
  IntegralEstimate component(std::size_t i) const;
  // Standard error of sum_i w[i] * values[i].
  double linear_error(std::span<const double> w) const;
};

using Functional = kernels::Functional;
using ScalarFunctional = std::function<double(std::span<const std::complex<double>>)>;

// Torus form of a polynomial list over one shared reduced basis.
kernels::TorusProblem compile_torus(std::span<const APPoly> polys);

MultiEstimate integrate_on_torus(const kernels::TorusProblem& problem, const Functional& g, std::size_t outputs,
                                 const Budget& budget);

MultiEstimate bohr_integrals(const Functional& g, std::size_t outputs, std::span<const APPoly> polys,
                             const Budget& budget);

IntegralEstimate bohr_integral(const ScalarFunctional& g, std::span<const APPoly> polys, const Budget& budget);

// int |P| dh.
IntegralEstimate mean_abs(const APPoly& p, const Budget& budget);

// Polynomial with floating frequencies, for evaluation on the real line.
struct RealLinePoly {
  std::vector<double> freqs;
  std::vector<std::complex<double>> coeffs;

  std::size_t size() const { return freqs.size(); }
  std::complex<double> operator()(double t) const;
  // Coefficient at frequency exactly 0.
  std::complex<double> mean() const;
  double max_abs_freq() const;
};

RealLinePoly to_real_line(const APPoly& p);

struct Resolution {
  double max_phase_per_panel = 1.0;  // Gauss-Legendre panel width times max |freq|
  double tolerance = 1e-8;           // adaptive refinement stops below this change
  int max_doublings = 10;
  int threads = 0;
};

// (1/2T) int_{-T}^{T} P(t) dt.
std::complex<double> real_line_mean(const RealLinePoly& p, double T, const Resolution& res = {});
std::complex<double> real_line_mean(const APPoly& p, double T, const Resolution& res = {});

// The same mean for every T in `Ts` (strictly increasing, positive) from one
// pass over [0, max T].
std::vector<std::complex<double>> real_line_mean_profile(const RealLinePoly& p, std::span<const double> Ts,
                                                         const Resolution& res = {});

struct IntervalEstimate {
  double value = 0.0;
  double refinement_delta = 0.0;
  std::uint64_t nodes = 0;
};

// (1/(b-a)) int_a^b | |P(x)|^2 - 1 | dx, refined by panel doubling.
IntervalEstimate interval_l1_distortion(const RealLinePoly& p, double a, double b, const Resolution& res = {});
IntervalEstimate interval_l1_distortion(const APPoly& p, double a, double b, const Resolution& res = {});

}  // namespace bohrkit
