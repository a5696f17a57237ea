#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "bohrkit/errors.hpp"
#include "bohrkit/freqspace.hpp"
#include "json.hpp"

namespace bohrkit {

// Complex number with exact rational parts.
struct ExactComplex {
  Rational re{0};
  Rational im{0};

  ExactComplex() = default;
  ExactComplex(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {  // NOLINT
    re.canonicalize();
    im.canonicalize();
  }
  ExactComplex(int r) : re(r) {}                                                     // NOLINT

  ExactComplex& operator+=(const ExactComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
  friend ExactComplex operator-(const ExactComplex& a, const ExactComplex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const ExactComplex& a, const ExactComplex& b) { return a.re == b.re && a.im == b.im; }
};

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<std::complex<double>> {
  using Real = double;
  static constexpr bool exact = false;
  static std::complex<double> zero() { return {0.0, 0.0}; }
  static std::complex<double> one() { return {1.0, 0.0}; }
  static std::complex<double> from_real(double r) { return {r, 0.0}; }
  static std::complex<double> conj(const std::complex<double>& c) { return std::conj(c); }
  static double norm(const std::complex<double>& c) { return std::norm(c); }
  static double magnitude(const std::complex<double>& c) { return std::abs(c); }
  static double real(const std::complex<double>& c) { return c.real(); }
  static bool is_zero(const std::complex<double>& c) { return c == std::complex<double>(0.0, 0.0); }
  static double to_double(double r) { return r; }
};

template <>
struct CoeffTraits<ExactComplex> {
  using Real = Rational;
  static constexpr bool exact = true;
  static ExactComplex zero() { return {}; }
  static ExactComplex one() { return {Rational(1)}; }
  static ExactComplex from_real(const Rational& r) { return {r}; }
  static ExactComplex conj(const ExactComplex& c) { return {c.re, -c.im}; }
  static Rational norm(const ExactComplex& c) { return c.re * c.re + c.im * c.im; }
  static double magnitude(const ExactComplex& c) { return std::hypot(c.re.get_d(), c.im.get_d()); }
  static Rational real(const ExactComplex& c) { return c.re; }
  static bool is_zero(const ExactComplex& c) { return sgn(c.re) == 0 && sgn(c.im) == 0; }
  static double to_double(const Rational& r) { return r.get_d(); }
};

// Relative magnitude below which floating coefficients are treated as
// roundoff and pruned. Exact coefficients are pruned only when zero.
inline constexpr double kPruneRelative = 1e-15;

// Finite sum of coefficient * exp(i * freq * t), kept in canonical sparse form:
// no zero coefficients, terms ordered by frequency.
template <class C>
class Poly {
 public:
  using Coeff = C;
  using Traits = CoeffTraits<C>;
  using Real = typename Traits::Real;
  using Terms = std::map<Frequency, C>;

  Poly() = default;
  explicit Poly(BasisPtr basis) : basis_(std::move(basis)) {}

  static Poly constant(BasisPtr basis, const C& c) {
    Poly p(basis);
    p.add_term(Frequency(basis), c);
    return p;
  }
  static Poly monomial(const Frequency& f, const C& c = Traits::one()) {
    Poly p(f.basis());
    p.add_term(f, c);
    return p;
  }

  const BasisPtr& basis() const { return basis_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  C coeff(const Frequency& f) const {
    auto it = terms_.find(f);
    return it == terms_.end() ? Traits::zero() : it->second;
  }

  // Accumulates c at f. Exact zeros are removed immediately; floating
  // roundoff is removed by prune().
  void add_term(const Frequency& f, const C& c) {
    if (!basis_) basis_ = f.basis();
    require_same_basis(basis_, f.basis());
    auto [it, inserted] = terms_.try_emplace(f, c);
    if (!inserted) it->second += c;
    if (Traits::is_zero(it->second)) terms_.erase(it);
  }

  void prune() {
    if constexpr (!Traits::exact) {
      double max_mag = 0.0;
      for (const auto& [f, c] : terms_) max_mag = std::max(max_mag, Traits::magnitude(c));
      const double cut = kPruneRelative * max_mag;
      std::erase_if(terms_, [cut](const auto& kv) { return Traits::magnitude(kv.second) < cut; });
    }
  }

  Poly scaled(const C& factor) const {
    Poly out(basis_);
    for (const auto& [f, c] : terms_) out.add_term(f, c * factor);
    return out;
  }

  std::vector<Frequency> support() const {
    std::vector<Frequency> out;
    out.reserve(terms_.size());
    for (const auto& kv : terms_) out.push_back(kv.first);
    return out;
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

 private:
  BasisPtr basis_;
  Terms terms_;
};

using APPoly = Poly<std::complex<double>>;
using ExactPoly = Poly<ExactComplex>;

namespace detail {
template <class C>
void require_compatible(const Poly<C>& a, const Poly<C>& b) {
  if (a.basis() && b.basis()) require_same_basis(a.basis(), b.basis());
}
template <class C>
BasisPtr common_basis(const Poly<C>& a, const Poly<C>& b) {
  return a.basis() ? a.basis() : b.basis();
}
}  // namespace detail

template <class C>
Poly<C> poly_add(const Poly<C>& a, const Poly<C>& b) {
  detail::require_compatible(a, b);
  Poly<C> out = a;
  for (const auto& [f, c] : b.terms()) out.add_term(f, c);
  out.prune();
  return out;
}

template <class C>
Poly<C> poly_sub(const Poly<C>& a, const Poly<C>& b) {
  detail::require_compatible(a, b);
  Poly<C> out = a;
  const C minus_one = C(-1);
  for (const auto& [f, c] : b.terms()) out.add_term(f, c * minus_one);
  out.prune();
  return out;
}

// Reference convolution: one accumulator, pairs visited in term order.
template <class C>
Poly<C> poly_mul_serial(const Poly<C>& a, const Poly<C>& b) {
  detail::require_compatible(a, b);
  Poly<C> out(detail::common_basis(a, b));
  for (const auto& [fa, ca] : a.terms())
    for (const auto& [fb, cb] : b.terms()) out.add_term(fa + fb, ca * cb);
  out.prune();
  return out;
}

// Terms of the left factor handled per convolution block. Blocks are fixed by
// term order, never by thread count, so the merged result is identical for
// any schedule.
inline constexpr std::size_t kConvolutionBlock = 128;

template <class C>
Poly<C> poly_mul(const Poly<C>& a, const Poly<C>& b, int threads = 1) {
  detail::require_compatible(a, b);
  if (a.size() <= kConvolutionBlock) return poly_mul_serial(a, b);

  using Entry = typename Poly<C>::Terms::value_type;
  std::vector<const Entry*> left;
  left.reserve(a.size());
  for (const auto& kv : a.terms()) left.push_back(&kv);
  const std::size_t nblocks = (left.size() + kConvolutionBlock - 1) / kConvolutionBlock;
  std::vector<Poly<C>> partial(nblocks, Poly<C>(detail::common_basis(a, b)));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1)
  for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kConvolutionBlock;
    const std::size_t hi = std::min(left.size(), lo + kConvolutionBlock);
    auto& acc = partial[static_cast<std::size_t>(blk)];
    for (std::size_t i = lo; i < hi; ++i)
      for (const auto& [fb, cb] : b.terms()) acc.add_term(left[i]->first + fb, left[i]->second * cb);
  }

  Poly<C> out = std::move(partial.front());
  for (std::size_t k = 1; k < nblocks; ++k)
    for (const auto& [f, c] : partial[k].terms()) out.add_term(f, c);
  out.prune();
  return out;
}

template <class C>
Poly<C> poly_conj(const Poly<C>& p) {
  Poly<C> out(p.basis());
  for (const auto& [f, c] : p.terms()) out.add_term(-f, Poly<C>::Traits::conj(c));
  return out;
}

// |P|^2 as a polynomial: P * conj(P).
template <class C>
Poly<C> abs2(const Poly<C>& p, int threads = 1) {
  return poly_mul(p, poly_conj(p), threads);
}

// Haar mean: the coefficient at the zero frequency.
template <class C>
C mean(const Poly<C>& p) {
  if (p.empty()) return Poly<C>::Traits::zero();
  return p.coeff(Frequency(p.basis()));
}

template <class C>
C fourier_coeff(const Poly<C>& p, const Frequency& lambda) {
  if (p.basis()) require_same_basis(p.basis(), lambda.basis());
  return p.coeff(lambda);
}

template <class Real>
struct L2Norm {
  double value = 0.0;
  Real squared{};
};

// Parseval: the squared norm is the sum of squared coefficient moduli.
template <class C>
L2Norm<typename Poly<C>::Real> l2_norm(const Poly<C>& p) {
  using Traits = typename Poly<C>::Traits;
  typename Poly<C>::Real sq{};
  for (const auto& kv : p.terms()) sq += Traits::norm(kv.second);
  return {std::sqrt(Traits::to_double(sq)), sq};
}

// max |real_value(xi)| over the support.
template <class C>
double degree(const Poly<C>& p) {
  if (p.empty()) throw ValidationError("degree of the zero polynomial is undefined");
  double d = 0.0;
  for (const auto& kv : p.terms()) d = std::max(d, std::abs(kv.first.real_value()));
  return d;
}

// Exact coefficients converted to complex doubles.
APPoly to_floating(const ExactPoly& p);

std::string coeff_to_string(const std::complex<double>& c);
std::string coeff_to_string(const ExactComplex& c);

// Text form: "c * exp(i*(<frequency>)*t) + ...", or "0".
template <class C>
std::string to_string(const Poly<C>& p) {
  if (p.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [f, c] : p.terms()) {
    if (!first) out += " + ";
    first = false;
    out += coeff_to_string(c);
    out += " * exp(i*(";
    out += f.to_string();
    out += ")*t)";
  }
  return out;
}

nlohmann::json to_json(const APPoly& p);
nlohmann::json to_json(const ExactPoly& p);
APPoly appoly_from_json(const BasisPtr& basis, const nlohmann::json& j);
ExactPoly exact_poly_from_json(const BasisPtr& basis, const nlohmann::json& j);

}  // namespace bohrkit
