#pragma once

// Rank-one flow parameters and generalized Riesz products.
//
//   h_0 = 1,  h_{k+1} = p_k h_k + sum_{l=0}^{p_k} s_{k,l}
//   P_k(t) = p_k^{-1/2} sum_{j<p_k} exp(i (j h_k + s_{k,0} + ... + s_{k,j-1}) t)
//   Q_n = |P_0 ... P_n|^2
//
// Stage polynomials have irrational coefficients 1/sqrt(p), so exact work is
// done on the unnormalized product (all coefficients 1) together with the
// rational scale 1/prod p, which is all |.|^2 needs.

#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bohrkit/appoly.hpp"
#include "json.hpp"

namespace bohrkit {

struct Stage {
  std::uint32_t p = 0;
  std::vector<Frequency> spacers;  // s_{k,0} .. s_{k,p}
};

struct RankOneParams {
  BasisPtr basis;
  std::vector<Stage> stages;

  std::size_t size() const { return stages.size(); }
  // Throws ValidationError naming the offending field.
  void validate() const;
};

// h_k for 0 <= k <= size().
Frequency heights(const RankOneParams& params, std::size_t k);
// h_0 .. h_{size()}.
std::vector<Frequency> all_heights(const RankOneParams& params);

// sum_{j=min(p,q)}^{max(p,q)-1} s_{n,j}, for 0 <= p, q < p_n.
Frequency spacer_sum(const RankOneParams& params, std::size_t n, std::size_t p, std::size_t q);

// Frequencies j h_k + s_{k,0} + ... + s_{k,j-1}, j < p_k. Throws
// InvariantViolation if two coincide.
std::vector<Frequency> stage_frequencies(const RankOneParams& params, std::size_t k);

// P_k with coefficients 1/sqrt(p_k).
APPoly build_polynomial(const RankOneParams& params, std::size_t k);

// sqrt(p_k) * P_k: the same support with all coefficients 1.
template <class C>
Poly<C> build_unnormalized(const RankOneParams& params, std::size_t k) {
  Poly<C> out(params.basis);
  for (const auto& f : stage_frequencies(params, k)) out.add_term(f, CoeffTraits<C>::one());
  return out;
}

template <class C>
typename CoeffTraits<C>::Real inverse_cut(std::uint32_t p) {
  using Real = typename CoeffTraits<C>::Real;
  return Real(1) / Real(p);
}

// |P_k|^2, computed as (1/p_k) |sqrt(p_k) P_k|^2.
template <class C>
Poly<C> stage_abs2(const RankOneParams& params, std::size_t k, int threads = 1) {
  const auto u = build_unnormalized<C>(params, k);
  return abs2(u, threads).scaled(CoeffTraits<C>::from_real(inverse_cut<C>(params.stages[k].p)));
}

// Delta_k = (1/p_k) sum_{a != b} exp(i (f_a - f_b) t), so |P_k|^2 = 1 + Delta_k.
template <class C>
Poly<C> delta(const RankOneParams& params, std::size_t k) {
  const auto fs = stage_frequencies(params, k);
  const C w = CoeffTraits<C>::from_real(inverse_cut<C>(params.stages[k].p));
  Poly<C> out(params.basis);
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (std::size_t b = 0; b < fs.size(); ++b)
      if (a != b) out.add_term(fs[a] - fs[b], w);
  return out;
}

inline constexpr std::size_t kDefaultSupportCap = 1'000'000;

// Partial Riesz product after absorbing stages 0 .. n-1.
template <class C>
struct RieszState {
  using Traits = CoeffTraits<C>;
  using Real = typename Traits::Real;

  std::size_t n = 0;
  Poly<C> r_unnorm;  // prod_k sqrt(p_k) P_k
  Real scale{1};     // 1 / prod_k p_k
  Poly<C> q;         // |R_n|^2 = scale * |r_unnorm|^2
  std::map<Frequency, Real> sigma_hat;

  static RieszState initial(const BasisPtr& basis) {
    RieszState s;
    s.r_unnorm = Poly<C>::constant(basis, Traits::one());
    s.q = s.r_unnorm;
    s.sigma_hat.emplace(Frequency(basis), Real(1));
    return s;
  }

  // Absorbs stage k, which must equal n. Refuses (BudgetError) when the
  // product support could exceed `cap` terms.
  RieszState extend(const RankOneParams& params, std::size_t k, std::size_t cap = kDefaultSupportCap,
                    int threads = 1) const {
    if (k != n) throw ValidationError("extend expects stage " + std::to_string(n) + ", got " + std::to_string(k));
    if (k >= params.size()) throw ValidationError("stage index out of range");
    const std::uint32_t p = params.stages[k].p;
    if (r_unnorm.size() > cap / p)
      throw BudgetError("Riesz product support would exceed the cap of " + std::to_string(cap) + " terms");
    RieszState next;
    next.n = n + 1;
    next.r_unnorm = poly_mul(r_unnorm, build_unnormalized<C>(params, k), threads);
    next.scale = scale * inverse_cut<C>(p);
    next.q = abs2(next.r_unnorm, threads).scaled(Traits::from_real(next.scale));
    for (const auto& [f, c] : next.q.terms()) next.sigma_hat.emplace(f, Traits::real(c));
    return next;
  }

  // R_n with its true coefficients; floating instantiation only.
  Poly<C> normalized() const
    requires(!Traits::exact)
  {
    return r_unnorm.scaled(Traits::from_real(std::sqrt(scale)));
  }

  struct Query {
    Real value{0};
    bool on_support = false;  // false: value is sigma_hat_n = 0, not the limit
  };
  Query query(const Frequency& lambda) const {
    auto it = sigma_hat.find(lambda);
    if (it == sigma_hat.end()) return {Real(0), false};
    return {it->second, true};
  }
};

// Frequencies of supp(old.q) whose coefficient decreased in `next`.
template <class C>
std::vector<Frequency> monotonicity_violations(const RieszState<C>& old, const RieszState<C>& next) {
  std::vector<Frequency> out;
  for (const auto& [f, v] : old.sigma_hat)
    if (next.query(f).value < v) out.push_back(f);
  return out;
}

// Exact mean of |prod_j P_{n_j}|^2 for strictly increasing indices.
Rational riesz_property_check(const RankOneParams& params, std::span<const std::size_t> indices);

struct DegreeReport {
  std::vector<std::size_t> indices;
  std::vector<double> degree;       // d_m from the support of P_m
  std::vector<double> height;       // h_m
  std::vector<double> next_height;  // h_{m+1}
  std::vector<bool> degree_below_next;
  std::vector<bool> height_halving;  // h_m <= h_{m+1} / 2
  double q = 0.0;                    // sum of d_m
  double product_degree = 0.0;       // from the support of prod P_m
  bool q_matches_product = false;
  bool q_below_height = false;       // q < h_{n_k + 1}
  double tolerance = 1e-9;

  bool all_hold() const;
};

DegreeReport degree_report(const RankOneParams& params, std::span<const std::size_t> indices,
                           double tolerance = 1e-9);

// Nonzero frequencies h_m, s_{m,1}, ..., s_{m,p-1} generating P_m are
// rationally independent in the symbol model.
bool stage_independent(const RankOneParams& params, std::size_t m);

// The frequencies of the stages in `group` and of stage m generate
// subgroups meeting only in 0 (rank additivity), so Haar means of products
// of functions of each side factorize.
bool factorization_hypothesis(const RankOneParams& params, std::span<const std::size_t> group, std::size_t m);

// Stages with fresh symbols s{k}_1 .. s{k}_{p_k} as spacers (s_{k,0} = 0);
// symbol values are drawn uniformly from [0.5, 1.5).
RankOneParams make_independent_params(std::span<const std::uint32_t> ps, std::uint64_t seed);

// Config document:
//   {"basis": [{"name": "one", "value": 1}, ...],
//    "stages": [{"p": 2, "spacers": ["0", "a", "2*a"]}, ...]}
// or {"independent_stages": {"p": [4, 4, 4], "seed": 7}}.
BasisPtr basis_from_json(const nlohmann::json& j);
RankOneParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RankOneParams& params);

template <class C>
void write_sigma_hat_csv(std::ostream& os, const RieszState<C>& state) {
  os << "frequency,value\n";
  for (const auto& [f, v] : state.sigma_hat) {
    os << '"' << f.to_string() << "\",";
    if constexpr (CoeffTraits<C>::exact) {
      os << v.get_str() << '\n';
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf << '\n';
    }
  }
}

}  // namespace bohrkit
