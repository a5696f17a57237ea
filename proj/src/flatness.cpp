#include "bohrkit/flatness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include "bohrkit/kernels.hpp"

namespace bohrkit {

namespace {

BasisPtr default_basis() { return SymbolBasis::make({{std::string(kUnitSymbol), 1.0}, {"alpha", std::numbers::sqrt2}}); }

std::uint32_t next_pow2(double x) {
  if (!(x <= double(std::uint32_t{1} << 30))) throw BudgetError("grid size overflow");
  return std::bit_ceil(static_cast<std::uint32_t>(std::max(1.0, std::ceil(x))));
}

std::vector<Frequency> exact_frequencies(const PolyFamilySpec& spec, const BasisPtr& basis, std::size_t n) {
  if (!spec.frequencies.empty()) {
    if (spec.frequencies.size() != n)
      throw ValidationError("frequencies: expected " + std::to_string(n) + " entries, got " +
                            std::to_string(spec.frequencies.size()));
    return spec.frequencies;
  }
  const Frequency step = Frequency::symbol(basis, spec.step_symbol);
  std::vector<Frequency> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(step.scaled(Rational(static_cast<long>(j))));
  return out;
}

}  // namespace

std::string_view family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::littlewood: return "littlewood";
    case FamilyKind::newman: return "newman";
    case FamilyKind::unimodular: return "unimodular";
    case FamilyKind::prikhodko: return "prikhodko";
    case FamilyKind::rank_one: return "rank-one";
  }
  return "?";
}

FamilyKind parse_family_kind(std::string_view s) {
  for (auto k : {FamilyKind::littlewood, FamilyKind::newman, FamilyKind::unimodular, FamilyKind::prikhodko,
                 FamilyKind::rank_one})
    if (family_name(k) == s) return k;
  throw ValidationError("family.kind: unknown family '" + std::string(s) + "'");
}

void PrikhodkoParams::validate() const {
  if (m < 1) throw ValidationError("family.m: must be a positive integer");
  if (n < 1) throw ValidationError("family.n: must be a positive integer");
  if (!(sgn(eps) > 0 && eps < 1)) throw ValidationError("family.eps: must lie in (0, 1), got " + eps.get_str());
}

double PrikhodkoParams::scale() const {
  const double e = eps.get_d();
  return static_cast<double>(m) * static_cast<double>(n) / (e * e);
}

double PrikhodkoParams::frequency(std::uint32_t p) const {
  return scale() * std::exp(eps.get_d() * p / static_cast<double>(n));
}

std::size_t PolyFamilySpec::size() const {
  switch (kind) {
    case FamilyKind::littlewood:
    case FamilyKind::newman: return coefficients.size();
    case FamilyKind::unimodular: return phases.size();
    case FamilyKind::prikhodko: return prikhodko.n;
    case FamilyKind::rank_one: return stage < rank_one.size() ? rank_one.stages[stage].p : 0;
  }
  return 0;
}

std::vector<double> ShiftedRealLinePoly::frequencies() const {
  std::vector<double> out;
  for (double w : poly.freqs) out.push_back(w + offset);
  return out;
}

FamilyPoly build_family(const PolyFamilySpec& spec) {
  if (spec.kind == FamilyKind::rank_one) {
    spec.rank_one.validate();
    if (spec.stage >= spec.rank_one.size()) throw ValidationError("family.stage: out of range");
    return build_polynomial(spec.rank_one, spec.stage);
  }

  if (spec.kind == FamilyKind::prikhodko) {
    const auto& pk = spec.prikhodko;
    pk.validate();
    ShiftedRealLinePoly out;
    out.offset = pk.scale();
    const double c = 1.0 / std::sqrt(static_cast<double>(pk.n));
    const double e = pk.eps.get_d();
    for (std::uint32_t p = 0; p < pk.n; ++p) {
      // omega(p) - omega(0), accurate even when the spacing is tiny.
      const double w = out.offset * std::expm1(e * p / static_cast<double>(pk.n));
      if (p > 0 && !(w > out.poly.freqs.back())) throw ValidationError("prikhodko: duplicate frequencies");
      out.poly.freqs.push_back(w);
      out.poly.coeffs.emplace_back(c, 0.0);
    }
    return out;
  }

  const BasisPtr basis = spec.basis ? spec.basis : default_basis();
  const std::size_t n = spec.size();
  if (n == 0) throw ValidationError("family: needs at least one coefficient");
  const auto freqs = exact_frequencies(spec, basis, n);
  std::set<Frequency> seen;
  for (std::size_t j = 0; j < n; ++j)
    if (!seen.insert(freqs[j]).second)
      throw ValidationError("frequencies[" + std::to_string(j) + "]: duplicate frequency " + freqs[j].to_string());

  APPoly p(basis);
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<double> c;
    switch (spec.kind) {
      case FamilyKind::littlewood:
        if (spec.coefficients[j] != 1 && spec.coefficients[j] != -1)
          throw ValidationError("coefficients[" + std::to_string(j) + "]: littlewood coefficients are +1 or -1");
        c = spec.coefficients[j];
        break;
      case FamilyKind::newman:
        if (spec.coefficients[j] != 0 && spec.coefficients[j] != 1)
          throw ValidationError("coefficients[" + std::to_string(j) + "]: newman coefficients are 0 or 1");
        if (j == 0 && spec.coefficients[0] != 1)
          throw ValidationError("coefficients[0]: newman polynomials have constant term 1");
        c = spec.coefficients[j];
        break;
      default:
        if (!std::isfinite(spec.phases[j])) throw ValidationError("phases[" + std::to_string(j) + "]: not finite");
        c = std::polar(1.0, spec.phases[j]);
    }
    if (c != 0.0) p.add_term(freqs[j], c);
  }
  return p;
}

APPoly independence_model(const ShiftedRealLinePoly& p) {
  std::vector<Symbol> symbols{{std::string(kUnitSymbol), 1.0}};
  const auto freqs = p.frequencies();
  for (std::size_t k = 0; k < freqs.size(); ++k)
    if (freqs[k] != 0.0) symbols.push_back({"w" + std::to_string(k), freqs[k]});
  const auto basis = SymbolBasis::make(std::move(symbols));
  APPoly out(basis);
  for (std::size_t k = 0; k < freqs.size(); ++k)
    out.add_term(freqs[k] != 0.0 ? Frequency::symbol(basis, "w" + std::to_string(k)) : Frequency(basis),
                 p.poly.coeffs[k]);
  return out;
}

IntegralEstimate flatness_ratio(const APPoly& p, const Budget& budget) {
  const double norm = l2_norm(p).value;
  if (norm == 0.0) throw ValidationError("flatness_ratio: zero polynomial");
  IntegralEstimate e = mean_abs(p, budget);
  e.value /= norm;
  e.std_error /= norm;
  e.refinement_delta /= norm;
  return e;
}

namespace {

// `eval(level)` returns (max |P| / ||P||, min |P| / ||P||, nodes) on a grid
// refined by doubling; stops once both extremes move less than the tolerance.
template <class Eval>
UltraflatEstimate refine_deviation(Eval&& eval, std::uint64_t max_nodes) {
  UltraflatEstimate out;
  for (int level = 0;; ++level) {
    auto [hi, lo, nodes] = eval(level);
    if (nodes > max_nodes)
      throw BudgetError("ultraflat_deviation: grid of " + std::to_string(nodes) + " nodes exceeds max_nodes");
    const double prev_upper = out.upper, prev_lower = out.lower;
    out.upper = hi - 1.0;
    out.lower = 1.0 - lo;
    out.value = std::max(out.upper, out.lower);
    out.nodes = nodes;
    if (level > 0) {
      out.refinement_delta = std::max(std::abs(out.upper - prev_upper), std::abs(out.lower - prev_lower));
      if (out.refinement_delta < kUltraflatTolerance) return out;
    }
  }
}

}  // namespace

UltraflatEstimate ultraflat_deviation(const APPoly& p, const Budget& budget) {
  const double norm = l2_norm(p).value;
  if (norm == 0.0) throw ValidationError("ultraflat_deviation: zero polynomial");
  const auto problem = compile_torus(std::span(&p, 1));
  const std::size_t d = problem.dim;
  if (d == 0) return {};  // a single frequency: |P| is constant
  if (d > kMaxTensorDim)
    throw BudgetError("ultraflat_deviation: torus dimension " + std::to_string(d) + " exceeds " +
                      std::to_string(kMaxTensorDim));

  std::int64_t emax = 0;
  for (auto e : problem.polys[0].exps) emax = std::max<std::int64_t>(emax, e < 0 ? -e : e);
  const double per_dim = std::pow(64.0 * static_cast<double>(p.size()), 1.0 / static_cast<double>(d));
  const std::uint32_t n0 = next_pow2(std::max(2.0 * static_cast<double>(emax) + 1.0, per_dim));
  const kernels::Functional g = [](std::span<const std::complex<double>> v, std::span<double> out) {
    out[0] = std::abs(v[0]);
  };
  const int threads = budget.threads > 0 ? budget.threads : kernels::default_threads();

  return refine_deviation(
      [&](int level) {
        const double n = static_cast<double>(n0) * std::ldexp(1.0, level);
        if (std::pow(n, static_cast<double>(d)) > static_cast<double>(budget.max_nodes))
          return std::tuple{0.0, 0.0, std::numeric_limits<std::uint64_t>::max()};
        const std::vector<std::uint32_t> sizes(d, static_cast<std::uint32_t>(n));
        const auto s = kernels::omp::torus_grid(problem, g, 1, sizes, threads);
        return std::tuple{s.max[0] / norm, s.min[0] / norm, s.nodes};
      },
      budget.max_nodes);
}

UltraflatEstimate ultraflat_deviation(const ShiftedRealLinePoly& p, double T, const Budget& budget) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("ultraflat_deviation: T must be positive");
  double sq = 0.0;
  for (auto c : p.poly.coeffs) sq += std::norm(c);
  const double norm = std::sqrt(sq);
  if (norm == 0.0) throw ValidationError("ultraflat_deviation: zero polynomial");
  const std::uint64_t n0 = 64 * p.poly.size();
  const int threads = budget.threads > 0 ? budget.threads : kernels::default_threads();

  return refine_deviation(
      [&](int level) {
        const std::uint64_t n = n0 << level;
        if (n > budget.max_nodes) return std::tuple{0.0, 0.0, n};
        double hi = 0.0, lo = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) num_threads(threads) reduction(max : hi) reduction(min : lo)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
          const double a = std::abs(p.poly(T * static_cast<double>(i) / static_cast<double>(n)));
          hi = std::max(hi, a);
          lo = std::min(lo, a);
        }
        return std::tuple{hi / norm, lo / norm, n};
      },
      budget.max_nodes);
}

FlatnessContrast local_vs_global_flatness(const PrikhodkoParams& params, double a, double b, const Budget& budget,
                                          const Resolution& res) {
  if (!(a < b)) throw ValidationError("local_vs_global_flatness: need a < b");
  PolyFamilySpec spec;
  spec.kind = FamilyKind::prikhodko;
  spec.prikhodko = params;
  const auto p = std::get<ShiftedRealLinePoly>(build_family(spec));
  FlatnessContrast c;
  // |P| does not see the common offset.
  c.local = interval_l1_distortion(p.poly, a, b, res);
  c.global_mean_abs = mean_abs(independence_model(p), budget);
  return c;
}

nlohmann::json to_json(const UltraflatEstimate& e) {
  return {{"value", e.value},
          {"upper", e.upper},
          {"lower", e.lower},
          {"refinement_delta", e.refinement_delta},
          {"nodes", e.nodes}};
}

nlohmann::json to_json(const IntervalEstimate& e) {
  return {{"value", e.value}, {"refinement_delta", e.refinement_delta}, {"nodes", e.nodes}};
}

nlohmann::json to_json(const FlatnessContrast& c) {
  auto g = to_json(c.global_mean_abs);
  g["model"] = "independent-frequencies";
  return {{"local", to_json(c.local)}, {"global_mean_abs", g}};
}

PolyFamilySpec family_from_json(const nlohmann::json& family, const nlohmann::json& doc) {
  if (!family.is_object()) throw ValidationError("family: expected an object");
  if (!family.contains("kind") || !family["kind"].is_string()) throw ValidationError("family.kind: expected a string");
  PolyFamilySpec spec;
  spec.kind = parse_family_kind(family["kind"].get<std::string>());

  if (spec.kind == FamilyKind::rank_one) {
    spec.rank_one = params_from_json(doc);
    if (family.contains("stage")) {
      if (!family["stage"].is_number_unsigned()) throw ValidationError("family.stage: expected an integer >= 0");
      spec.stage = family["stage"].get<std::size_t>();
    }
    return spec;
  }

  if (spec.kind == FamilyKind::prikhodko) {
    const auto positive = [&](const char* key, std::uint64_t fallback) {
      if (!family.contains(key)) return fallback;
      if (!family[key].is_number_integer() || family[key].get<long long>() < 1)
        throw ValidationError(std::string("family.") + key + ": expected a positive integer");
      return family[key].get<std::uint64_t>();
    };
    spec.prikhodko.m = positive("m", 1);
    const std::uint64_t n = positive("n", 1);
    if (n > (std::uint64_t{1} << 24)) throw ValidationError("family.n: too large");
    spec.prikhodko.n = static_cast<std::uint32_t>(n);
    if (family.contains("eps")) {
      const auto& e = family["eps"];
      if (!e.is_string()) throw ValidationError("family.eps: expected a rational string such as \"1/2\"");
      try {
        spec.prikhodko.eps = Rational(e.get<std::string>());
        spec.prikhodko.eps.canonicalize();
      } catch (const std::invalid_argument&) {
        throw ValidationError("family.eps: cannot parse '" + e.get<std::string>() + "'");
      }
      if (sgn(spec.prikhodko.eps.get_den()) == 0) throw ValidationError("family.eps: zero denominator");
    }
    spec.prikhodko.validate();
    return spec;
  }

  const nlohmann::json* basis = family.contains("basis") ? &family["basis"]
                                : (doc.is_object() && doc.contains("basis")) ? &doc["basis"]
                                                                             : nullptr;
  spec.basis = basis ? basis_from_json(*basis) : default_basis();
  if (family.contains("step_symbol")) {
    if (!family["step_symbol"].is_string()) throw ValidationError("family.step_symbol: expected a string");
    spec.step_symbol = family["step_symbol"].get<std::string>();
  }
  if (!family.contains("frequencies") && !spec.basis->find(spec.step_symbol))
    throw ValidationError("family.step_symbol: '" + spec.step_symbol + "' is not declared in the basis");

  if (spec.kind == FamilyKind::unimodular) {
    if (!family.contains("phases") || !family["phases"].is_array())
      throw ValidationError("family.phases: expected a list of numbers");
    for (const auto& v : family["phases"]) {
      if (!v.is_number()) throw ValidationError("family.phases: expected numbers");
      spec.phases.push_back(v.get<double>());
    }
  } else {
    if (!family.contains("coefficients") || !family["coefficients"].is_array())
      throw ValidationError("family.coefficients: expected a list of integers");
    for (const auto& v : family["coefficients"]) {
      if (!v.is_number_integer()) throw ValidationError("family.coefficients: expected integers");
      spec.coefficients.push_back(v.get<int>());
    }
  }
  if (family.contains("frequencies")) {
    if (!family["frequencies"].is_array()) throw ValidationError("family.frequencies: expected a list of strings");
    for (std::size_t j = 0; j < family["frequencies"].size(); ++j) {
      const auto& v = family["frequencies"][j];
      const std::string where = "family.frequencies[" + std::to_string(j) + "]";
      if (!v.is_string()) throw ValidationError(where + ": expected a string");
      try {
        spec.frequencies.push_back(Frequency::parse(spec.basis, v.get<std::string>()));
      } catch (const ParseError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
  }
  return spec;
}

}  // namespace bohrkit
