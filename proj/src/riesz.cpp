#include "bohrkit/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bohrkit/rng.hpp"

namespace bohrkit {

namespace {

std::string field(std::size_t k, const std::string& name) {
  return "stages[" + std::to_string(k) + "]." + name;
}

void require_stage(const RankOneParams& params, std::size_t k) {
  if (k >= params.size())
    throw ValidationError("stage " + std::to_string(k) + " out of range (have " + std::to_string(params.size()) + ")");
}

std::vector<Frequency> nonzero_stage_frequencies(const RankOneParams& params, std::span<const std::size_t> stages) {
  std::vector<Frequency> out;
  for (std::size_t k : stages)
    for (auto& f : stage_frequencies(params, k))
      if (!f.is_zero()) out.push_back(std::move(f));
  return out;
}

std::size_t rank_or_zero(std::span<const Frequency> fs) { return fs.empty() ? 0 : rational_rank(fs); }

}  // namespace

void RankOneParams::validate() const {
  if (!basis) throw ValidationError("params: missing symbol basis");
  if (!basis->unit_index())
    throw ValidationError("basis: the unit symbol '" + std::string(kUnitSymbol) + "' must be declared");
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const Stage& s = stages[k];
    if (s.p < 2) throw ValidationError(field(k, "p") + ": cut number must be >= 2, got " + std::to_string(s.p));
    if (s.spacers.size() != s.p + 1)
      throw ValidationError(field(k, "spacers") + ": expected " + std::to_string(s.p + 1) + " entries, got " +
                            std::to_string(s.spacers.size()));
    for (std::size_t l = 0; l < s.spacers.size(); ++l) {
      const Frequency& f = s.spacers[l];
      const std::string name = field(k, "spacers[" + std::to_string(l) + "]");
      if (!f.basis()) throw ValidationError(name + ": missing basis");
      require_same_basis(basis, f.basis());
      if (l == 0 && !f.is_zero()) throw ValidationError(name + ": the first spacer must be 0");
      if (f.real_value() < 0.0) throw ValidationError(name + ": spacer must be nonnegative, got " + f.to_string());
    }
  }
}

Frequency heights(const RankOneParams& params, std::size_t k) {
  if (k > params.size()) throw ValidationError("height index " + std::to_string(k) + " out of range");
  return all_heights(params)[k];
}

std::vector<Frequency> all_heights(const RankOneParams& params) {
  const auto unit = params.basis ? params.basis->unit_index() : std::nullopt;
  if (!unit) throw ValidationError("basis: the unit symbol '" + std::string(kUnitSymbol) + "' must be declared");
  std::vector<Frequency> h{Frequency::symbol(params.basis, *unit)};
  for (const Stage& s : params.stages) {
    Frequency next = h.back().scaled(s.p);
    for (const auto& sp : s.spacers) next += sp;
    h.push_back(std::move(next));
  }
  return h;
}

Frequency spacer_sum(const RankOneParams& params, std::size_t n, std::size_t p, std::size_t q) {
  require_stage(params, n);
  const Stage& s = params.stages[n];
  if (p >= s.p || q >= s.p) throw ValidationError("spacer_sum indices must be below p_n = " + std::to_string(s.p));
  Frequency out(params.basis);
  for (std::size_t j = std::min(p, q); j < std::max(p, q); ++j) out += s.spacers[j];
  return out;
}

std::vector<Frequency> stage_frequencies(const RankOneParams& params, std::size_t k) {
  require_stage(params, k);
  const Stage& s = params.stages[k];
  const Frequency h = heights(params, k);
  std::vector<Frequency> out;
  out.reserve(s.p);
  Frequency shift(params.basis);
  for (std::uint32_t j = 0; j < s.p; ++j) {
    out.push_back(h.scaled(j) + shift);
    shift += s.spacers[j];
  }
  std::set<Frequency> seen(out.begin(), out.end());
  if (seen.size() != out.size())
    throw InvariantViolation("stage " + std::to_string(k) + " has colliding frequencies (degenerate parameters)");
  return out;
}

APPoly build_polynomial(const RankOneParams& params, std::size_t k) {
  const auto fs = stage_frequencies(params, k);
  const double c = 1.0 / std::sqrt(static_cast<double>(params.stages[k].p));
  APPoly out(params.basis);
  for (const auto& f : fs) out.add_term(f, {c, 0.0});
  return out;
}

Rational riesz_property_check(const RankOneParams& params, std::span<const std::size_t> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require_stage(params, indices[i]);
    if (i > 0 && indices[i] <= indices[i - 1]) throw ValidationError("indices must be strictly increasing");
  }
  ExactPoly prod = ExactPoly::constant(params.basis, ExactComplex(1));
  Rational scale = 1;
  for (std::size_t k : indices) {
    prod = poly_mul(prod, build_unnormalized<ExactComplex>(params, k));
    scale /= params.stages[k].p;
  }
  return Rational(mean(abs2(prod)).re * scale);
}

bool DegreeReport::all_hold() const {
  const auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  return all(degree_below_next) && all(height_halving) && q_matches_product && q_below_height;
}

DegreeReport degree_report(const RankOneParams& params, std::span<const std::size_t> indices, double tolerance) {
  const auto h = all_heights(params);
  const auto lt = [tolerance](double a, double b) { return a < b + tolerance * std::max(std::abs(a), std::abs(b)); };
  const auto eq = [tolerance](double a, double b) {
    return std::abs(a - b) <= tolerance * std::max({1.0, std::abs(a), std::abs(b)});
  };

  DegreeReport r;
  r.tolerance = tolerance;
  APPoly prod = APPoly::constant(params.basis, {1.0, 0.0});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t m = indices[i];
    require_stage(params, m);
    if (i > 0 && m <= indices[i - 1]) throw ValidationError("indices must be strictly increasing");
    const APPoly pm = build_polynomial(params, m);
    const double d = degree(pm), hm = h[m].real_value(), hn = h[m + 1].real_value();
    r.indices.push_back(m);
    r.degree.push_back(d);
    r.height.push_back(hm);
    r.next_height.push_back(hn);
    r.degree_below_next.push_back(lt(d, hn) && d != hn);
    r.height_halving.push_back(lt(hm, hn / 2.0));
    r.q += d;
    prod = poly_mul(prod, pm);
  }
  r.product_degree = degree(prod);
  r.q_matches_product = eq(r.q, r.product_degree);
  r.q_below_height = indices.empty() || (lt(r.q, h[indices.back() + 1].real_value()) &&
                                         r.q != h[indices.back() + 1].real_value());
  return r;
}

bool stage_independent(const RankOneParams& params, std::size_t m) {
  require_stage(params, m);
  std::vector<Frequency> gens{heights(params, m)};
  const Stage& s = params.stages[m];
  for (std::uint32_t l = 1; l < s.p; ++l) {
    if (s.spacers[l].is_zero()) return false;
    gens.push_back(s.spacers[l]);
  }
  return is_rationally_independent(gens);
}

bool factorization_hypothesis(const RankOneParams& params, std::span<const std::size_t> group, std::size_t m) {
  if (std::find(group.begin(), group.end(), m) != group.end()) return false;
  const auto a = nonzero_stage_frequencies(params, group);
  const std::size_t mm[1] = {m};
  const auto b = nonzero_stage_frequencies(params, mm);
  std::vector<Frequency> both = a;
  both.insert(both.end(), b.begin(), b.end());
  return rank_or_zero(both) == rank_or_zero(a) + rank_or_zero(b);
}

RankOneParams make_independent_params(std::span<const std::uint32_t> ps, std::uint64_t seed) {
  std::vector<Symbol> symbols{{std::string(kUnitSymbol), 1.0}};
  rng::Stream stream(rng::stream_key(seed, 0));
  for (std::size_t k = 0; k < ps.size(); ++k)
    for (std::uint32_t l = 1; l <= ps[k]; ++l)
      symbols.push_back({"s" + std::to_string(k) + "_" + std::to_string(l), 0.5 + stream.uniform()});

  RankOneParams params;
  params.basis = SymbolBasis::make(std::move(symbols));
  std::size_t next = 1;
  for (std::uint32_t p : ps) {
    Stage s;
    s.p = p;
    s.spacers.emplace_back(params.basis);
    for (std::uint32_t l = 1; l <= p; ++l) s.spacers.push_back(Frequency::symbol(params.basis, next++));
    params.stages.push_back(std::move(s));
  }
  params.validate();
  return params;
}

BasisPtr basis_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("basis: expected a list of symbols");
  std::vector<Symbol> symbols;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& s = j[i];
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string() || !s.contains("value") ||
        !s["value"].is_number())
      throw ValidationError("basis[" + std::to_string(i) + "]: needs a string 'name' and a numeric 'value'");
    symbols.push_back({s["name"].get<std::string>(), s["value"].get<double>()});
  }
  try {
    return SymbolBasis::make(std::move(symbols));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("basis: ") + e.what());
  }
}

RankOneParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("params: expected an object");
  if (j.contains("independent_stages")) {
    const auto& g = j["independent_stages"];
    if (!g.contains("p") || !g["p"].is_array()) throw ValidationError("independent_stages.p: expected a list");
    std::vector<std::uint32_t> ps;
    for (const auto& v : g["p"]) {
      if (!v.is_number_integer() || v.get<long long>() < 2)
        throw ValidationError("independent_stages.p: cut numbers must be integers >= 2");
      ps.push_back(v.get<std::uint32_t>());
    }
    return make_independent_params(ps, g.value("seed", std::uint64_t{0}));
  }

  RankOneParams params;
  params.basis = basis_from_json(j.contains("basis") ? j["basis"] : nlohmann::json());

  if (!j.contains("stages") || !j["stages"].is_array()) throw ValidationError("stages: expected a list");
  for (std::size_t k = 0; k < j["stages"].size(); ++k) {
    const auto& st = j["stages"][k];
    if (!st.contains("p") || !st["p"].is_number_integer())
      throw ValidationError(field(k, "p") + ": expected an integer");
    const long long p = st["p"].get<long long>();
    if (p < 2) throw ValidationError(field(k, "p") + ": cut number must be >= 2, got " + std::to_string(p));
    if (!st.contains("spacers") || !st["spacers"].is_array())
      throw ValidationError(field(k, "spacers") + ": expected a list of frequency strings");
    Stage s;
    s.p = static_cast<std::uint32_t>(p);
    for (std::size_t l = 0; l < st["spacers"].size(); ++l) {
      const auto& v = st["spacers"][l];
      if (!v.is_string()) throw ValidationError(field(k, "spacers[" + std::to_string(l) + "]") + ": expected a string");
      try {
        s.spacers.push_back(Frequency::parse(params.basis, v.get<std::string>()));
      } catch (const ParseError& e) {
        throw ValidationError(field(k, "spacers[" + std::to_string(l) + "]") + ": " + e.what());
      }
    }
    params.stages.push_back(std::move(s));
  }
  params.validate();
  return params;
}

nlohmann::json to_json(const RankOneParams& params) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& s : params.basis->symbols()) basis.push_back({{"name", s.name}, {"value", s.value}});
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& st : params.stages) {
    nlohmann::json sp = nlohmann::json::array();
    for (const auto& f : st.spacers) sp.push_back(f.to_string());
    stages.push_back({{"p", st.p}, {"spacers", sp}});
  }
  return {{"basis", basis}, {"stages", stages}};
}

}  // namespace bohrkit
