#include "bohrkit/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bohrkit/rng.hpp"

namespace bohrkit {

namespace {

// Seeds of the individual estimates inside one analysis, derived from the
// master seed so that every record can be replayed on its own.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0) {
  return rng::stream_key(rng::stream_key(seed, tag), (a << 20) ^ b);
}

Budget with_seed(Budget b, std::uint64_t seed) {
  b.seed = seed;
  return b;
}

double product_abs(std::span<const std::complex<double>> v, std::size_t from, std::size_t to) {
  double r = 1.0;
  for (std::size_t i = from; i < to; ++i) r *= std::abs(v[i]);
  return r;
}

void require_increasing(const RankOneParams& params, std::span<const std::size_t> idx, const char* what) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= params.size())
      throw ValidationError(std::string(what) + ": stage " + std::to_string(idx[i]) + " out of range");
    if (i > 0 && idx[i] <= idx[i - 1]) throw ValidationError(std::string(what) + ": indices must be strictly increasing");
  }
}

std::vector<APPoly> stage_polys(const RankOneParams& params, std::span<const std::size_t> idx) {
  std::vector<APPoly> out;
  out.reserve(idx.size());
  for (std::size_t k : idx) out.push_back(build_polynomial(params, k));
  return out;
}

// mean(a * b) = sum_f a(f) b(-f), without expanding the product.
ExactComplex mean_of_product(const ExactPoly& a, const ExactPoly& b) {
  ExactComplex acc;
  for (const auto& [f, c] : a.terms()) {
    const ExactComplex d = b.coeff(-f);
    if (!CoeffTraits<ExactComplex>::is_zero(d)) acc += c * d;
  }
  return acc;
}

// prod_{k in idx} |P_k|^2 exactly, or nothing if it could exceed `cap` terms.
std::optional<ExactPoly> exact_q(const RankOneParams& params, std::span<const std::size_t> idx, std::size_t cap) {
  double bound = 1.0;
  for (std::size_t k : idx) {
    const double p = params.stages[k].p;
    bound *= p * (p - 1.0) + 1.0;
  }
  if (bound > static_cast<double>(cap)) return std::nullopt;
  ExactPoly q = ExactPoly::constant(params.basis, 1);
  for (std::size_t k : idx) q = poly_mul(q, stage_abs2<ExactComplex>(params, k));
  return q;
}

double max_or(std::span<const std::size_t> idx, double fallback) {
  return idx.empty() ? fallback : static_cast<double>(idx.back());
}

}  // namespace

std::string_view strategy_name(ScanStrategy s) { return s == ScanStrategy::greedy ? "greedy" : "fixed-stride"; }

std::string_view verdict_name(Verdict v) {
  return v == Verdict::singularity_evidence ? "singularity-evidence" : "inconclusive";
}

bool ScanReport::nonincreasing() const {
  for (std::size_t k = 0; k + 1 < integrals.size(); ++k) {
    const auto& a = integrals[k];
    const auto& b = integrals[k + 1];
    if (b.value > a.value + kConfidenceSigmas * std::hypot(a.std_error, b.std_error) + 1e-12) return false;
  }
  return true;
}

ScanReport bourgain_scan(const RankOneParams& params, const ScanOptions& options) {
  if (options.k_max < 1) throw ValidationError("bourgain_scan: k_max must be >= 1");
  if (options.strategy == ScanStrategy::greedy && options.window < 1)
    throw ValidationError("bourgain_scan: window must be >= 1");
  if (options.strategy == ScanStrategy::fixed_stride && options.stride < 1)
    throw ValidationError("bourgain_scan: stride must be >= 1");

  std::vector<std::optional<APPoly>> cache(params.size());
  const auto poly = [&](std::size_t k) -> const APPoly& {
    if (!cache[k]) cache[k] = build_polynomial(params, k);
    return *cache[k];
  };
  const Functional prod = [](std::span<const std::complex<double>> v, std::span<double> out) {
    out[0] = product_abs(v, 0, v.size());
  };
  const auto estimate = [&](const std::vector<std::size_t>& idx, const Budget& b) {
    std::vector<APPoly> polys;
    for (std::size_t k : idx) polys.push_back(poly(k));
    return bohr_integrals(prod, 1, polys, b).component(0);
  };

  ScanReport r;
  r.options = options;
  IntegralEstimate one;
  one.value = 1.0;
  r.integrals.push_back(one);

  for (std::size_t step = 1; step <= options.k_max; ++step) {
    std::size_t chosen = 0;
    if (options.strategy == ScanStrategy::greedy) {
      const std::size_t first = r.indices.empty() ? 0 : r.indices.back() + 1;
      const std::size_t last = std::min(params.size(), first + options.window);
      if (first >= last)
        throw BudgetError("bourgain_scan: stages exhausted after " + std::to_string(step - 1) + " steps");
      Budget cb = options.budget;
      if (options.candidate_samples > 0) cb.samples = options.candidate_samples;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t m = first; m < last; ++m) {
        auto idx = r.indices;
        idx.push_back(m);
        const double v = estimate(idx, with_seed(cb, derive_seed(options.budget.seed, 1, step, m))).value;
        if (v < best) {
          best = v;
          chosen = m;
        }
      }
    } else {
      chosen = options.start + (step - 1) * options.stride;
      if (chosen >= params.size())
        throw BudgetError("bourgain_scan: stages exhausted after " + std::to_string(step - 1) + " steps");
    }
    r.indices.push_back(chosen);
    // Fresh samples for the reported value, so that selecting the smallest
    // candidate does not bias it downwards.
    r.integrals.push_back(estimate(r.indices, with_seed(options.budget, derive_seed(options.budget.seed, 2, step))));
  }

  for (std::size_t k = 0; k + 1 < r.integrals.size(); ++k)
    r.decay_ratios.push_back(r.integrals[k].value > 0 ? r.integrals[k + 1].value / r.integrals[k].value
                                                       : std::numeric_limits<double>::quiet_NaN());
  const auto& last = r.integrals.back();
  r.verdict = last.value + kConfidenceSigmas * std::max(last.std_error, last.refinement_delta) < options.threshold
                  ? Verdict::singularity_evidence
                  : Verdict::inconclusive;
  return r;
}

nlohmann::json to_json(const ScanReport& r) {
  nlohmann::json integrals = nlohmann::json::array();
  for (const auto& e : r.integrals) integrals.push_back(to_json(e));
  nlohmann::json ratios = nlohmann::json::array();
  for (double d : r.decay_ratios) ratios.push_back(d);
  return {{"strategy", strategy_name(r.options.strategy)},
          {"k_max", r.options.k_max},
          {"window", r.options.window},
          {"samples", r.options.budget.samples},
          {"seed", r.options.budget.seed},
          {"indices", r.indices},
          {"I", integrals},
          {"decay_ratios", ratios},
          {"nonincreasing", r.nonincreasing()},
          {"verdict", verdict_name(r.verdict)}};
}

nlohmann::json to_json(const InequalityCheck& c) {
  return {{"lhs", c.lhs},         {"rhs", c.rhs},         {"std_error", c.std_error},
          {"holds", c.holds},     {"samples", c.samples}, {"seed", c.seed}};
}

namespace {

InequalityCheck finish(const MultiEstimate& e, double lhs, double rhs, std::span<const double> grad) {
  InequalityCheck c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.std_error = e.linear_error(grad);
  c.holds = lhs <= rhs + kConfidenceSigmas * c.std_error + 1e-12;
  c.samples = e.nodes_or_samples;
  c.seed = e.seed;
  return c;
}

}  // namespace

InequalityCheck cs_subsequence_bound(const RankOneParams& params, std::size_t full_N,
                                     std::span<const std::size_t> subset, const Budget& budget) {
  if (full_N >= params.size()) throw ValidationError("cs_subsequence_bound: N out of range");
  require_increasing(params, subset, "cs_subsequence_bound");
  if (!subset.empty() && subset.back() > full_N)
    throw ValidationError("cs_subsequence_bound: subset must lie in {0..N}");

  std::vector<std::size_t> all(full_N + 1);
  for (std::size_t k = 0; k <= full_N; ++k) all[k] = k;
  const auto polys = stage_polys(params, all);
  const std::vector<std::size_t> sub(subset.begin(), subset.end());
  const Functional g = [&sub](std::span<const std::complex<double>> v, std::span<double> out) {
    out[0] = product_abs(v, 0, v.size());
    double s = 1.0;
    for (std::size_t k : sub) s *= std::abs(v[k]);
    out[1] = s;
  };
  const auto e = bohr_integrals(g, 2, polys, budget);
  const double rhs = std::sqrt(e.values[1]);
  const double grad[2] = {1.0, rhs > 0 ? -0.5 / rhs : 0.0};
  return finish(e, e.values[0], rhs, grad);
}

nlohmann::json to_json(const KlemesCheck& c) {
  auto j = to_json(c.check);
  j["int_Q"] = c.q_integral;
  j["int_Q_abs2"] = c.q_abs2;
  j["int_Q_distortion"] = c.q_distortion;
  return j;
}

KlemesCheck klemes_inequality_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                    std::size_t m, const Budget& budget) {
  require_increasing(params, q_indices, "klemes_inequality_check");
  if (m >= params.size() || static_cast<double>(m) <= max_or(q_indices, -1.0))
    throw ValidationError("klemes_inequality_check: m must exceed every index of Q");
  std::vector<std::size_t> idx(q_indices.begin(), q_indices.end());
  idx.push_back(m);
  const auto polys = stage_polys(params, idx);
  const std::size_t nq = q_indices.size();
  const Functional g = [nq](std::span<const std::complex<double>> v, std::span<double> out) {
    const double q = product_abs(v, 0, nq);
    const double a = std::abs(v[nq]), a2 = a * a;
    out[0] = q * a;
    out[1] = q;
    out[2] = q * a2;
    out[3] = q * std::abs(a2 - 1.0);
  };
  const auto e = bohr_integrals(g, 4, polys, budget);
  const double A = e.values[0], B = e.values[1], C = e.values[2], D = e.values[3];
  const double grad[4] = {1.0, -0.5, -0.5, D / 4.0};
  KlemesCheck k;
  k.check = finish(e, A, 0.5 * (B + C) - D * D / 8.0, grad);
  k.q_integral = B;
  k.q_abs2 = C;
  k.q_distortion = D;
  return k;
}

nlohmann::json to_json(const HaarRecord& r) {
  nlohmann::json j{{"m", r.m},
                   {"joint", r.joint},
                   {"int_Q", r.q_integral},
                   {"deviation", r.deviation},
                   {"std_error", r.std_error}};
  j["symbolic_deviation"] = r.symbolic_deviation ? nlohmann::json(r.symbolic_deviation->get_str()) : nlohmann::json();
  return j;
}

std::vector<HaarRecord> haar_weak_limit_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                              std::span<const std::size_t> m_list, const Budget& budget,
                                              std::size_t symbolic_cap) {
  require_increasing(params, q_indices, "haar_weak_limit_check");
  const auto q_exact = exact_q(params, q_indices, symbolic_cap);
  const std::size_t nq = q_indices.size();
  const Functional g = [nq](std::span<const std::complex<double>> v, std::span<double> out) {
    const double q = product_abs(v, 0, nq);
    out[0] = q * std::norm(v[nq]);
    out[1] = q;
  };

  std::vector<HaarRecord> out;
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    const std::size_t m = m_list[i];
    if (m >= params.size()) throw ValidationError("haar_weak_limit_check: stage out of range");
    std::vector<std::size_t> idx(q_indices.begin(), q_indices.end());
    idx.push_back(m);
    const auto e = bohr_integrals(g, 2, stage_polys(params, idx), with_seed(budget, derive_seed(budget.seed, 4, i)));
    HaarRecord r;
    r.m = m;
    r.joint = e.values[0];
    r.q_integral = e.values[1];
    r.deviation = r.joint - r.q_integral;
    const double w[2] = {1.0, -1.0};
    r.std_error = e.linear_error(w);
    if (q_exact) {
      const auto s = stage_abs2<ExactComplex>(params, m);
      r.symbolic_deviation = mean_of_product(*q_exact, s).re - mean(*q_exact).re;
    }
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json to_json(const GuenaisReport& r) {
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& e : r.norms) norms.push_back(to_json(e));
  nlohmann::json j{{"norms", norms}, {"increments", r.increments}, {"partial_sums", r.partial_sums}};
  j["tail_slope"] = r.tail_slope ? nlohmann::json(*r.tail_slope) : nlohmann::json();
  return j;
}

GuenaisReport guenais_sum(const RankOneParams& params, std::size_t K, const Budget& budget) {
  if (K > params.size()) throw ValidationError("guenais_sum: K exceeds the number of stages");
  GuenaisReport r;
  double sum = 0.0;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < K; ++k) {
    const auto e = mean_abs(build_polynomial(params, k), with_seed(budget, derive_seed(budget.seed, 5, k)));
    const double slack = kConfidenceSigmas * std::max(e.std_error, e.refinement_delta) + 1e-12;
    if (e.value - slack > 1.0)
      throw InvariantViolation("guenais_sum: ||P_" + std::to_string(k) + "||_1 = " + std::to_string(e.value) +
                               " exceeds 1 beyond 3 sigma; integration failed");
    const double inc = std::sqrt(std::max(0.0, 1.0 - e.value * e.value));
    sum += inc;
    r.norms.push_back(e);
    r.increments.push_back(inc);
    r.partial_sums.push_back(sum);
    if (inc > 0.0) {
      xs.push_back(std::log(static_cast<double>(k + 1)));
      ys.push_back(std::log(inc));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / n;
      my += ys[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0) r.tail_slope = sxy / sxx;
  }
  return r;
}

nlohmann::json to_json(const FejerCheck& c) {
  nlohmann::json j{{"joint", c.joint},         {"product", c.product}, {"relative_gap", c.relative_gap},
                   {"std_error", c.std_error}, {"holds", c.holds},     {"samples", c.samples},
                   {"seed", c.seed}};
  j["symbolic_holds"] = c.symbolic_holds ? nlohmann::json(*c.symbolic_holds) : nlohmann::json();
  return j;
}

FejerCheck fejer_factorization_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                     std::size_t m, const Budget& budget, std::size_t symbolic_cap) {
  require_increasing(params, q_indices, "fejer_factorization_check");
  if (m >= params.size()) throw ValidationError("fejer_factorization_check: stage out of range");
  if (!factorization_hypothesis(params, q_indices, m))
    throw ValidationError("fejer_factorization_check: stage " + std::to_string(m) +
                          " is not rationally independent of the stages of Q");

  std::vector<std::size_t> idx(q_indices.begin(), q_indices.end());
  idx.push_back(m);
  const std::size_t nq = q_indices.size();
  const Functional g = [nq](std::span<const std::complex<double>> v, std::span<double> out) {
    const double q = product_abs(v, 0, nq), a = std::abs(v[nq]);
    out[0] = q * a;
    out[1] = q;
    out[2] = a;
  };
  const auto e = bohr_integrals(g, 3, stage_polys(params, idx), budget);
  const double A = e.values[0], B = e.values[1], E = e.values[2];
  FejerCheck c;
  c.joint = A;
  c.product = B * E;
  c.relative_gap = std::abs(A - c.product) / c.product;
  const double grad[3] = {1.0, -E, -B};
  c.std_error = e.linear_error(grad);
  c.holds = std::abs(A - c.product) <= kConfidenceSigmas * c.std_error + 1e-12;
  c.samples = e.nodes_or_samples;
  c.seed = e.seed;
  if (const auto q = exact_q(params, q_indices, symbolic_cap)) {
    const auto s = stage_abs2<ExactComplex>(params, m);
    c.symbolic_holds = mean_of_product(*q, s) == mean(*q) * mean(s);
  }
  return c;
}

nlohmann::json to_json(const KacDiagnostics& d) {
  return {{"q", d.q},           {"samples", d.samples},           {"seed", d.seed},
          {"ks_re", d.ks_re},   {"ks_im", d.ks_im},               {"mean_abs", to_json(d.mean_abs)},
          {"mean_abs2", to_json(d.mean_abs2)}};
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ValidationError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

KacDiagnostics kac_clt_diagnostics(std::uint32_t q, std::uint64_t samples, std::uint64_t seed, int threads) {
  if (q < 1) throw ValidationError("kac_clt_diagnostics: q must be >= 1");
  if (samples < 2) throw ValidationError("kac_clt_diagnostics: need at least 2 samples");
  const int nt = threads > 0 ? threads : kernels::default_threads();
  std::vector<double> re(samples), im(samples);
  const double norm = 1.0 / std::sqrt(static_cast<double>(q));
  const double two_pi = 2.0 * std::numbers::pi;

#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(samples); ++s) {
    const std::uint64_t key = rng::stream_key(seed, static_cast<std::uint64_t>(s));
    double x = 0.0, y = 0.0;
    for (std::uint32_t k = 0; k < q; ++k) {
      const double th = two_pi * rng::to_unit(rng::draw(key, k));
      x += std::cos(th);
      y += std::sin(th);
    }
    re[s] = x * norm;
    im[s] = y * norm;
  }

  KacDiagnostics d;
  d.q = q;
  d.samples = samples;
  d.seed = seed;
  double s1 = 0, s1q = 0, s2 = 0, s2q = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double a2 = re[s] * re[s] + im[s] * im[s], a = std::sqrt(a2);
    s1 += a;
    s1q += a * a;
    s2 += a2;
    s2q += a2 * a2;
  }
  const double n = static_cast<double>(samples);
  const auto make = [&](double sum, double sumsq) {
    IntegralEstimate e;
    e.method = Method::monte_carlo;
    e.value = sum / n;
    e.std_error = std::sqrt(std::max(0.0, (sumsq / n - e.value * e.value) / (n - 1.0)));
    e.nodes_or_samples = samples;
    e.seed = seed;
    e.torus_dim = q;
    return e;
  };
  d.mean_abs = make(s1, s1q);
  d.mean_abs2 = make(s2, s2q);
  // Re Z and Im Z are N(0, 1/2) in the limit: CDF = erfc(-x) / 2.
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x); };
  d.ks_re = ks_distance(std::move(re), cdf);
  d.ks_im = ks_distance(std::move(im), cdf);
  return d;
}

MomentIdentity kac_moment_identity(std::span<const std::uint32_t> l) {
  MomentIdentity r;
  r.formula = 1;
  for (std::uint32_t lj : l) {
    if (lj % 2 != 0) {
      r.formula = 0;
      break;
    }
    BigInt binom;
    mpz_bin_uiui(binom.get_mpz_t(), lj, lj / 2);
    BigInt pow2;
    mpz_ui_pow_ui(pow2.get_mpz_t(), 2, lj);
    r.formula *= Rational(binom, pow2);
    r.formula.canonicalize();
  }

  std::vector<Symbol> symbols{{std::string(kUnitSymbol), 1.0}};
  for (std::size_t j = 0; j < l.size(); ++j) symbols.push_back({"w" + std::to_string(j + 1), 1.0 + 0.5 * j});
  const auto basis = SymbolBasis::make(std::move(symbols));
  ExactPoly prod = ExactPoly::constant(basis, 1);
  for (std::size_t j = 0; j < l.size(); ++j) {
    ExactPoly c(basis);  // cos(w_j t)
    c.add_term(Frequency::symbol(basis, j + 1), ExactComplex(Rational(1, 2)));
    c.add_term(Frequency::symbol(basis, j + 1, -1), ExactComplex(Rational(1, 2)));
    for (std::uint32_t e = 0; e < l[j]; ++e) prod = poly_mul(prod, c);
  }
  const ExactComplex m = mean(prod);
  r.symbolic = m.re;
  r.agree = r.formula == r.symbolic && sgn(m.im) == 0;
  return r;
}

}  // namespace bohrkit
