#include "runner.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bohrkit/criteria.hpp"
#include "bohrkit/flatness.hpp"

namespace bohrkit::cli {

namespace {

using nlohmann::json;

// ---- typed access to the "analysis" block, with field names in errors ----

struct Fields {
  const json& j;

  bool has(const char* key) const { return j.is_object() && j.contains(key) && !j[key].is_null(); }

  std::uint64_t uint(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
      throw ValidationError(std::string("analysis.") + key + ": expected a nonnegative integer");
    return j[key].get<std::uint64_t>();
  }
  double real(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j[key].is_number() || !std::isfinite(j[key].get<double>()))
      throw ValidationError(std::string("analysis.") + key + ": expected a finite number");
    return j[key].get<double>();
  }
  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j[key].is_string()) throw ValidationError(std::string("analysis.") + key + ": expected a string");
    return j[key].get<std::string>();
  }
  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j[key].is_boolean()) throw ValidationError(std::string("analysis.") + key + ": expected true or false");
    return j[key].get<bool>();
  }
  template <class T>
  std::vector<T> list(const char* key, std::vector<T> fallback) const {
    if (!has(key)) return fallback;
    if (!j[key].is_array()) throw ValidationError(std::string("analysis.") + key + ": expected a list of integers");
    std::vector<T> out;
    for (const auto& v : j[key]) {
      if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError(std::string("analysis.") + key + ": expected nonnegative integers");
      out.push_back(v.get<T>());
    }
    return out;
  }
};

Fields analysis(const json& config) {
  static const json empty = json::object();
  if (!config.contains("analysis")) return {empty};
  if (!config["analysis"].is_object()) throw ValidationError("analysis: expected an object");
  return {config["analysis"]};
}

Method parse_method(const std::string& s) {
  for (auto m : {Method::automatic, Method::tensor_quadrature, Method::monte_carlo})
    if (method_name(m) == s) return m;
  throw ValidationError("analysis.method: expected automatic, tensor-quadrature or monte-carlo");
}

Budget budget_of(const json& config, int threads, std::uint64_t default_samples = 1 << 16) {
  const Fields a = analysis(config);
  Budget b;
  b.method = parse_method(a.text("method", "automatic"));
  b.samples = a.uint("samples", default_samples);
  b.min_nodes = a.uint("min_nodes", b.min_nodes);
  b.max_nodes = a.uint("max_nodes", b.max_nodes);
  b.seed = config["seed"].get<std::uint64_t>();
  b.threads = threads;
  return b;
}

std::vector<std::size_t> all_stages(const RankOneParams& params) {
  std::vector<std::size_t> out(params.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = k;
  return out;
}

std::string exact(const Rational& r) { return r.get_str(); }

// ---- analyses ---------------------------------------------------------------

Output riesz_check(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  const std::size_t stages = std::min<std::size_t>(a.uint("stages", params.size()), params.size());
  const std::size_t cap = a.uint("support_cap", kDefaultSupportCap);

  Output out;
  json records = json::array();
  auto state = RieszState<ExactComplex>::initial(params.basis);
  bool capped = false;
  for (std::size_t k = 0; k < stages; ++k) {
    const Rational m2 = mean(stage_abs2<ExactComplex>(params, k, threads)).re;
    if (m2 != 1) throw InvariantViolation("mean |P_" + std::to_string(k) + "|^2 = " + exact(m2) + ", expected 1");
    json r{{"k", k}, {"p", params.stages[k].p}, {"mean_abs2", exact(m2)}};
    if (!capped) {
      try {
        auto next = state.extend(params, k, cap, threads);
        const Rational prefix = mean(next.q).re;
        if (prefix != 1)
          throw InvariantViolation("mean |P_0 ... P_" + std::to_string(k) + "|^2 = " + exact(prefix));
        r["prefix_mean_abs2"] = exact(prefix);
        r["support"] = next.q.size();
        r["monotonicity_violations"] = monotonicity_violations(state, next).size();
        state = std::move(next);
      } catch (const BudgetError&) {
        capped = true;
        out.result["support_cap_reached_at"] = k;
      }
    }
    records.push_back(r);
    out.rows.push_back({double(k), "mean_abs2", m2.get_d(), 0.0});
  }
  out.result["stages"] = records;
  out.result["support_cap"] = cap;
  if (a.flag("sigma_hat", false)) {
    std::ostringstream os;
    write_sigma_hat_csv(os, state);
    out.extras.push_back({"sigma_hat.csv", os.str()});
  }
  return out;
}

Output bourgain(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  ScanOptions o;
  const std::string strategy = a.text("strategy", "greedy");
  if (strategy == "greedy")
    o.strategy = ScanStrategy::greedy;
  else if (strategy == "fixed-stride")
    o.strategy = ScanStrategy::fixed_stride;
  else
    throw ValidationError("analysis.strategy: expected greedy or fixed-stride");
  o.k_max = a.uint("k_max", o.k_max);
  o.window = a.uint("window", o.window);
  o.start = a.uint("start", o.start);
  o.stride = a.uint("stride", o.stride);
  o.threshold = a.real("threshold", o.threshold);
  o.candidate_samples = a.uint("candidate_samples", 0);
  o.budget = budget_of(config, threads);
  const auto r = bourgain_scan(params, o);
  Output out{to_json(r), {}, {}};
  for (std::size_t k = 0; k < r.integrals.size(); ++k)
    out.rows.push_back({double(k), "I", r.integrals[k].value, r.integrals[k].std_error});
  for (std::size_t k = 0; k < r.decay_ratios.size(); ++k)
    out.rows.push_back({double(k + 1), "decay_ratio", r.decay_ratios[k], 0.0});
  return out;
}

Output guenais(const json& config, int threads) {
  const auto params = params_from_json(config);
  const auto r = guenais_sum(params, analysis(config).uint("K", params.size()), budget_of(config, threads));
  Output out{to_json(r), {}, {}};
  for (std::size_t k = 0; k < r.increments.size(); ++k) {
    out.rows.push_back({double(k), "norm", r.norms[k].value, r.norms[k].std_error});
    out.rows.push_back({double(k), "increment", r.increments[k], 0.0});
    out.rows.push_back({double(k), "partial_sum", r.partial_sums[k], 0.0});
  }
  return out;
}

std::vector<std::size_t> q_indices(const Fields& a) { return a.list<std::size_t>("q", {}); }

std::size_t required(const Fields& a, const char* key) {
  if (!a.has(key)) throw ValidationError(std::string("analysis.") + key + ": required");
  return a.uint(key, 0);
}

Output fejer(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  const auto c = fejer_factorization_check(params, q_indices(a), required(a, "m"), budget_of(config, threads),
                                           a.uint("symbolic_cap", 200'000));
  Output out{to_json(c), {}, {}};
  out.rows.push_back({0.0, "joint", c.joint, 0.0});
  out.rows.push_back({0.0, "product", c.product, 0.0});
  out.rows.push_back({0.0, "gap", c.joint - c.product, c.std_error});
  return out;
}

Output klemes(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  const auto c = klemes_inequality_check(params, q_indices(a), required(a, "m"), budget_of(config, threads));
  Output out{to_json(c), {}, {}};
  out.rows.push_back({0.0, "lhs", c.check.lhs, 0.0});
  out.rows.push_back({0.0, "rhs", c.check.rhs, 0.0});
  out.rows.push_back({0.0, "lhs_minus_rhs", c.check.lhs - c.check.rhs, c.check.std_error});
  return out;
}

Output cs_bound(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  const auto subset = a.list<std::size_t>("subset", {});
  const auto c = cs_subsequence_bound(params, required(a, "N"), subset, budget_of(config, threads));
  Output out{to_json(c), {}, {}};
  out.rows.push_back({0.0, "lhs_minus_rhs", c.lhs - c.rhs, c.std_error});
  return out;
}

Output haar(const json& config, int threads) {
  const auto params = params_from_json(config);
  const Fields a = analysis(config);
  const auto q = q_indices(a);
  std::vector<std::size_t> fallback;
  for (std::size_t m = q.empty() ? 0 : q.back() + 1; m < params.size(); ++m) fallback.push_back(m);
  const auto ms = a.list<std::size_t>("m", fallback);
  const auto recs =
      haar_weak_limit_check(params, q, ms, budget_of(config, threads), a.uint("symbolic_cap", 200'000));
  Output out;
  out.result = json::array();
  for (const auto& r : recs) {
    out.result.push_back(to_json(r));
    out.rows.push_back({double(r.m), "deviation", r.deviation, r.std_error});
  }
  return out;
}

Output kac_clt(const json& config, int threads) {
  const Fields a = analysis(config);
  const std::uint64_t q = a.uint("q", 128);
  if (q < 1 || q > (1u << 30)) throw ValidationError("analysis.q: must lie in [1, 2^30]");
  const auto d =
      kac_clt_diagnostics(static_cast<std::uint32_t>(q), a.uint("samples", 100'000), config["seed"], threads);
  Output out{to_json(d), {}, {}};
  out.rows.push_back({double(q), "ks_re", d.ks_re, 0.0});
  out.rows.push_back({double(q), "ks_im", d.ks_im, 0.0});
  out.rows.push_back({double(q), "mean_abs", d.mean_abs.value, d.mean_abs.std_error});
  out.rows.push_back({double(q), "mean_abs2", d.mean_abs2.value, d.mean_abs2.std_error});
  return out;
}

Output kac_moments(const json& config, int) {
  const Fields a = analysis(config);
  std::vector<std::vector<std::uint32_t>> tuples;
  if (a.has("l")) {
    tuples.push_back(a.list<std::uint32_t>("l", {}));
  } else {
    // Every tuple with at most three entries summing to at most eight.
    for (std::size_t k = 1; k <= 3; ++k) {
      std::vector<std::uint32_t> l(k, 0);
      while (true) {
        std::uint32_t total = 0;
        for (auto x : l) total += x;
        if (total <= 8) tuples.push_back(l);
        std::size_t i = 0;
        while (i < k && ++l[i] > 8) l[i++] = 0;
        if (i == k) break;
      }
    }
  }
  for (const auto& l : tuples)
    for (auto x : l)
      if (x > 64) throw ValidationError("analysis.l: exponents above 64 are not supported");
  Output out;
  out.result = json::array();
  bool all = true;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto m = kac_moment_identity(tuples[i]);
    all = all && m.agree;
    out.result.push_back({{"l", tuples[i]}, {"formula", exact(m.formula)}, {"symbolic", exact(m.symbolic)},
                          {"agree", m.agree}});
    out.rows.push_back({double(i), "moment", m.formula.get_d(), 0.0});
  }
  if (!all) throw InvariantViolation("moment formula and symbolic expansion disagree");
  return out;
}

Output flatness(const json& config, int threads) {
  if (!config.contains("family")) throw ValidationError("family: required for this command");
  const auto spec = family_from_json(config["family"], config);
  const Fields a = analysis(config);
  const Budget budget = budget_of(config, threads);
  const auto poly = build_family(spec);
  Output out;
  out.result["kind"] = family_name(spec.kind);
  out.result["terms"] = spec.size();
  APPoly bohr;
  if (const auto* p = std::get_if<APPoly>(&poly)) {
    bohr = *p;
    try {
      out.result["ultraflat"] = to_json(ultraflat_deviation(*p, budget));
    } catch (const BudgetError& e) {
      out.result["ultraflat"] = {{"skipped", e.what()}};
    }
  } else {
    const auto& r = std::get<ShiftedRealLinePoly>(poly);
    bohr = independence_model(r);
    out.result["model"] = "independent-frequencies";
    out.result["ultraflat"] = to_json(ultraflat_deviation(r, a.real("T", 100.0), budget));
  }
  const auto ratio = flatness_ratio(bohr, budget);
  out.result["flatness_ratio"] = to_json(ratio);
  out.rows.push_back({double(spec.size()), "flatness_ratio", ratio.value, ratio.std_error});
  out.rows.push_back({double(spec.size()), "ultraflat", out.result["ultraflat"].value("value", NAN), 0.0});
  return out;
}

Output prikhodko(const json& config, int threads) {
  const Fields a = analysis(config);
  const std::uint64_t m = a.uint("m", 6);
  const auto ns = a.list<std::uint32_t>("n", {64, 128, 256});
  const double lo = a.real("a", 1.0), hi = a.real("b", 2.0);
  // eps = min(eps_times_n / n, 1/2) unless a fixed "eps" is given.
  const std::uint64_t eps_times_n = a.uint("eps_times_n", 32);
  const Budget budget = budget_of(config, threads, 200'000);
  Resolution res;
  res.threads = threads;

  Output out;
  json records = json::array();
  std::ostringstream table;
  table << "n,ratio,error,local,global\n";
  for (std::uint32_t n : ns) {
    PrikhodkoParams p;
    p.m = m;
    p.n = n;
    if (a.has("eps")) {
      try {
        p.eps = Rational(a.text("eps", ""));
        p.eps.canonicalize();
      } catch (const std::invalid_argument&) {
        throw ValidationError("analysis.eps: expected a rational such as \"1/2\"");
      }
    } else {
      p.eps = Rational(static_cast<long>(eps_times_n), static_cast<long>(n));
      p.eps.canonicalize();
      if (p.eps > Rational(1, 2)) p.eps = Rational(1, 2);
    }
    const auto c = local_vs_global_flatness(p, lo, hi, budget, res);
    auto rec = to_json(c);
    rec["n"] = n;
    rec["m"] = m;
    rec["eps"] = exact(p.eps);
    records.push_back(rec);
    // ||P_n||_2 = 1, so the flatness ratio is the global mean itself.
    const auto& g = c.global_mean_abs;
    table << n << ',' << json(g.value).dump() << ',' << json(g.std_error).dump() << ','
          << json(c.local.value).dump() << ',' << json(g.value).dump() << '\n';
    out.rows.push_back({double(n), "local", c.local.value, c.local.refinement_delta});
    out.rows.push_back({double(n), "global_mean_abs", g.value, g.std_error});
  }
  out.result["a"] = lo;
  out.result["b"] = hi;
  out.result["sizes"] = records;
  out.extras.push_back({"rows.csv", table.str()});
  return out;
}

Output degree(const json& config, int) {
  const auto params = params_from_json(config);
  const auto idx = analysis(config).list<std::size_t>("indices", all_stages(params));
  const auto r = degree_report(params, idx);
  Output out;
  json stages = json::array();
  for (std::size_t i = 0; i < r.indices.size(); ++i) {
    stages.push_back({{"m", r.indices[i]},
                      {"degree", r.degree[i]},
                      {"height", r.height[i]},
                      {"next_height", r.next_height[i]},
                      {"degree_below_next", bool(r.degree_below_next[i])},
                      {"height_halving", bool(r.height_halving[i])}});
    out.rows.push_back({double(r.indices[i]), "degree", r.degree[i], 0.0});
    out.rows.push_back({double(r.indices[i]), "next_height", r.next_height[i], 0.0});
  }
  out.result = {{"stages", stages},
                {"q", r.q},
                {"product_degree", r.product_degree},
                {"q_matches_product", r.q_matches_product},
                {"q_below_height", r.q_below_height},
                {"all_hold", r.all_hold()}};
  return out;
}

using Handler = Output (*)(const json&, int);

const std::vector<std::pair<std::string, Handler>>& table() {
  static const std::vector<std::pair<std::string, Handler>> t{
      {"riesz-check", riesz_check}, {"bourgain-scan", bourgain}, {"guenais", guenais},
      {"fejer", fejer},             {"klemes", klemes},          {"cs-bound", cs_bound},
      {"haar", haar},               {"kac-clt", kac_clt},        {"kac-moments", kac_moments},
      {"flatness", flatness},       {"prikhodko", prikhodko},    {"degree-report", degree}};
  return t;
}

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, h] : table()) v.push_back(name);
    return v;
  }();
  return names;
}

Output run(const std::string& command, const json& config, int threads) {
  if (!config.is_object()) throw ValidationError("config: expected an object");
  if (!config.contains("seed") || !config["seed"].is_number_unsigned())
    throw ValidationError("seed: expected a nonnegative integer");
  for (const auto& [name, handler] : table())
    if (name == command) return handler(config, threads);
  throw ValidationError("unknown command '" + command + "'");
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string plot_csv(const std::vector<PlotRow>& rows) {
  std::string out = "x,series,value,error\n";
  for (const auto& r : rows) out += number(r.x) + ',' + r.series + ',' + number(r.value) + ',' + number(r.error) + '\n';
  return out;
}

}  // namespace bohrkit::cli
