#pragma once

// Polynomial families from the flatness literature and the measurements used
// to compare them: L1/L2 ratio, ultraflat deviation, and local versus global
// L1-flatness of Prikhod'ko's real-line polynomials.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bohrkit/bohrint.hpp"
#include "bohrkit/riesz.hpp"
#include "json.hpp"

namespace bohrkit {

enum class FamilyKind { littlewood, newman, unimodular, prikhodko, rank_one };

std::string_view family_name(FamilyKind k);
FamilyKind parse_family_kind(std::string_view s);

// omega(p) = (m * n / eps^2) * exp(eps * p / n), p = 0..n-1, normalized by
// 1/sqrt(n).
struct PrikhodkoParams {
  std::uint64_t m = 1;
  std::uint32_t n = 1;
  Rational eps{1, 2};

  void validate() const;
  double scale() const;  // m n / eps^2 = omega(0)
  double frequency(std::uint32_t p) const;
};

struct PolyFamilySpec {
  FamilyKind kind = FamilyKind::littlewood;
  BasisPtr basis;
  // littlewood: +-1; newman: 0/1 with leading 1.
  std::vector<int> coefficients;
  // unimodular: coefficient exp(i phase), radians.
  std::vector<double> phases;
  // Exact kinds; empty means j * step_symbol for j = 0, 1, ...
  std::vector<Frequency> frequencies;
  std::string step_symbol = "alpha";
  PrikhodkoParams prikhodko;
  RankOneParams rank_one;
  std::size_t stage = 0;

  std::size_t size() const;
};

// Real-line polynomial stored as exp(i offset t) * sum c_k exp(i w_k t), so
// that the large common frequency does not swamp the spacing.
struct ShiftedRealLinePoly {
  RealLinePoly poly;
  double offset = 0.0;

  std::vector<double> frequencies() const;  // w_k + offset
};

using FamilyPoly = std::variant<APPoly, ShiftedRealLinePoly>;

// Throws ValidationError on an invalid spec, including duplicate frequencies.
FamilyPoly build_family(const PolyFamilySpec& spec);

// The real-line polynomial with every frequency promoted to its own symbol:
// the Bohr mean under the assumption that the frequencies are rationally
// independent.
APPoly independence_model(const ShiftedRealLinePoly& p);

// mean_abs(P) / l2_norm(P).
IntegralEstimate flatness_ratio(const APPoly& p, const Budget& budget);

struct UltraflatEstimate {
  double value = 0.0;             // max | |P| / ||P||_2 - 1 | = max(upper, lower)
  double upper = 0.0;             // max |P| / ||P||_2 - 1
  double lower = 0.0;             // 1 - min |P| / ||P||_2
  double refinement_delta = 0.0;  // change over the last grid doubling
  std::uint64_t nodes = 0;
};

inline constexpr double kUltraflatTolerance = 1e-3;

// Over a tensor grid on the reduced torus (dimension at most kMaxTensorDim),
// doubled until stable. Throws BudgetError past budget.max_nodes.
UltraflatEstimate ultraflat_deviation(const APPoly& p, const Budget& budget = {});
// Over the grid t in [0, T), starting at 64 points per term.
UltraflatEstimate ultraflat_deviation(const ShiftedRealLinePoly& p, double T, const Budget& budget = {});

struct FlatnessContrast {
  IntervalEstimate local;          // (1/(b-a)) int_a^b ||P|^2 - 1|
  IntegralEstimate global_mean_abs;  // under the independence model
};

FlatnessContrast local_vs_global_flatness(const PrikhodkoParams& params, double a, double b, const Budget& budget,
                                          const Resolution& res = {});

nlohmann::json to_json(const UltraflatEstimate& e);
nlohmann::json to_json(const IntervalEstimate& e);
nlohmann::json to_json(const FlatnessContrast& c);

// {"kind": ..., "coefficients" | "phases": [...], "frequencies": [...],
//  "m", "n", "eps", "stage"}, with the basis and stages of `doc` when given.
PolyFamilySpec family_from_json(const nlohmann::json& family, const nlohmann::json& doc = {});

}  // namespace bohrkit
