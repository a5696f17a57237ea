#pragma once

// Numerical singularity and flatness criteria for generalized Riesz products.
// Every check is evidence at a stated confidence, never a proof: inequalities
// are tested on shared Monte Carlo samples with a delta-method error bar and
// pass when they hold within three standard errors.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohrkit/bohrint.hpp"
#include "bohrkit/riesz.hpp"
#include "json.hpp"

namespace bohrkit {

inline constexpr double kConfidenceSigmas = 3.0;

// ---- Bourgain scan -------------------------------------------------------

enum class ScanStrategy { greedy, fixed_stride };
enum class Verdict { singularity_evidence, inconclusive };

std::string_view strategy_name(ScanStrategy s);
std::string_view verdict_name(Verdict v);

struct ScanOptions {
  ScanStrategy strategy = ScanStrategy::greedy;
  std::size_t k_max = 5;
  std::size_t window = 3;  // greedy: candidate stages per step
  std::size_t start = 0;   // fixed-stride: first index
  std::size_t stride = 1;  // fixed-stride: index step
  double threshold = 0.1;  // verdict: I_{k_max} below this at 3 sigma
  Budget budget;           // samples for the reported I_k
  std::uint64_t candidate_samples = 0;  // greedy candidate screening; 0 = budget.samples
};

struct ScanReport {
  ScanOptions options;
  std::vector<std::size_t> indices;
  std::vector<IntegralEstimate> integrals;  // I_0 = 1, I_1, ..., I_{k_max}
  std::vector<double> decay_ratios;         // I_{k+1} / I_k
  Verdict verdict = Verdict::inconclusive;

  // I_{k+1} <= I_k within 3 combined standard errors for every k.
  bool nonincreasing() const;
};

ScanReport bourgain_scan(const RankOneParams& params, const ScanOptions& options);
nlohmann::json to_json(const ScanReport& r);

// ---- Inequalities on shared samples --------------------------------------

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;  // of lhs - rhs
  bool holds = false;      // lhs <= rhs + 3 std_error
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const InequalityCheck& c);

// int prod_{k<=N} |P_k| <= (int prod_{k in subset} |P_k|)^{1/2}.
InequalityCheck cs_subsequence_bound(const RankOneParams& params, std::size_t full_N,
                                     std::span<const std::size_t> subset, const Budget& budget);

// With Q = prod_j |P_{n_j}|:
// int Q|P_m| <= (int Q + int Q|P_m|^2) / 2 - (int Q ||P_m|^2 - 1|)^2 / 8.
struct KlemesCheck {
  InequalityCheck check;
  double q_integral = 0.0;   // int Q
  double q_abs2 = 0.0;       // int Q |P_m|^2
  double q_distortion = 0.0; // int Q ||P_m|^2 - 1|
};
nlohmann::json to_json(const KlemesCheck& c);

KlemesCheck klemes_inequality_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                    std::size_t m, const Budget& budget);

// int Q |P_m|^2 against int Q for each m.
struct HaarRecord {
  std::size_t m = 0;
  double joint = 0.0;       // int Q |P_m|^2
  double q_integral = 0.0;  // int Q
  double deviation = 0.0;   // joint - q_integral
  double std_error = 0.0;   // of the deviation
  // Exact mean(prod |P_n|^2 * |P_m|^2) - mean(prod |P_n|^2), when the
  // expansion stays below the support cap.
  std::optional<Rational> symbolic_deviation;
};
nlohmann::json to_json(const HaarRecord& r);

std::vector<HaarRecord> haar_weak_limit_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                              std::span<const std::size_t> m_list, const Budget& budget,
                                              std::size_t symbolic_cap = 200'000);

// ---- Guenais sum ---------------------------------------------------------

struct GuenaisReport {
  std::vector<IntegralEstimate> norms;  // ||P_k||_1
  std::vector<double> increments;       // sqrt(max(0, 1 - ||P_k||_1^2))
  std::vector<double> partial_sums;
  // Least-squares slope of log(increment_k) against log(k + 1), over the
  // positive increments; absent with fewer than two.
  std::optional<double> tail_slope;
};
nlohmann::json to_json(const GuenaisReport& r);

GuenaisReport guenais_sum(const RankOneParams& params, std::size_t K, const Budget& budget);

// ---- Fejer factorization -------------------------------------------------

struct FejerCheck {
  double joint = 0.0;         // int Q |P_m|
  double product = 0.0;       // int Q * int |P_m|
  double relative_gap = 0.0;  // |joint - product| / product
  double std_error = 0.0;     // of joint - product
  bool holds = false;
  // mean(prod |P_n|^2 |P_m|^2) == mean(prod |P_n|^2) mean(|P_m|^2), exact;
  // absent when the expansion exceeds the support cap.
  std::optional<bool> symbolic_holds;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const FejerCheck& c);

// Throws ValidationError unless the stage frequencies of Q and of P_m are
// rationally independent of each other.
FejerCheck fejer_factorization_check(const RankOneParams& params, std::span<const std::size_t> q_indices,
                                     std::size_t m, const Budget& budget, std::size_t symbolic_cap = 200'000);

// ---- Kac CLT -------------------------------------------------------------

struct KacDiagnostics {
  std::uint32_t q = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double ks_re = 0.0;  // sup |F_n - Phi| for Re Z against N(0, 1/2)
  double ks_im = 0.0;
  IntegralEstimate mean_abs;   // E|Z|, limit sqrt(pi)/2
  IntegralEstimate mean_abs2;  // E|Z|^2 = 1
};
nlohmann::json to_json(const KacDiagnostics& d);

// Z = q^{-1/2} sum_{k<q} exp(2 pi i theta_k) with independent uniform phases.
KacDiagnostics kac_clt_diagnostics(std::uint32_t q, std::uint64_t samples, std::uint64_t seed, int threads = 0);

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

struct MomentIdentity {
  Rational formula;
  Rational symbolic;
  bool agree = false;
};

// Haar mean of prod_j cos^{l_j}(omega_j t) for independent omega_j, from the
// binomial formula and from an exact symbolic expansion.
MomentIdentity kac_moment_identity(std::span<const std::uint32_t> l);

}  // namespace bohrkit
