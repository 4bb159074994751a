#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/approxfun.hpp"
#include "mdl/estimate.hpp"
#include "mdl/intervals.hpp"
#include "mdl/montecarlo.hpp"
#include "mdl/realnum.hpp"

namespace mdl::experiments {

using approxfun::ApproxFunction;
using realnum::CertifiedReal;

inline constexpr const char* kProxyHeader =
    "finite-Q proxies only: unions over q <= Q and dyadic windows [Q, 2Q]; "
    "the limsup set W(psi, gamma) itself is never computed";

inline constexpr std::uint64_t kExactBudget = 10000;

struct ExperimentConfig {
  std::vector<CertifiedReal> gammas{CertifiedReal::preset("sqrt2")};
  ApproxFunction psi;
  std::uint64_t Q = 1024;
  std::vector<std::uint64_t> checkpoints;  // empty: 1, 2, 4, ..., Q
  unsigned H = 4;
  unsigned k = 1;
  std::uint64_t seed = 1;
  std::uint64_t mc_samples = 1000000;
  unsigned threads = 1;
  std::uint64_t budget = kExactBudget;
  mpq_class epsilon = mpq_class(1, 10);  // k = 1 divergence weight d(q)^(1 + epsilon)

  std::vector<std::uint64_t> schedule() const;
};

struct Invariant {
  std::string name;
  Decision pass = Decision::True;
  std::string detail;
};

struct Checkpoint {
  std::uint64_t Q = 0;
  mpq_class sum_measure;  // sum |E_q|
  mpq_class sum_pairs;    // sum_{s,t} |E_s cap E_t|, diagonal included
  mpq_class ce_bound;
  std::optional<mpq_class> union_measure;                 // k = 1
  std::optional<montecarlo::BoxUnionEstimate> monte_carlo;  // k >= 2
};

struct WindowUnion {
  std::uint64_t Q1 = 0, Q2 = 0;
  mpq_class measure;
};

struct ClassRow {
  unsigned l = 0;
  std::uint64_t count = 0;
  Estimate a_l;
  std::optional<mpq_class> ce_bound;
};

struct ExperimentReport {
  std::string header = kProxyHeader;
  std::vector<Checkpoint> checkpoints;
  std::vector<WindowUnion> windows;
  std::vector<ClassRow> classes;
  std::vector<std::pair<std::string, std::string>> diagnostics;
  std::vector<Invariant> invariants;
  bool all_passed() const;
  std::uint64_t indeterminate = 0;
};

// (sum m(E_s))^2 / sum_{s,t} m(E_s cap E_t), diagonal m(E_s cap E_s) = m(E_s).
mpq_class ce_lower_bound(const std::vector<mpq_class>& measures,
                         const std::function<mpq_class(std::size_t, std::size_t)>& pair);
mpq_class ce_lower_bound(const mpq_class& sum_measure, const mpq_class& sum_pairs);

struct CESeriesPoint {
  std::uint64_t Q = 0;
  mpq_class sum_measure, sum_pairs, ce_bound;
};

// Exact CE data for the A_q (k = 1) or B_q (k = gammas.size()) family at each checkpoint.
std::vector<CESeriesPoint> ce_series(const ApproxFunction& psi,
                                     const std::vector<CertifiedReal>& gammas,
                                     const std::vector<std::uint64_t>& checkpoints,
                                     unsigned threads = 1,
                                     const std::function<bool(std::uint64_t)>& in_range = nullptr);

ExperimentReport union_coverage_scan(const ExperimentConfig& cfg);

struct ShrinkWindow {
  std::uint64_t lo = 0, hi = 0;
  mpq_class sum;
};

struct SzuszResult {
  ApproxFunction shrunk;
  std::vector<std::uint64_t> triggers;
  std::vector<ShrinkWindow> windows;  // full windows [ceil(s/2), s], s doubling
  bool changed = false;
};

// psi must be non-increasing from its first support point up to Q_max.
SzuszResult szusz_shrink(const ApproxFunction& psi, std::uint64_t Q_max);

struct BklCell {
  unsigned k = 0, l = 0;
  std::uint64_t count = 0;
  std::uint64_t indeterminate = 0;
  bool degenerate = false;  // 2^(l+1) >= k: the range starts at or above 1/2
  mpq_class normalized;     // count k / (2^k 2^l)
};

struct BklReport {
  std::vector<BklCell> cells;
  mpq_class c_fit;              // min normalized over all cells
  mpq_class c_fit_nondegenerate;
};

// #{q in [2^k, 2^(k+1)] : ||q beta - gamma2|| in [2^l / k, 2^(l+1) / k]}, k <= k_max, 2^l <= k.
BklReport bkl_counts(const CertifiedReal& beta, const CertifiedReal& gamma2, unsigned k_max = 13);

struct MultiplicativeReport {
  ExperimentReport coverage;
  approxfun::DivergenceReport condition_d;
  std::uint64_t B_members = 0, B_indeterminate = 0;
  ApproxFunction psi_prime;
  BklReport bkl;
};

// psi'(q) = psi(q) / ||q beta - gamma2|| on B, zero off B, rounded down onto the
// 2^-96 grid; then the coverage scan with psi' and gamma1.
MultiplicativeReport multiplicative_pipeline(const ApproxFunction& psi, const CertifiedReal& beta,
                                             const CertifiedReal& gamma1,
                                             const CertifiedReal& gamma2, std::uint64_t Q,
                                             unsigned threads = 1);

ExperimentReport highdim_experiment(const ExperimentConfig& cfg);

struct CfRatioReport {
  std::uint64_t Q = 0;
  mpq_class min_ratio, max_ratio;
  std::uint64_t argmin = 0, argmax = 0;
  long double fitted_C = 0;  // smallest C with C^-1 <= ratio <= C
};

// (sum_{r | q} 1/r) / (q / phi(q)) = sigma(q) phi(q) / q^2.
mpq_class cf_ratio(std::uint64_t q);
CfRatioReport cf_ratio_fact_check(std::uint64_t Q);

struct SieveBlock {
  unsigned j = 0;  // q in (2^(j-1), 2^j]
  std::uint64_t count = 0;
  mpq_class increment;
};

struct SieveMassReport {
  mpq_class epsilon;
  std::uint64_t Q = 0;
  std::uint64_t count = 0;        // q <= Q rejected by the Omega filter
  std::uint64_t indeterminate = 0;
  mpq_class mass;                 // sum of psi over rejected q
  std::vector<SieveBlock> blocks;  // full dyadic blocks only, j >= 2
  unsigned group_width = 0;
  std::vector<mpq_class> group_increments;
  mpq_class max_group_ratio;  // largest ratio of consecutive group increments
};

// Mass that the Hardy-Ramanujan support filter removes from psi.
SieveMassReport sieve_mass_scan(const ApproxFunction& psi, const mpq_class& epsilon, std::uint64_t Q,
                                unsigned group_width = 6, unsigned threads = 1);

// Heuristic verdict from dyadic increments of a partial-sum sequence.
std::string divergence_verdict(const std::vector<long double>& dyadic_partial_sums);

}  // namespace mdl::experiments
