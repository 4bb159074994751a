#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/approxfun.hpp"
#include "mdl/arith.hpp"
#include "mdl/estimate.hpp"
#include "mdl/intervals.hpp"
#include "mdl/realnum.hpp"

namespace mdl::bounds {

using approxfun::ApproxFunction;
using realnum::CertifiedReal;

struct BoundsConfig {
  unsigned H = 4;
  ApproxFunction psi;
  CertifiedReal gamma = CertifiedReal::exact(0);
  unsigned threads = 1;
  // Dyadic cutoff used in the wild counting split: k <= kappa log2 q.
  mpq_class kappa = mpq_class(97, 300);
  // Fitted constants, reported only.
  std::optional<long double> C0, C1, C2;

  void validate() const;
};

struct MasterRow {
  std::uint64_t q_small = 0;  // q'
  std::uint64_t q = 0;
  std::uint64_t g = 0;
  mpq_class measure;
  mpq_class delta;  // Delta(q', q)
  bool branch1 = false;
  Decision chi = Decision::False;
  bool chi_hat = false;
  mpq_class rhs;         // branch 1: 2(2H+1) min(psi/q) g chi; branch 2: 4 psi psi' (1 + C0/2H) unknown
  Decision pass = Decision::True;
  mpq_class c0_implied;  // branch 2 only
};

MasterRow master_check(std::uint64_t q_small, std::uint64_t q, const BoundsConfig& cfg);

struct MasterQStats {
  std::uint64_t q = 0;
  std::uint64_t pairs = 0, branch1 = 0, branch2 = 0, failures = 0, indeterminate = 0;
  mpq_class max_c0_implied;
};

struct MasterScan {
  std::uint64_t pairs = 0, branch1 = 0, branch2 = 0, failures = 0, indeterminate = 0;
  mpq_class max_c0_implied;
  std::uint64_t max_c0_q_small = 0, max_c0_q = 0;
  std::vector<MasterQStats> per_q;
  std::vector<MasterRow> failing;  // certified failures, first 100
};

// All pairs 1 <= q' < q <= q_max.
MasterScan master_scan(std::uint64_t q_max, const BoundsConfig& cfg);

struct HarmanEstimate {
  mpq_class sup;
  std::uint64_t q_small = 0, q = 0;  // attaining pair, (0,0) if empty
  std::uint64_t pairs = 0;           // pairs with positive psi at both ends
};

// sup over 1 <= q' < q <= q_max of | |A_q cap A_q'| - 4 psi psi' | / (g min(psi/q, psi'/q')).
HarmanEstimate harman_c0_estimate(std::uint64_t q_max, const ApproxFunction& psi,
                                  const CertifiedReal& gamma, unsigned threads = 1);
std::vector<HarmanEstimate> harman_c0_series(const std::vector<std::uint64_t>& q_max_list,
                                             const ApproxFunction& psi,
                                             const CertifiedReal& gamma, unsigned threads = 1);

struct CountingSum {
  std::uint64_t q = 0;
  mpq_class psi_q;
  std::uint64_t gsum = 0;     // sum of gcd over q' with chi = 1 at gamma_hat
  std::uint64_t gsum_lo = 0;  // certified members only
  std::uint64_t gsum_hi = 0;  // certified members plus indeterminate ones
  std::uint64_t indeterminate = 0;
  mpq_class value() const;  // (psi(q)/q) gsum
  mpq_class value_lo() const;
  mpq_class value_hi() const;
};

CountingSum counting_sum(std::uint64_t q, const ApproxFunction& psi, const CertifiedReal& gamma);
CountingSum counting_sum(std::uint64_t q, const intervals::PairKernel& kernel);

struct DecompositionCell {
  std::uint64_t r = 0;
  unsigned k = 0;
  std::uint64_t size = 0;  // |D_{k,r}|
  std::uint64_t hits = 0, hits_lo = 0, hits_hi = 0;
  mpq_class contribution;  // (psi(q)/q) r hits
  bool interval_defined = false;
  long double radius = 0;  // of I_{k,r}
  std::uint64_t S = 0, S_lo = 0, S_hi = 0;
  Decision hits_within_S = Decision::True;
};

struct CountingDecomposition {
  std::uint64_t q = 0;
  std::vector<DecompositionCell> cells;  // by r ascending, then k ascending
  mpq_class total;
  mpq_class tail_small;     // q'^2 < q part
  mpq_class low_levels;     // 2^k <= r^2
  mpq_class high_levels;    // 2^k > r^2
  mpq_class kappa_low;      // k <= kappa log2 q
  mpq_class kappa_high;
  Estimate zeta2_psi;       // zeta(2) psi(q), the scale for the high-level part
  std::uint64_t S_violations = 0;
  std::uint64_t indeterminate = 0;
};

CountingDecomposition counting_decomposition(std::uint64_t q, const ApproxFunction& psi,
                                             const CertifiedReal& gamma,
                                             const mpq_class& kappa = mpq_class(97, 300));
CountingDecomposition counting_decomposition(std::uint64_t q, const intervals::PairKernel& kernel,
                                             const mpq_class& kappa = mpq_class(97, 300));

struct RatioRow {
  std::uint64_t q = 0;
  mpq_class S;
  Estimate ratio;
  std::uint64_t indeterminate = 0;
};

struct WildWindow {
  std::uint64_t Q = 0;
  long double lo = 0, hi = 0;  // [Q^7, Q^(sigma/2)]
  bool empty = true;
};

struct RatioReport {
  std::vector<RatioRow> rows;
  Estimate max_ratio;
  std::uint64_t argmax = 0;
  std::uint64_t indeterminate = 0;
  bool wild = false;
  std::vector<WildWindow> windows;
  std::string note;
};

// S(q) / (psi(q) (F(q) / (log2 log2 q)^2 + 1)) for q in [q_lo, q_hi], q >= 16, psi(q) > 0.
RatioReport counting_lemma_ratio(std::uint64_t q_lo, std::uint64_t q_hi, const ApproxFunction& psi,
                                 const CertifiedReal& gamma, unsigned threads = 1);
// Wild variant: q restricted to [Q^7, Q^(sigma(Q)/2)] for Q in the scanned L_gamma.
RatioReport counting_lemma_ratio_wild(std::uint64_t Q_scan_max, std::uint64_t q_budget,
                                      const ApproxFunction& psi, const CertifiedReal& gamma,
                                      unsigned threads = 1);

struct FMomentCheck {
  std::uint64_t Q = 0;
  unsigned K = 0;
  Estimate C;
  Estimate moment;  // sum_{q <= Q} F(q)^K
  Estimate rhs;     // Q (C K^2)^K
  Decision moment_ok = Decision::True;
  long double threshold = 0;  // 2 C K^2, lower end
  arith::FTailCount tail;
  long double tail_limit = 0;  // Q / 2^K
  Decision tail_ok = Decision::True;
  Decision markov_ok = Decision::True;  // tail <= moment / threshold^K
  long double K_Q = 0;                  // 2 log2 log2 Q, for reference
  bool pass() const {
    return moment_ok == Decision::True && tail_ok == Decision::True && markov_ok == Decision::True;
  }
};

FMomentCheck f_moment_tail_check(std::uint64_t Q, unsigned K);

}  // namespace mdl::bounds
