#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "mdl/estimate.hpp"

namespace mdl::arith {

struct FactoredInt {
  std::uint64_t value = 1;
  std::vector<std::pair<std::uint64_t, unsigned>> factors;

  bool valid() const;
};

FactoredInt factor(std::uint64_t q);

std::uint64_t gcd(std::uint64_t a, std::uint64_t b);
std::uint64_t euler_phi(std::uint64_t q);
std::uint64_t divisor_count(std::uint64_t q);
unsigned big_omega(std::uint64_t q);
std::uint64_t euler_phi(const FactoredInt& f);
std::uint64_t divisor_count(const FactoredInt& f);
unsigned big_omega(const FactoredInt& f);

// All divisors in increasing order.
std::vector<std::uint64_t> divisors(std::uint64_t q);
std::vector<std::uint64_t> divisors(const FactoredInt& f);

// sum_{r | q} log2(r) / r, summed over divisors in increasing order in long
// double. err is d(q) * 2^-50.
Estimate F(std::uint64_t q);
long double F_term(std::uint64_t r);
long double F_error_bound(std::uint64_t d);

// Omega(q) <= (log2 q)^(1/2 + epsilon). A long double test settles almost
// every case; ties within 2^-40 go to MPFR with outward rounding.
Decision omega_support_decide(std::uint64_t q, const mpq_class& epsilon);
bool omega_support_filter(std::uint64_t q, const mpq_class& epsilon);

// The l with q/phi(q) in [2^l, 2^(l+1)).
unsigned dl_index(std::uint64_t q);
unsigned dl_index_from_phi(std::uint64_t q, std::uint64_t phi);
// The l with d in [2^l, 2^(l+1)).
unsigned floor_log2(std::uint64_t d);

class SieveTable {
 public:
  static constexpr std::uint64_t kDefaultLimit = 1000000;
  static constexpr char kMagic[10] = "MDLSIEVE1";

  explicit SieveTable(std::uint64_t limit = kDefaultLimit);

  std::uint64_t limit() const { return limit_; }
  std::uint32_t phi(std::uint64_t q) const { return phi_[q]; }
  std::uint32_t d(std::uint64_t q) const { return d_[q]; }
  std::uint8_t omega(std::uint64_t q) const { return omega_[q]; }
  std::uint32_t spf(std::uint64_t q) const { return spf_[q]; }

  FactoredInt factor(std::uint64_t q) const;

  // F(q) for all q <= limit; entry q equals F(q).value bit for bit.
  std::vector<long double> F_values(std::uint64_t upto) const;

  void save(const std::string& path) const;
  static SieveTable load(const std::string& path);

  bool operator==(const SieveTable& other) const;

 private:
  struct Empty {};
  explicit SieveTable(Empty) {}
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> phi_, d_, spf_;
  std::vector<std::uint8_t> omega_;
};

// Shared process-wide table, grown on demand.
const SieveTable& shared_sieve(std::uint64_t at_least);

struct FTailCount {
  std::uint64_t count = 0;
  std::uint64_t indeterminate = 0;
};

// #{q <= Q : F(q) > threshold}; entries within the error bound of the
// threshold are counted separately.
FTailCount f_tail_count(std::uint64_t Q, long double threshold);
FTailCount f_tail_count(const std::vector<long double>& F_table, std::uint64_t Q,
                        long double threshold);

struct ZetaConstants {
  unsigned K = 0;
  Estimate zeta2;
  std::optional<Estimate> zeta_k_minus_1;  // present for K >= 3
  Estimate neg_zeta_prime;                 // -zeta'(1 + 1/K)
  Estimate c_natural;                      // -zeta'(1 + 1/K) / K^2
  Estimate c_log2;                         // c_natural / ln 2, for log2-based F
};

ZetaConstants zeta_constants(unsigned K);

// Euler-Maclaurin evaluations with certified error.
Estimate zeta(long double s);
Estimate neg_zeta_prime(long double s);

}  // namespace mdl::arith
