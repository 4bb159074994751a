#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/approxfun.hpp"
#include "mdl/estimate.hpp"
#include "mdl/int128.hpp"
#include "mdl/realnum.hpp"

namespace mdl::intervals {

using approxfun::ApproxFunction;
using realnum::CertifiedReal;

// Open interval (a, b) with 0 <= a < b <= 1.
struct Component {
  mpq_class a, b;
  bool operator==(const Component& o) const { return a == o.a && b == o.b; }
};

// Finite union of disjoint open intervals in [0, 1], sorted. Intervals that
// only share an endpoint are kept apart.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  // Clips to [0, 1], drops empty pieces, and merges pieces that overlap.
  static IntervalUnion from_components(std::vector<Component> parts);
  // Parts already clipped, nonempty, sorted and pairwise disjoint.
  static IntervalUnion from_sorted_disjoint(std::vector<Component> parts);

  const std::vector<Component>& components() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  mpq_class measure() const;
  bool valid() const;

  // One component per line: "num_a/den_a num_b/den_b".
  std::string dump() const;
  static IntervalUnion parse_dump(const std::string& text);

  bool operator==(const IntervalUnion& o) const { return parts_ == o.parts_; }

 private:
  std::vector<Component> parts_;
};

mpq_class measure(const IntervalUnion& u);
IntervalUnion intersect(const IntervalUnion& u, const IntervalUnion& v);
IntervalUnion unite(const IntervalUnion& u, const IntervalUnion& v);

// A_q = {x in [0,1] : ||q x - gamma_hat|| < psi} for exact psi and gamma_hat.
IntervalUnion build_Aq_exact(std::uint64_t q, const mpq_class& psi_q, const mpq_class& gamma_hat);

struct AqSet {
  IntervalUnion set;
  mpq_class psi;
  mpq_class gamma_hat;
  mpq_class perturbation;  // err(gamma_hat) / q: bound on every endpoint shift
};

AqSet build_Aq(std::uint64_t q, const ApproxFunction& psi, const CertifiedReal& gamma);

// g * S / (q q' Dn) is |A_q cap A_q'| where S sums max(0, min(D - |j step + delta|, M))
// over all j: D = q' P + q P', M = 2 min(P q', P' q), delta = G (q' - q), step = g Dn,
// for psi = P/Dn, psi' = P'/Dn, gamma = G/Dn.
i128 lattice_sum(i128 D, i128 M, i128 delta, i128 step);
mpz_class lattice_sum(const mpz_class& D, const mpz_class& M, const mpz_class& delta,
                      const mpz_class& step);

// Exact pair measure with circle lattice counting, generic rationals.
mpq_class pair_measure_exact(std::uint64_t q, std::uint64_t q2, const mpq_class& psi_q,
                             const mpq_class& psi_q2, const mpq_class& gamma_hat);

// Shared state for many pair computations with one psi and one gamma.
class PairKernel {
 public:
  PairKernel(const ApproxFunction& psi, const CertifiedReal& gamma, std::uint64_t q_max,
             unsigned threads = 1);

  bool grid() const { return grid_; }
  std::uint64_t q_max() const { return q_max_; }
  const mpq_class& gamma_hat() const { return gamma_hat_; }
  const mpq_class& gamma_err() const { return gamma_err_; }
  long double gamma_err_ld() const { return gamma_err_ld_; }
  u128 G() const { return G_; }
  u128 P(std::uint64_t q) const { return (*table_)[q]; }
  const std::vector<u128>& P_table() const { return *table_; }
  mpq_class psi(std::uint64_t q) const;

  // g * S with S from lattice_sum (grid only): measure = value / (q q2 2^96).
  i128 scaled_pair_grid(std::uint64_t q, std::uint64_t q2) const;
  mpq_class measure(std::uint64_t q, std::uint64_t q2) const;
  mpq_class delta(std::uint64_t q, std::uint64_t q2) const;

  // chi_{B(0, Delta/g)}({gamma (q2 - q)/g}) with strict inequality. The
  // value at gamma_hat is returned in hat_value; the verdict is Indeterminate
  // when the true gamma may fall on the other side.
  Decision chi(std::uint64_t q, std::uint64_t q2, bool* hat_value = nullptr) const;

 private:
  ApproxFunction psi_;
  std::uint64_t q_max_;
  bool grid_ = false;
  u128 G_ = 0;
  mpq_class gamma_hat_, gamma_err_;
  long double gamma_err_ld_ = 0;
  std::shared_ptr<const std::vector<u128>> table_;
  std::vector<mpq_class> exact_;  // non-grid psi values
};

struct PairContext {
  std::uint64_t q = 0, q2 = 0, g = 0;
  mpq_class measure;
  mpq_class psi_q, psi_q2;
  mpq_class delta;         // q psi(q2) + q2 psi(q)
  mpq_class delta_over_g;  // radius of the ball in the master estimate
  bool branch1 = false;    // Delta < H g
  mpq_class perturbation;  // err(gamma_hat) * max(1/q, 1/q2)
};

PairContext pairwise_intersection_measure(std::uint64_t q, std::uint64_t q2,
                                          const ApproxFunction& psi, const CertifiedReal& gamma,
                                          unsigned H = 4);

inline constexpr std::uint64_t kGridQMax = 1ull << 14;

// Exact |union_{q in [q_lo, q_hi]} A_q| on the 2^-96 grid by a chunked sweep.
mpq_class union_measure_grid(const std::vector<u128>& P, std::uint64_t q_lo, std::uint64_t q_hi,
                             u128 G, unsigned threads = 1, unsigned chunk_bits = 12);
// Same quantity through explicit interval unions.
mpq_class union_measure_generic(const ApproxFunction& psi, const CertifiedReal& gamma,
                                std::uint64_t q_lo, std::uint64_t q_hi);

struct ProductBox {
  std::vector<IntervalUnion> factors;
  mpq_class measure() const;
};

ProductBox box_ops(unsigned k, std::uint64_t q, const ApproxFunction& psi,
                   const std::vector<CertifiedReal>& gammas);
mpq_class box_pair_intersection_measure(std::uint64_t q, std::uint64_t q2,
                                        const ApproxFunction& psi,
                                        const std::vector<CertifiedReal>& gammas);

}  // namespace mdl::intervals
