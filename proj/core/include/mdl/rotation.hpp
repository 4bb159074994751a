#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "mdl/estimate.hpp"
#include "mdl/int128.hpp"
#include "mdl/realnum.hpp"

namespace mdl::rotation {

using realnum::CertifiedReal;

// The points {q gamma}, q = 1..N, each as an exact 2^-128 fraction. Point q
// is q * G mod 2^128 for the rounded base G, so its error is q * err(G).
class Orbit {
 public:
  Orbit(const CertifiedReal& gamma, std::uint64_t N, int err_bits = 80);

  std::uint64_t size() const { return n_; }
  const CertifiedReal& gamma() const { return gamma_; }

  // Raw torus coordinate of point q (1-based).
  u128 raw(std::uint64_t q) const { return static_cast<u128>(q) * base_.t; }
  // {q gamma_hat} in (-1/2, 1/2], exact.
  mpq_class point(std::uint64_t q) const;
  long double point_ld(std::uint64_t q) const;
  mpq_class point_err(std::uint64_t q) const;
  long double point_err_ld(std::uint64_t q) const;
  long double max_err_ld() const { return point_err_ld(n_); }

 private:
  CertifiedReal gamma_;
  std::uint64_t n_;
  realnum::TorusPoint base_;
};

struct Interval {
  mpq_class lo, hi;
  bool lo_closed = false, hi_closed = false;

  mpq_class length() const { return hi - lo; }
};

struct IntervalCount {
  std::uint64_t count = 0;
  std::uint64_t indeterminate = 0;
};

// Counts q <= n (default: the whole orbit) with {q gamma} in I.
IntervalCount count_in_interval(const Orbit& orbit, const Interval& I, std::uint64_t n = 0);

struct Discrepancy {
  std::uint64_t N = 0;
  mpq_class value;      // exact extreme discrepancy of the point set used
  long double err = 0;  // bound on the distance to the true orbit's value
  Estimate estimate() const;
};

// Extreme discrepancy over intervals of the torus; equal to the usual
// 1/N + max(i/N - x_i) - min(i/N - x_i) on the sorted points.
Discrepancy exact_discrepancy(const Orbit& orbit, std::uint64_t n = 0);
// Every prefix N = 1..orbit.size(); entry N-1 holds D(N).
std::vector<Discrepancy> discrepancy_series(const Orbit& orbit);

// Prefix sums of 1/(h ||h gamma||) for h = 1..H_max.
class EtkTable {
 public:
  EtkTable(const CertifiedReal& gamma, std::uint64_t H_max);
  std::uint64_t H_max() const { return sums_.size(); }
  Estimate bound(std::uint64_t N, std::uint64_t H) const;
  Estimate dist(std::uint64_t h) const { return dists_.at(h - 1); }

 private:
  std::vector<long double> sum_lo_, sums_, sum_hi_;
  std::vector<Estimate> dists_;
};

// 3/H + (12/N) sum_{h<=H} 1/(h ||h gamma||).
Estimate etk_bound(const CertifiedReal& gamma, std::uint64_t N, std::uint64_t H);

enum class SigmaMode { AtQ, PerN };

struct Bound72Row {
  std::uint64_t N = 0;
  Estimate scaled_discrepancy;  // N * D(N)
  Estimate bound;               // 72 * N^(sigma/(1+sigma))
  Estimate sigma;
  Decision pass = Decision::Indeterminate;
  bool asserted = false;  // N >= 100
};

struct Bound72Report {
  std::vector<Bound72Row> rows;
  std::uint64_t failures = 0;       // asserted rows certified to fail
  std::uint64_t indeterminate = 0;  // asserted rows not decided
};

// N in [N_lo, N_hi]; sigma from sigma_of_Q at Q (AtQ) or at N (PerN).
Bound72Report verify_72_bound(const CertifiedReal& gamma, std::uint64_t N_lo,
                              std::uint64_t N_hi, std::uint64_t Q,
                              SigmaMode mode = SigmaMode::AtQ);

inline constexpr std::uint64_t kBound72MinN = 100;

}  // namespace mdl::rotation
