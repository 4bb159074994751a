#include "mdl/rotation.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdl/errors.hpp"

namespace mdl::rotation {

namespace {

constexpr long double kLdEps = std::numeric_limits<long double>::epsilon();
constexpr long double kTwo128 = 340282366920938463463374607431768211456.0L;

mpz_class two_pow(unsigned e) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
  return r;
}

// Signed representative in (-2^127, 2^127]: the -1/2 point is read as +1/2.
mpz_class signed_numerator(u128 t) {
  const i128 s = static_cast<i128>(t);
  if (t == pow2_u128(127)) return two_pow(127);
  return to_mpz(s);
}

long double up(long double v) { return std::nextafter(v, std::numeric_limits<long double>::infinity()); }

Estimate from_bounds(long double lo, long double hi) {
  const long double v = lo / 2 + hi / 2;
  return {v, up(std::max(hi - v, v - lo))};
}

}  // namespace

Orbit::Orbit(const CertifiedReal& gamma, std::uint64_t N, int err_bits) : gamma_(gamma), n_(N) {
  const int extra = N <= 1 ? 1 : static_cast<int>(std::ceil(std::log2(static_cast<double>(N)))) + 1;
  base_ = realnum::to_torus128(gamma, err_bits + extra);
}

mpq_class Orbit::point(std::uint64_t q) const {
  mpq_class v(signed_numerator(raw(q)), two_pow(128));
  v.canonicalize();
  return v;
}

long double Orbit::point_ld(std::uint64_t q) const {
  const u128 t = raw(q);
  if (t == pow2_u128(127)) return 0.5L;
  return to_long_double(static_cast<i128>(t)) / kTwo128;
}

mpq_class Orbit::point_err(std::uint64_t q) const { return mpq_class(q) * base_.err; }

long double Orbit::point_err_ld(std::uint64_t q) const {
  return up(static_cast<long double>(q) * base_.err_ld * (1 + 2 * kLdEps));
}

IntervalCount count_in_interval(const Orbit& orbit, const Interval& I, std::uint64_t n) {
  if (n == 0) n = orbit.size();
  if (n > orbit.size()) throw InvalidArgument("count_in_interval: n exceeds orbit length");
  if (I.lo > I.hi) throw InvalidArgument("count_in_interval: empty interval bounds");
  IntervalCount c;
  const mpq_class scale(two_pow(128));
  const mpq_class lo = I.lo * scale, hi = I.hi * scale;
  for (std::uint64_t q = 1; q <= n; ++q) {
    const mpq_class p(signed_numerator(orbit.raw(q)));
    const mpq_class e = orbit.point_err(q) * scale;
    const mpq_class pl = p - e, ph = p + e;
    const bool inside_lo = I.lo_closed ? pl >= lo : pl > lo;
    const bool inside_hi = I.hi_closed ? ph <= hi : ph < hi;
    if (inside_lo && inside_hi) {
      ++c.count;
      continue;
    }
    const bool outside = (I.lo_closed ? ph < lo : ph <= lo) || (I.hi_closed ? pl > hi : pl >= hi);
    if (!outside) ++c.indeterminate;
  }
  return c;
}

Estimate Discrepancy::estimate() const {
  mpfr_t t;
  mpfr_init2(t, 64);
  mpfr_set_q(t, value.get_mpq_t(), MPFR_RNDN);
  const long double v = mpfr_get_ld(t, MPFR_RNDN);
  mpfr_clear(t);
  return {v, up(err + std::fabs(v) * kLdEps)};
}

namespace {

// Points shifted to [0,1) and truncated to 96 bits.
u128 unit_coordinate(u128 t) { return (t + pow2_u128(127)) >> 32; }

Discrepancy from_sorted(const std::vector<u128>& xs, long double point_err) {
  const std::uint64_t N = xs.size();
  Discrepancy d;
  d.N = N;
  const i128 n = static_cast<i128>(N);
  const i128 one = static_cast<i128>(pow2_u128(96));
  i128 mx = std::numeric_limits<i128>::min(), mn = std::numeric_limits<i128>::max();
  for (std::uint64_t i = 0; i < N; ++i) {
    // (i+1)/N - x_i scaled by N * 2^96
    const i128 v = static_cast<i128>(i + 1) * one - n * static_cast<i128>(xs[i]);
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  d.value = make_q(to_mpz(one + mx - mn), to_mpz(n * one));
  d.value.canonicalize();
  // truncation to 96 bits moves each point by < 2^-96
  d.err = up(2 * (point_err + std::ldexp(1.0L, -96)) * (1 + 4 * kLdEps));
  return d;
}

}  // namespace

Discrepancy exact_discrepancy(const Orbit& orbit, std::uint64_t n) {
  if (n == 0) n = orbit.size();
  if (n == 0 || n > orbit.size()) throw InvalidArgument("exact_discrepancy: bad prefix length");
  std::vector<u128> xs(n);
  for (std::uint64_t q = 1; q <= n; ++q) xs[q - 1] = unit_coordinate(orbit.raw(q));
  std::sort(xs.begin(), xs.end());
  return from_sorted(xs, orbit.point_err_ld(n));
}

std::vector<Discrepancy> discrepancy_series(const Orbit& orbit) {
  std::vector<Discrepancy> out;
  out.reserve(orbit.size());
  std::vector<u128> xs;
  xs.reserve(orbit.size());
  for (std::uint64_t q = 1; q <= orbit.size(); ++q) {
    const u128 x = unit_coordinate(orbit.raw(q));
    xs.insert(std::upper_bound(xs.begin(), xs.end(), x), x);
    out.push_back(from_sorted(xs, orbit.point_err_ld(q)));
  }
  return out;
}

EtkTable::EtkTable(const CertifiedReal& gamma, std::uint64_t H_max) {
  if (H_max == 0) throw InvalidArgument("etk_bound: H must be positive");
  const int extra = static_cast<int>(std::ceil(std::log2(static_cast<double>(H_max) + 1))) + 1;
  for (;;) {
    const realnum::TorusPoint base = realnum::to_torus128(gamma, 100 + extra);
    sum_lo_.clear();
    sums_.clear();
    sum_hi_.clear();
    dists_.clear();
    long double slo = 0, shi = 0;
    bool ok = true;
    for (std::uint64_t h = 1; h <= H_max; ++h) {
      const u128 t = static_cast<u128>(h) * base.t;
      const long double mag =
          t == pow2_u128(127) ? 0.5L : std::fabs(to_long_double(static_cast<i128>(t)) / kTwo128);
      const long double e = up(static_cast<long double>(h) * base.err_ld * (1 + 2 * kLdEps) +
                               mag * kLdEps);
      const long double dlo = mag - e, dhi = std::min(0.5L, mag + e);
      if (!(dlo > 0)) {
        ok = false;
        break;
      }
      dists_.push_back({mag, e});
      const long double hh = static_cast<long double>(h);
      slo += 1 / (hh * dhi) * (1 - 4 * kLdEps);
      shi += 1 / (hh * dlo) * (1 + 4 * kLdEps);
      sum_lo_.push_back(slo * (1 - h * kLdEps));
      sum_hi_.push_back(shi * (1 + h * kLdEps));
      sums_.push_back(slo / 2 + shi / 2);
    }
    if (ok) return;
    if (!gamma.refine_once())
      throw IndeterminateAtPrecision("etk_bound: ||h gamma|| not certified nonzero for " +
                                     gamma.label());
  }
}

Estimate EtkTable::bound(std::uint64_t N, std::uint64_t H) const {
  if (N == 0 || H == 0 || H > sums_.size()) throw InvalidArgument("etk_bound: bad N or H");
  const long double n = static_cast<long double>(N), h = static_cast<long double>(H);
  const long double lo = (3 / h + 12 * sum_lo_[H - 1] / n) * (1 - 4 * kLdEps);
  const long double hi = (3 / h + 12 * sum_hi_[H - 1] / n) * (1 + 4 * kLdEps);
  return from_bounds(lo, hi);
}

Estimate etk_bound(const CertifiedReal& gamma, std::uint64_t N, std::uint64_t H) {
  return EtkTable(gamma, H).bound(N, H);
}

Bound72Report verify_72_bound(const CertifiedReal& gamma, std::uint64_t N_lo,
                              std::uint64_t N_hi, std::uint64_t Q, SigmaMode mode) {
  if (N_lo == 0 || N_lo > N_hi) throw InvalidArgument("verify_72_bound: bad N range");
  if (mode == SigmaMode::AtQ && N_hi > Q)
    throw InvalidArgument("verify_72_bound: N range must lie below Q");
  const std::uint64_t sig_max = std::max<std::uint64_t>(2, mode == SigmaMode::AtQ ? Q : N_hi);
  const auto sig = realnum::sigma_series(gamma, sig_max);
  const Orbit orbit(gamma, N_hi);
  const auto disc = discrepancy_series(orbit);

  Bound72Report rep;
  for (std::uint64_t N = N_lo; N <= N_hi; ++N) {
    Bound72Row row;
    row.N = N;
    const std::uint64_t sQ = mode == SigmaMode::AtQ ? Q : std::max<std::uint64_t>(N, 2);
    row.sigma = sig[sQ - 2].sigma;
    const Estimate d = disc[N - 1].estimate();
    const long double n = static_cast<long double>(N);
    row.scaled_discrepancy = {d.value * n, up((d.err + std::fabs(d.value) * kLdEps) * n)};
    auto bound_at = [&](long double s) { return 72 * std::pow(n, s / (1 + s)); };
    const long double blo = bound_at(row.sigma.lo()) * (1 - 16 * kLdEps);
    const long double bhi = bound_at(row.sigma.hi()) * (1 + 16 * kLdEps);
    row.bound = from_bounds(blo, bhi);
    if (row.scaled_discrepancy.hi() <= blo)
      row.pass = Decision::True;
    else if (row.scaled_discrepancy.lo() > bhi)
      row.pass = Decision::False;
    else
      row.pass = Decision::Indeterminate;
    row.asserted = N >= kBound72MinN;
    if (row.asserted && row.pass == Decision::False) ++rep.failures;
    if (row.asserted && row.pass == Decision::Indeterminate) ++rep.indeterminate;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace mdl::rotation
