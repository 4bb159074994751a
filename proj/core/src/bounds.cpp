#include "mdl/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl::bounds {

using intervals::PairKernel;

namespace {

mpq_class q_of(std::uint64_t v) { return mpq_class(static_cast<unsigned long>(v)); }

mpq_class min_psi_over_q(const mpq_class& a, std::uint64_t q, const mpq_class& b, std::uint64_t q2) {
  const mpq_class x = a / q_of(q), y = b / q_of(q2);
  return x < y ? x : y;
}

MasterRow master_row(std::uint64_t qs, std::uint64_t q, unsigned H, const PairKernel& k) {
  MasterRow row;
  row.q_small = qs;
  row.q = q;
  row.g = arith::gcd(qs, q);
  row.measure = k.measure(qs, q);
  row.delta = k.delta(qs, q);
  row.branch1 = row.delta < q_of(static_cast<std::uint64_t>(H) * row.g);
  const mpq_class pq = k.psi(q), ps = k.psi(qs);
  if (row.branch1) {
    row.chi = k.chi(q, qs, &row.chi_hat);
    const mpq_class base = mpq_class(2 * (2 * H + 1)) * min_psi_over_q(pq, q, ps, qs) * q_of(row.g);
    row.rhs = row.chi_hat ? base : mpq_class(0);
    if (row.measure <= row.rhs) {
      // A vanishing measure cannot violate the bound whatever chi is.
      row.pass = (row.chi == Decision::Indeterminate && sgn(row.measure) > 0) ? Decision::Indeterminate
                                                                              : Decision::True;
    } else {
      row.pass = row.chi == Decision::Indeterminate ? Decision::Indeterminate : Decision::False;
    }
  } else {
    row.rhs = 4 * pq * ps;
    row.pass = Decision::True;
    if (sgn(row.rhs) > 0) {
      mpq_class c = mpq_class(2 * H) * (row.measure / row.rhs - 1);
      row.c0_implied = sgn(c) > 0 ? c : mpq_class(0);
    }
  }
  return row;
}

// Grid fast path of master_row for the scan: only the verdict and C0 are needed.
struct FastVerdict {
  bool branch1;
  Decision pass;
  bool have_c0;
};

FastVerdict fast_master(std::uint64_t qs, std::uint64_t q, unsigned H, const PairKernel& k) {
  const std::uint64_t g = arith::gcd(qs, q);
  const u128 P = k.P(q), Ps = k.P(qs);
  // Delta * 2^96 = qs P + q Ps; compare with H g 2^96.
  const u128 D = static_cast<u128>(qs) * P + static_cast<u128>(q) * Ps;
  const bool b1 = D < static_cast<u128>(H) * g * pow2_u128(96);
  FastVerdict v{b1, Decision::True, false};
  if (!b1) {
    v.have_c0 = P != 0 && Ps != 0;
    return v;
  }
  const i128 S = k.scaled_pair_grid(qs, q);  // measure * qs q 2^96
  if (S == 0) return v;
  bool hat = false;
  const Decision chi = k.chi(q, qs, &hat);
  // rhs * qs q 2^96 = 2(2H+1) g min(P qs, Ps q) chi.
  const u128 m = std::min(P * qs, Ps * q);
  const u128 rhs = hat ? static_cast<u128>(2 * (2 * H + 1)) * g * m : 0;
  const bool ok = static_cast<u128>(S) <= rhs;
  if (chi == Decision::Indeterminate) v.pass = Decision::Indeterminate;
  else v.pass = ok ? Decision::True : Decision::False;
  return v;
}

std::uint64_t ilog2(std::uint64_t v) { return 63 - static_cast<std::uint64_t>(__builtin_clzll(v)); }

}  // namespace

void BoundsConfig::validate() const {
  if (H <= 2) throw InvalidArgument("H must be an integer > 2");
  if (sgn(kappa) <= 0 || kappa >= mpq_class(1, 3)) throw InvalidArgument("kappa must lie in (0, 1/3)");
}

MasterRow master_check(std::uint64_t q_small, std::uint64_t q, const BoundsConfig& cfg) {
  cfg.validate();
  if (q_small == 0 || q_small >= q) throw InvalidArgument("master_check needs 1 <= q' < q");
  const PairKernel k(cfg.psi, cfg.gamma, q);
  return master_row(q_small, q, cfg.H, k);
}

MasterScan master_scan(std::uint64_t q_max, const BoundsConfig& cfg) {
  cfg.validate();
  MasterScan scan;
  if (q_max < 2) return scan;
  const PairKernel k(cfg.psi, cfg.gamma, q_max, cfg.threads);
  struct Part {
    std::vector<MasterQStats> stats;
    std::vector<MasterRow> failing;
  };
  Part all = parallel_reduce<Part>(
      2, q_max + 1, 16, cfg.threads, Part{},
      [&](std::uint64_t b, std::uint64_t e) {
        Part p;
        for (std::uint64_t q = b; q < e; ++q) {
          MasterQStats st;
          st.q = q;
          for (std::uint64_t qs = 1; qs < q; ++qs) {
            ++st.pairs;
            Decision pass;
            bool b1;
            bool need_c0;
            if (k.grid()) {
              const FastVerdict v = fast_master(qs, q, cfg.H, k);
              pass = v.pass;
              b1 = v.branch1;
              need_c0 = v.have_c0;
            } else {
              MasterRow r = master_row(qs, q, cfg.H, k);
              pass = r.pass;
              b1 = r.branch1;
              need_c0 = false;
              if (!b1 && r.c0_implied > st.max_c0_implied) st.max_c0_implied = r.c0_implied;
              if (pass == Decision::False && p.failing.size() < 100) p.failing.push_back(r);
            }
            if (b1) ++st.branch1;
            else ++st.branch2;
            if (pass == Decision::False) {
              ++st.failures;
              if (k.grid() && p.failing.size() < 100) p.failing.push_back(master_row(qs, q, cfg.H, k));
            }
            if (pass == Decision::Indeterminate) ++st.indeterminate;
            if (need_c0) {
              const MasterRow r = master_row(qs, q, cfg.H, k);
              if (r.c0_implied > st.max_c0_implied) st.max_c0_implied = r.c0_implied;
            }
          }
          p.stats.push_back(std::move(st));
        }
        return p;
      },
      [](Part a, Part b) {
        for (auto& s : b.stats) a.stats.push_back(std::move(s));
        for (auto& f : b.failing)
          if (a.failing.size() < 100) a.failing.push_back(std::move(f));
        return a;
      });
  scan.per_q = std::move(all.stats);
  scan.failing = std::move(all.failing);
  for (const auto& st : scan.per_q) {
    scan.pairs += st.pairs;
    scan.branch1 += st.branch1;
    scan.branch2 += st.branch2;
    scan.failures += st.failures;
    scan.indeterminate += st.indeterminate;
    if (st.max_c0_implied > scan.max_c0_implied) {
      scan.max_c0_implied = st.max_c0_implied;
      scan.max_c0_q = st.q;
    }
  }
  if (scan.max_c0_q != 0) {
    for (std::uint64_t qs = 1; qs < scan.max_c0_q; ++qs) {
      const MasterRow r = master_row(qs, scan.max_c0_q, cfg.H, k);
      if (!r.branch1 && r.c0_implied == scan.max_c0_implied) {
        scan.max_c0_q_small = qs;
        break;
      }
    }
  }
  return scan;
}

namespace {

struct HarmanPart {
  mpq_class sup;
  std::uint64_t qs = 0, q = 0, pairs = 0;
};

HarmanPart harman_rows(std::uint64_t q, const PairKernel& k) {
  HarmanPart h;
  const mpq_class pq = k.psi(q);
  if (sgn(pq) == 0) return h;
  for (std::uint64_t qs = 1; qs < q; ++qs) {
    const mpq_class ps = k.psi(qs);
    if (sgn(ps) == 0) continue;
    ++h.pairs;
    const mpq_class den = q_of(arith::gcd(qs, q)) * min_psi_over_q(pq, q, ps, qs);
    const mpq_class ratio = abs(k.measure(qs, q) - 4 * pq * ps) / den;
    if (h.q == 0 || ratio > h.sup) {
      h.sup = ratio;
      h.qs = qs;
      h.q = q;
    }
  }
  return h;
}

HarmanPart harman_fold(HarmanPart a, const HarmanPart& b) {
  a.pairs += b.pairs;
  if (b.q != 0 && (a.q == 0 || b.sup > a.sup)) {
    a.sup = b.sup;
    a.qs = b.qs;
    a.q = b.q;
  }
  return a;
}

}  // namespace

HarmanEstimate harman_c0_estimate(std::uint64_t q_max, const ApproxFunction& psi,
                                  const CertifiedReal& gamma, unsigned threads) {
  auto s = harman_c0_series({q_max}, psi, gamma, threads);
  return s.front();
}

std::vector<HarmanEstimate> harman_c0_series(const std::vector<std::uint64_t>& q_max_list,
                                             const ApproxFunction& psi,
                                             const CertifiedReal& gamma, unsigned threads) {
  std::uint64_t top = 2;
  for (auto v : q_max_list) top = std::max(top, v);
  for (std::size_t i = 1; i < q_max_list.size(); ++i)
    if (q_max_list[i] <= q_max_list[i - 1]) throw InvalidArgument("q_max list must increase");
  const PairKernel k(psi, gamma, top, threads);
  std::vector<HarmanPart> per_q = parallel_reduce<std::vector<HarmanPart>>(
      2, top + 1, 8, threads, {},
      [&](std::uint64_t b, std::uint64_t e) {
        std::vector<HarmanPart> v;
        for (std::uint64_t q = b; q < e; ++q) v.push_back(harman_rows(q, k));
        return v;
      },
      [](std::vector<HarmanPart> a, std::vector<HarmanPart> b) {
        for (auto& x : b) a.push_back(std::move(x));
        return a;
      });
  std::vector<HarmanEstimate> out;
  HarmanPart acc;
  std::uint64_t q = 2;
  for (auto Qm : q_max_list) {
    for (; q <= Qm; ++q) acc = harman_fold(std::move(acc), per_q[q - 2]);
    HarmanEstimate h;
    h.sup = acc.sup;
    h.q_small = acc.qs;
    h.q = acc.q;
    h.pairs = acc.pairs;
    out.push_back(h);
  }
  return out;
}

mpq_class CountingSum::value() const { return psi_q / q_of(q) * q_of(gsum); }
mpq_class CountingSum::value_lo() const { return psi_q / q_of(q) * q_of(gsum_lo); }
mpq_class CountingSum::value_hi() const { return psi_q / q_of(q) * q_of(gsum_hi); }

CountingSum counting_sum(std::uint64_t q, const PairKernel& k) {
  CountingSum s;
  s.q = q;
  s.psi_q = k.psi(q);
  if (sgn(s.psi_q) == 0) return s;
  for (std::uint64_t qs = 1; qs < q; ++qs) {
    bool hat = false;
    const Decision d = k.chi(q, qs, &hat);
    const std::uint64_t g = arith::gcd(qs, q);
    if (hat) s.gsum += g;
    if (d == Decision::True) s.gsum_lo += g;
    if (d != Decision::False) s.gsum_hi += g;
    if (d == Decision::Indeterminate) ++s.indeterminate;
  }
  return s;
}

CountingSum counting_sum(std::uint64_t q, const ApproxFunction& psi, const CertifiedReal& gamma) {
  if (q == 0) throw InvalidArgument("q must be positive");
  const PairKernel k(psi, gamma, q);
  return counting_sum(q, k);
}

CountingDecomposition counting_decomposition(std::uint64_t q, const PairKernel& k,
                                             const mpq_class& kappa) {
  if (q == 0) throw InvalidArgument("q must be positive");
  CountingDecomposition dc;
  dc.q = q;
  const mpq_class pq = k.psi(q);
  const mpq_class w = pq / q_of(q);
  const long double log2q = std::log2(static_cast<long double>(q));
  const long double kappa_ld = static_cast<long double>(kappa.get_d());
  const auto z2 = arith::zeta(2.0L);
  const long double pq_ld = static_cast<long double>(pq.get_d());
  dc.zeta2_psi = {z2.value * pq_ld, z2.err * pq_ld + std::abs(z2.value * pq_ld) * 1e-16L};
  const unsigned kmax = q >= 2 ? static_cast<unsigned>(ilog2(q)) : 0;
  for (std::uint64_t r : arith::divisors(q)) {
    if (r == q) continue;  // q' < q forces gcd < q
    for (unsigned kk = 0; kk <= kmax; ++kk) {
      DecompositionCell cell;
      cell.r = r;
      cell.k = kk;
      // q' = r s with q' / q in [2^-k-1, 2^-k): s in [ceil(q / (r 2^(k+1))), ceil(q / (r 2^k)) - 1].
      const std::uint64_t m = q / r;  // q / r
      const std::uint64_t s_lo = std::max<std::uint64_t>(1, (m + (1ull << (kk + 1)) - 1) >> (kk + 1));
      const std::uint64_t s_hi = ((m + (1ull << kk) - 1) >> kk) - 1;
      // I_{k,r} radius.
      const long double base = static_cast<long double>(q) / std::ldexp(1.0L, static_cast<int>(kk + 1));
      cell.interval_defined = base > 4;
      long double ll = 0;
      if (cell.interval_defined) {
        ll = std::log2(std::log2(base));
        cell.radius = std::ldexp(1.0L, static_cast<int>(kk + 2)) / (static_cast<long double>(r) * ll * ll);
      }
      for (std::uint64_t s = s_lo; s <= s_hi && s_lo <= s_hi; ++s) {
        const std::uint64_t qs = r * s;
        // Membership in I_{k,r}: |{gamma (s - q/r)}| < radius.
        if (cell.interval_defined) {
          const std::int64_t n = static_cast<std::int64_t>(s) - static_cast<std::int64_t>(m);
          long double f;
          if (k.grid()) {
            const u128 y = (static_cast<u128>(static_cast<i128>(n)) * k.G()) & (pow2_u128(96) - 1);
            const i128 sy = y >= pow2_u128(95) ? static_cast<i128>(y) - static_cast<i128>(pow2_u128(96))
                                               : static_cast<i128>(y);
            f = std::ldexp(to_long_double(abs_i128(sy)), -96);
          } else {
            const mpq_class x = k.gamma_hat() * mpq_class(static_cast<long>(n));
            f = static_cast<long double>(mpq_class(abs(realnum::signed_frac(x))).get_d());
          }
          const long double margin = static_cast<long double>(n < 0 ? -n : n) * k.gamma_err_ld() +
                                     (f + cell.radius) * 1e-15L;
          if (f < cell.radius) ++cell.S;
          if (f + margin < cell.radius) ++cell.S_lo;
          if (f - margin < cell.radius) ++cell.S_hi;
        }
        if (arith::gcd(qs, q) != r) continue;
        ++cell.size;
        bool hat = false;
        const Decision d = k.chi(q, qs, &hat);
        if (hat) ++cell.hits;
        if (d == Decision::True) ++cell.hits_lo;
        if (d != Decision::False) ++cell.hits_hi;
        if (d == Decision::Indeterminate) ++dc.indeterminate;
        if (hat && qs * qs < q) dc.tail_small += w * q_of(r);
      }
      if (cell.size == 0 && cell.S_hi == 0) continue;
      cell.contribution = w * q_of(r) * q_of(cell.hits);
      if (cell.interval_defined) {
        if (cell.hits_lo > cell.S_hi) cell.hits_within_S = Decision::False;
        else if (cell.hits_hi > cell.S_lo) cell.hits_within_S = Decision::Indeterminate;
        if (cell.hits_within_S == Decision::False) ++dc.S_violations;
      }
      dc.total += cell.contribution;
      if ((1ull << kk) <= r * r) dc.low_levels += cell.contribution;
      else dc.high_levels += cell.contribution;
      if (static_cast<long double>(kk) <= kappa_ld * log2q) dc.kappa_low += cell.contribution;
      else dc.kappa_high += cell.contribution;
      dc.cells.push_back(std::move(cell));
    }
  }
  return dc;
}

CountingDecomposition counting_decomposition(std::uint64_t q, const ApproxFunction& psi,
                                             const CertifiedReal& gamma, const mpq_class& kappa) {
  if (q == 0) throw InvalidArgument("q must be positive");
  const PairKernel k(psi, gamma, q);
  return counting_decomposition(q, k, kappa);
}

namespace {

RatioRow ratio_row(std::uint64_t q, const PairKernel& k) {
  RatioRow row;
  row.q = q;
  const CountingSum s = counting_sum(q, k);
  row.S = s.value();
  row.indeterminate = s.indeterminate;
  if (s.gsum == 0) return row;
  // S / psi = gsum / q, exact; the denominator carries the float error.
  const long double num = static_cast<long double>(s.gsum) / static_cast<long double>(q);
  const Estimate F = arith::F(q);
  const long double ll = std::log2(std::log2(static_cast<long double>(q)));
  const long double l2 = ll * ll;
  const long double den = F.value / l2 + 1;
  const long double den_err = F.err / l2 + (F.value / l2) * 8e-19L + den * 2e-19L;
  row.ratio.value = num / den;
  row.ratio.err = row.ratio.value * (den_err / den + 4e-19L);
  return row;
}

RatioReport ratio_scan(const std::vector<std::uint64_t>& qs_list, const PairKernel& k,
                       unsigned threads) {
  RatioReport rep;
  rep.rows = parallel_reduce<std::vector<RatioRow>>(
      0, qs_list.size(), 16, threads, {},
      [&](std::uint64_t b, std::uint64_t e) {
        std::vector<RatioRow> v;
        for (std::uint64_t i = b; i < e; ++i) v.push_back(ratio_row(qs_list[i], k));
        return v;
      },
      [](std::vector<RatioRow> a, std::vector<RatioRow> b) {
        for (auto& x : b) a.push_back(std::move(x));
        return a;
      });
  for (const auto& r : rep.rows) {
    rep.indeterminate += r.indeterminate;
    if (rep.argmax == 0 || r.ratio.value > rep.max_ratio.value) {
      rep.max_ratio = r.ratio;
      rep.argmax = r.q;
    }
  }
  return rep;
}

}  // namespace

RatioReport counting_lemma_ratio(std::uint64_t q_lo, std::uint64_t q_hi, const ApproxFunction& psi,
                                 const CertifiedReal& gamma, unsigned threads) {
  if (q_lo < 16) throw InvalidArgument("counting_lemma_ratio needs q >= 16");
  RatioReport rep;
  if (q_hi < q_lo) return rep;
  const PairKernel k(psi, gamma, q_hi, threads);
  std::vector<std::uint64_t> qs;
  for (std::uint64_t q = q_lo; q <= q_hi; ++q)
    if (sgn(k.psi(q)) > 0) qs.push_back(q);
  return ratio_scan(qs, k, threads);
}

RatioReport counting_lemma_ratio_wild(std::uint64_t Q_scan_max, std::uint64_t q_budget,
                                      const ApproxFunction& psi, const CertifiedReal& gamma,
                                      unsigned threads) {
  RatioReport rep;
  rep.wild = true;
  auto sigma_fn = [](std::uint64_t Q) {
    return static_cast<unsigned>(std::ceil(std::pow(std::log2(static_cast<long double>(std::max<std::uint64_t>(Q, 2))), 0.125L))) + 1;
  };
  const auto scan = realnum::liouville_set_scan(gamma, Q_scan_max, sigma_fn, 2);
  std::vector<std::uint64_t> qs;
  for (std::uint64_t Q : scan.members) {
    const auto prof = realnum::sigma_of_Q(gamma, Q);
    WildWindow w;
    w.Q = Q;
    w.lo = std::pow(static_cast<long double>(Q), 7.0L);
    w.hi = std::pow(static_cast<long double>(Q), prof.sigma.lo() / 2);
    w.empty = w.lo > w.hi;
    rep.windows.push_back(w);
    if (w.empty) continue;
    const long double top = std::min<long double>(w.hi, static_cast<long double>(q_budget));
    for (std::uint64_t q = std::max<std::uint64_t>(16, static_cast<std::uint64_t>(std::ceil(w.lo)));
         static_cast<long double>(q) <= top; ++q)
      qs.push_back(q);
  }
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  if (qs.empty()) {
    rep.note = scan.members.empty()
                   ? "no Q in L_gamma up to the scan limit; the wild counting range is empty"
                   : "every window [Q^7, Q^(sigma(Q)/2)] is empty or beyond the budget";
    return rep;
  }
  const PairKernel k(psi, gamma, qs.back(), threads);
  std::vector<std::uint64_t> kept;
  for (auto q : qs)
    if (sgn(k.psi(q)) > 0) kept.push_back(q);
  RatioReport r = ratio_scan(kept, k, threads);
  r.wild = true;
  r.windows = std::move(rep.windows);
  return r;
}

FMomentCheck f_moment_tail_check(std::uint64_t Q, unsigned K) {
  if (K == 0 || K > 8) throw InvalidArgument("K must lie in [1, 8]");
  if (Q == 0 || Q > 1000000) throw InvalidArgument("Q must lie in [1, 10^6]");
  FMomentCheck c;
  c.Q = Q;
  c.K = K;
  const auto zc = arith::zeta_constants(K);
  c.C = zc.c_log2;
  const auto& sieve = arith::shared_sieve(Q);
  const auto Fv = sieve.F_values(Q);
  // Neumaier sum of F^K with a running error bound.
  long double s = 0, comp = 0, err = 0;
  const long double eps = std::ldexp(1.0L, -63);
  for (std::uint64_t q = 1; q <= Q; ++q) {
    const long double f = Fv[q];
    const long double fe = arith::F_error_bound(sieve.d(q));
    long double p = 1;
    for (unsigned i = 0; i < K; ++i) p *= f;
    // (f + fe)^K - f^K and the K roundings of the power.
    long double pu = 1;
    for (unsigned i = 0; i < K; ++i) pu *= (f + fe);
    err += (pu - p) * (1 + 4 * eps) + p * (K + 1) * eps;
    const long double t = s + p;
    if (std::abs(s) >= std::abs(p)) comp += (s - t) + p;
    else comp += (p - t) + s;
    s = t;
  }
  c.moment.value = s + comp;
  c.moment.err = err + std::abs(c.moment.value) * 4 * eps + static_cast<long double>(Q) * eps * eps * std::abs(c.moment.value);
  const long double K2 = static_cast<long double>(K) * K;
  auto powK = [K](long double x) {
    long double p = 1;
    for (unsigned i = 0; i < K; ++i) p *= x;
    return p;
  };
  const long double rhs_lo = static_cast<long double>(Q) * powK(c.C.lo() * K2) * (1 - 16 * eps);
  const long double rhs_hi = static_cast<long double>(Q) * powK(c.C.hi() * K2) * (1 + 16 * eps);
  c.rhs.value = (rhs_lo + rhs_hi) / 2;
  c.rhs.err = (rhs_hi - rhs_lo) / 2;
  if (c.moment.hi() <= rhs_lo) c.moment_ok = Decision::True;
  else if (c.moment.lo() > rhs_hi) c.moment_ok = Decision::False;
  else c.moment_ok = Decision::Indeterminate;
  // A lower threshold can only enlarge the count, so the verdict stays sound.
  c.threshold = 2 * c.C.lo() * K2 * (1 - 4 * eps);
  c.tail = arith::f_tail_count(Fv, Q, c.threshold);
  c.tail_limit = std::ldexp(static_cast<long double>(Q), -static_cast<int>(K));
  const long double tail_max = static_cast<long double>(c.tail.count + c.tail.indeterminate);
  if (tail_max <= c.tail_limit) c.tail_ok = Decision::True;
  else if (static_cast<long double>(c.tail.count) > c.tail_limit) c.tail_ok = Decision::False;
  else c.tail_ok = Decision::Indeterminate;
  const long double markov = c.moment.lo() / powK(c.threshold) * (1 + 16 * eps);
  if (static_cast<long double>(c.tail.count) <= markov) c.markov_ok = Decision::True;
  else c.markov_ok = Decision::False;
  c.K_Q = Q >= 4 ? 2 * std::log2(std::log2(static_cast<long double>(Q))) : 0;
  return c;
}

}  // namespace mdl::bounds
