#include "mdl/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl::experiments {

using intervals::PairKernel;

namespace {

mpz_class pow96(unsigned k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, 96ul * k);
  return r;
}

mpz_class powk(const mpz_class& x, unsigned k) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), x.get_mpz_t(), k);
  return r;
}

unsigned chunk_bits_for(std::uint64_t Q) {
  unsigned b = 0;
  while ((1ull << (b + 1)) <= Q) ++b;
  return b >= 2 ? std::min(12u, b - 1) : 0;
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::schedule() const {
  if (Q == 0) throw InvalidArgument("Q must be positive");
  std::vector<std::uint64_t> s;
  if (checkpoints.empty()) {
    for (std::uint64_t c = 1; c < Q; c *= 2) s.push_back(c);
    s.push_back(Q);
    return s;
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0 || checkpoints[i] > Q) throw InvalidArgument("checkpoints must lie in [1, Q]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw InvalidArgument("checkpoint schedule must increase");
  }
  s = checkpoints;
  if (s.back() != Q) s.push_back(Q);
  return s;
}

bool ExperimentReport::all_passed() const {
  for (const auto& i : invariants)
    if (i.pass != Decision::True) return false;
  return true;
}

mpq_class ce_lower_bound(const mpq_class& sum_measure, const mpq_class& sum_pairs) {
  if (sgn(sum_measure) == 0 || sgn(sum_pairs) == 0) throw ZeroMass("all measures vanish");
  return sum_measure * sum_measure / sum_pairs;
}

mpq_class ce_lower_bound(const std::vector<mpq_class>& measures,
                         const std::function<mpq_class(std::size_t, std::size_t)>& pair) {
  mpq_class sm = 0, sp = 0;
  for (std::size_t s = 0; s < measures.size(); ++s) {
    sm += measures[s];
    sp += measures[s];
    for (std::size_t t = 0; t < s; ++t) sp += 2 * pair(s, t);
  }
  return ce_lower_bound(sm, sp);
}

std::vector<CESeriesPoint> ce_series(const ApproxFunction& psi,
                                     const std::vector<CertifiedReal>& gammas,
                                     const std::vector<std::uint64_t>& checkpoints,
                                     unsigned threads,
                                     const std::function<bool(std::uint64_t)>& in_range) {
  if (gammas.empty()) throw InvalidArgument("need at least one gamma");
  if (checkpoints.empty()) return {};
  const unsigned k = static_cast<unsigned>(gammas.size());
  const std::uint64_t Q = checkpoints.back();
  std::vector<PairKernel> kernels;
  bool grid = true;
  for (const auto& g : gammas) {
    kernels.emplace_back(psi, g, Q, threads);
    grid = grid && kernels.back().grid();
  }
  const PairKernel& k0 = kernels.front();
  std::vector<std::uint64_t> support;
  for (std::uint64_t q = 1; q <= Q; ++q)
    if (sgn(k0.psi(q)) > 0 && (!in_range || in_range(q))) support.push_back(q);

  std::vector<CESeriesPoint> out;
  if (!grid) {
    mpq_class sm = 0, sp = 0;
    std::size_t idx = 0;
    std::size_t c = 0;
    for (std::uint64_t q = 1; q <= Q; ++q) {
      if (idx < support.size() && support[idx] == q) {
        mpq_class m = 1;
        for (unsigned i = 0; i < k; ++i) m *= 2 * k0.psi(q);
        sm += m;
        sp += m;
        for (std::size_t j = 0; j < idx; ++j) {
          mpq_class p = 1;
          for (const auto& ker : kernels) p *= ker.measure(support[j], q);
          sp += 2 * p;
        }
        ++idx;
      }
      while (c < checkpoints.size() && checkpoints[c] == q) {
        CESeriesPoint pt{q, sm, sp, sgn(sm) > 0 ? mpq_class(sm * sm / sp) : mpq_class(0)};
        out.push_back(pt);
        ++c;
      }
    }
    return out;
  }

  // L = lcm of the support; numerators of sum_t m(t cap s) over (s L 2^96)^k.
  mpz_class L = 1;
  for (auto q : support) mpz_lcm_ui(L.get_mpz_t(), L.get_mpz_t(), q);
  std::vector<mpz_class> Lk(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) Lk[i] = powk(L / static_cast<unsigned long>(support[i]), k);

  std::vector<mpz_class> X = parallel_reduce<std::vector<mpz_class>>(
      0, support.size(), 8, threads, {},
      [&](std::uint64_t b, std::uint64_t e) {
        std::vector<mpz_class> v;
        mpz_class hi, prod;
        for (std::uint64_t si = b; si < e; ++si) {
          const std::uint64_t s = support[si];
          mpz_class acc = 0;
          hi = 0;
          for (std::uint64_t ti = 0; ti < si; ++ti) {
            const std::uint64_t t = support[ti];
            if (k == 1) {
              const u128 S = static_cast<u128>(k0.scaled_pair_grid(t, s));
              if (S == 0) continue;
              const unsigned long lo64 = static_cast<unsigned long>(S);
              const unsigned long hi64 = static_cast<unsigned long>(S >> 64);
              if (lo64) mpz_addmul_ui(acc.get_mpz_t(), Lk[ti].get_mpz_t(), lo64);
              if (hi64) mpz_addmul_ui(hi.get_mpz_t(), Lk[ti].get_mpz_t(), hi64);
            } else {
              prod = 1;
              bool zero = false;
              for (const auto& ker : kernels) {
                const i128 S = ker.scaled_pair_grid(t, s);
                if (S == 0) {
                  zero = true;
                  break;
                }
                prod *= to_mpz(S);
              }
              if (!zero) mpz_addmul(acc.get_mpz_t(), prod.get_mpz_t(), Lk[ti].get_mpz_t());
            }
          }
          if (k == 1) {
            mpz_mul_2exp(hi.get_mpz_t(), hi.get_mpz_t(), 64);
            acc += hi;
          }
          v.push_back(std::move(acc));
        }
        return v;
      },
      [](std::vector<mpz_class> a, std::vector<mpz_class> b) {
        for (auto& x : b) a.push_back(std::move(x));
        return a;
      });

  const mpz_class Lkk = powk(L, k);
  const mpz_class sp_den = Lkk * Lkk * pow96(k);
  mpz_class sm_num = 0, sp_num = 0;
  std::size_t idx = 0, c = 0;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    if (idx < support.size() && support[idx] == q) {
      const mpz_class d = powk(2 * to_mpz(k0.P(q)), k);  // |B_q| * 2^(96k)
      sm_num += d;
      // Y_s = 2 X_s + |B_s| 2^(96k) s^k L^k, scaled by (L/s)^k.
      const mpz_class Y = 2 * X[idx] + d * powk(mpz_class(static_cast<unsigned long>(q)), k) * Lkk;
      sp_num += Y * Lk[idx];
      ++idx;
    }
    while (c < checkpoints.size() && checkpoints[c] == q) {
      CESeriesPoint pt;
      pt.Q = q;
      pt.sum_measure = mpq_class(sm_num, pow96(k));
      pt.sum_measure.canonicalize();
      pt.sum_pairs = mpq_class(sp_num, sp_den);
      pt.sum_pairs.canonicalize();
      pt.ce_bound = sgn(sm_num) > 0 ? mpq_class(pt.sum_measure * pt.sum_measure / pt.sum_pairs) : mpq_class(0);
      out.push_back(std::move(pt));
      ++c;
    }
  }
  return out;
}

ExperimentReport union_coverage_scan(const ExperimentConfig& cfg) {
  if (cfg.gammas.size() != 1) throw InvalidArgument("coverage needs exactly one gamma (k = 1)");
  const auto sched = cfg.schedule();
  const std::uint64_t Q = sched.back();
  if (Q > cfg.budget) throw BudgetExceeded("Q = " + std::to_string(Q) + " exceeds the exact budget " +
                                           std::to_string(cfg.budget));
  ExperimentReport rep;
  const auto ce = ce_series(cfg.psi, cfg.gammas, sched, cfg.threads);
  const PairKernel kern(cfg.psi, cfg.gammas[0], Q, cfg.threads);
  auto union_of = [&](std::uint64_t lo, std::uint64_t hi) {
    if (kern.grid())
      return intervals::union_measure_grid(kern.P_table(), lo, hi, kern.G(), cfg.threads,
                                           chunk_bits_for(hi));
    return intervals::union_measure_generic(cfg.psi, cfg.gammas[0], lo, hi);
  };
  Decision ce_ok = Decision::True, mono = Decision::True;
  std::string ce_detail, mono_detail;
  std::optional<mpq_class> prev;
  for (const auto& p : ce) {
    Checkpoint c;
    c.Q = p.Q;
    c.sum_measure = p.sum_measure;
    c.sum_pairs = p.sum_pairs;
    c.ce_bound = p.ce_bound;
    c.union_measure = union_of(1, p.Q);
    if (!(c.ce_bound <= *c.union_measure)) {
      ce_ok = Decision::False;
      ce_detail = "CE bound exceeds the union at Q = " + std::to_string(p.Q);
    }
    if (prev && *c.union_measure < *prev) {
      mono = Decision::False;
      mono_detail = "union decreases at Q = " + std::to_string(p.Q);
    }
    prev = c.union_measure;
    rep.checkpoints.push_back(std::move(c));
  }
  for (auto Qc : sched) {
    if (2 * Qc > Q) break;
    rep.windows.push_back({Qc, 2 * Qc, union_of(Qc, 2 * Qc)});
  }
  rep.invariants.push_back({"ce_bound_le_union", ce_ok, ce_detail});
  rep.invariants.push_back({"union_nondecreasing", mono, mono_detail});
  rep.diagnostics.push_back({"grid_path", kern.grid() ? "true" : "false"});
  rep.diagnostics.push_back({"psi", cfg.psi.describe()});
  rep.diagnostics.push_back({"gamma", cfg.gammas[0].label()});
  return rep;
}

SzuszResult szusz_shrink(const ApproxFunction& psi, std::uint64_t Q_max) {
  if (Q_max < 2) throw InvalidArgument("Q_max must be at least 2");
  SzuszResult res;
  std::vector<mpq_class> v(Q_max + 1);
  std::uint64_t first = 0;
  for (std::uint64_t q = 1; q <= Q_max; ++q) {
    v[q] = psi.eval(q);
    if (first == 0 && sgn(v[q]) > 0) first = q;
  }
  if (first != 0)
    for (std::uint64_t q = first + 1; q <= Q_max; ++q)
      if (v[q] > v[q - 1])
        throw NotMonotone("psi increases at q = " + std::to_string(q));
  const mpz_class two96 = to_mpz(pow2_u128(96));
  auto half_inv = [&](std::uint64_t q) {
    return make_q(to_mpz(pow2_u128(95) / q), two96);  // 1/(2q) rounded down
  };
  std::vector<mpq_class> out = v;
  std::vector<bool> shrunk(Q_max + 1, false);
  std::uint64_t prev = 0;
  for (std::uint64_t q = 100; q <= Q_max; ++q) {
    if (v[q] < mpq_class(1, static_cast<unsigned long>(q))) continue;
    res.triggers.push_back(q);
    const std::uint64_t lo = std::max(prev + 1, (q + 1) / 2);
    for (std::uint64_t p = lo; p <= q; ++p) {
      const mpq_class h = half_inv(p);
      out[p] = h < v[p] ? h : v[p];
      shrunk[p] = true;
    }
    prev = q;
  }
  std::map<std::uint64_t, mpq_class> table;
  for (std::uint64_t q = 1; q <= Q_max; ++q)
    if (sgn(out[q]) > 0) table[q] = out[q];
  for (std::uint64_t q = 1; q <= Q_max; ++q)
    if (out[q] != v[q]) res.changed = true;
  if (!res.changed) {
    res.shrunk = psi;
  } else {
    res.shrunk = ApproxFunction::table(std::move(table));
  }
  std::uint64_t last = 0;
  for (auto s : res.triggers) {
    if (last != 0 && s <= 2 * last) continue;
    ShrinkWindow w;
    w.lo = (s + 1) / 2;
    w.hi = s;
    for (std::uint64_t p = w.lo; p <= w.hi; ++p) w.sum += out[p];
    res.windows.push_back(std::move(w));
    last = s;
  }
  return res;
}

BklReport bkl_counts(const CertifiedReal& beta, const CertifiedReal& gamma2, unsigned k_max) {
  if (k_max == 0 || k_max > 40) throw InvalidArgument("k_max must lie in [1, 40]");
  const auto B = realnum::to_torus128(beta, 120);
  const auto G2 = realnum::to_torus128(gamma2, 120);
  BklReport rep;
  bool have = false, have_nd = false;
  const mpz_class two128 = to_mpz(pow2_u128(127)) * 2;
  for (unsigned k = 1; k <= k_max; ++k) {
    for (unsigned l = 0; (1u << l) <= k; ++l) {
      BklCell cell;
      cell.k = k;
      cell.l = l;
      cell.degenerate = (1u << (l + 1)) >= k;
      // dist in units of 2^-128, against [2^l 2^128 / k, 2^(l+1) 2^128 / k].
      const mpz_class lo_num = (mpz_class(1) << l) * two128;
      const mpz_class hi_num = 2 * lo_num;
      const std::uint64_t q_lo = 1ull << k, q_hi = 1ull << (k + 1);
      for (std::uint64_t q = q_lo; q <= q_hi; ++q) {
        const u128 t = static_cast<u128>(q) * B.t - G2.t;
        const mpz_class d = t == pow2_u128(127) ? to_mpz(t) : mpz_class(abs(to_mpz(static_cast<i128>(t))));
        const mpq_class err_units = (mpq_class(static_cast<unsigned long>(q)) * B.err + G2.err) * mpq_class(two128);
        const mpq_class dk = mpq_class(d * k);
        const mpq_class ek = err_units * k;
        const bool in_hat = dk >= mpq_class(lo_num) && dk <= mpq_class(hi_num);
        const bool near = abs(dk - mpq_class(lo_num)) <= ek || abs(dk - mpq_class(hi_num)) <= ek;
        if (near) ++cell.indeterminate;
        else if (in_hat) ++cell.count;
      }
      cell.normalized = make_q(mpz_class(cell.count) * k, mpz_class(1) << (k + l));
      if (!have || cell.normalized < rep.c_fit) rep.c_fit = cell.normalized;
      have = true;
      if (!cell.degenerate) {
        if (!have_nd || cell.normalized < rep.c_fit_nondegenerate) rep.c_fit_nondegenerate = cell.normalized;
        have_nd = true;
      }
      rep.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

MultiplicativeReport multiplicative_pipeline(const ApproxFunction& psi, const CertifiedReal& beta,
                                             const CertifiedReal& gamma1,
                                             const CertifiedReal& gamma2, std::uint64_t Q,
                                             unsigned threads) {
  if (Q > kExactBudget) throw BudgetExceeded("multiplicative pipeline supports Q <= 10^4");
  if (Q < 16) throw InvalidArgument("Q must be at least 16");
  MultiplicativeReport rep;
  rep.bkl = bkl_counts(beta, gamma2);
  if (psi.is_zero()) {
    rep.coverage.diagnostics.push_back({"note", "psi is identically zero; the pipeline is empty"});
    return rep;
  }
  const auto B = realnum::to_torus128(beta, 120);
  const auto G2 = realnum::to_torus128(gamma2, 120);
  std::map<std::uint64_t, mpq_class> table;
  const mpz_class two96 = to_mpz(pow2_u128(96));
  const u128 cap = pow2_u128(95) - 1;
  for (std::uint64_t q = 2; q <= Q; ++q) {
    Estimate d;
    const Decision m = approxfun::condition_d_member(q, B, G2, &d);
    if (m == Decision::Indeterminate) {
      ++rep.B_indeterminate;
      continue;
    }
    if (m != Decision::True) continue;
    ++rep.B_members;
    const long double p = psi.eval_ld(q);
    if (p == 0) continue;
    // Certified lower bound of psi / ||q beta - gamma2||, rounded down to the grid.
    const long double v = p * (1 - std::ldexp(1.0L, -55)) / (d.value + d.err);
    const long double scaled = std::floor(std::ldexp(v, 96));
    u128 P = scaled >= to_long_double(cap) ? cap : static_cast<u128>(scaled);
    if (P == 0) continue;
    table[q] = mpq_class(to_mpz(P), two96);
    table[q].canonicalize();
  }
  rep.psi_prime = ApproxFunction::table(std::move(table));
  rep.condition_d = approxfun::condition_D_scan(psi, beta, gamma2, Q);
  ExperimentConfig cfg;
  cfg.gammas = {gamma1};
  cfg.psi = rep.psi_prime;
  cfg.Q = Q;
  cfg.threads = threads;
  rep.coverage = union_coverage_scan(cfg);
  rep.coverage.diagnostics.push_back({"B_members", std::to_string(rep.B_members)});
  rep.coverage.diagnostics.push_back({"B_indeterminate", std::to_string(rep.B_indeterminate)});
  return rep;
}

std::string divergence_verdict(const std::vector<long double>& s) {
  if (s.size() < 4) return "undetermined (heuristic: too few checkpoints)";
  const std::size_t n = s.size();
  const long double d1 = s[n - 1] - s[n - 2];
  const long double d2 = s[n - 2] - s[n - 3];
  const long double d3 = s[n - 3] - s[n - 4];
  if (d2 <= 0 || d3 <= 0) return "undetermined (heuristic)";
  const long double r1 = d1 / d2, r2 = d2 / d3;
  if (r1 < 0.75L && r2 < 0.75L) return "likely convergent (heuristic)";
  return "likely divergent (heuristic)";
}

ExperimentReport highdim_experiment(const ExperimentConfig& cfg) {
  const unsigned k = cfg.k;
  if (k < 1 || k > 3) throw InvalidArgument("k must lie in {1, 2, 3}");
  if (cfg.gammas.size() != k) throw InvalidArgument("need exactly k gammas");
  const auto sched = cfg.schedule();
  const std::uint64_t Q = sched.back();
  if (Q > 1000) throw BudgetExceeded("highdim pairwise stage supports Q <= 1000");
  ExperimentReport rep;

  // Divergence diagnostic on dyadic checkpoints.
  std::vector<long double> partial;
  std::string series;
  {
    long double s = 0;
    std::uint64_t next = 1;
    const auto& sieve = arith::shared_sieve(Q);
    const long double eps = static_cast<long double>(cfg.epsilon.get_d());
    for (std::uint64_t q = 1; q <= Q; ++q) {
      const long double p = cfg.psi.eval_ld(q);
      long double t;
      if (k >= 3) t = std::pow(p, static_cast<long double>(k));
      else if (k == 2) {
        const long double r = p * sieve.phi(q) / static_cast<long double>(q);
        t = r * r;
      } else {
        t = p / std::pow(static_cast<long double>(sieve.d(q)), 1 + eps);
      }
      s += t;
      if (q == next || q == Q) {
        partial.push_back(s);
        if (!series.empty()) series += ";";
        series += std::to_string(q) + ":" + format_long_double(s, 12);
        if (q == next) next *= 2;
      }
    }
  }
  const char* name = k >= 3 ? "sum psi^k" : (k == 2 ? "sum (psi phi/q)^2" : "sum psi/d^(1+eps)");
  rep.diagnostics.push_back({"divergence_series", std::string(name) + " " + series});
  rep.diagnostics.push_back({"divergence_verdict", divergence_verdict(partial)});

  const auto ce = ce_series(cfg.psi, cfg.gammas, sched, cfg.threads);
  const PairKernel k0(cfg.psi, cfg.gammas[0], Q, cfg.threads);
  std::vector<u128> G;
  for (const auto& g : cfg.gammas) G.push_back(realnum::to_grid96(g).G);
  Decision ce_ok = Decision::True;
  std::string detail;
  for (std::size_t i = 0; i < ce.size(); ++i) {
    Checkpoint c;
    c.Q = ce[i].Q;
    c.sum_measure = ce[i].sum_measure;
    c.sum_pairs = ce[i].sum_pairs;
    c.ce_bound = ce[i].ce_bound;
    const bool last = i + 1 == ce.size();
    if (k == 1) {
      c.union_measure = k0.grid() ? intervals::union_measure_grid(k0.P_table(), 1, c.Q, k0.G(), cfg.threads,
                                                                  chunk_bits_for(c.Q))
                                  : intervals::union_measure_generic(cfg.psi, cfg.gammas[0], 1, c.Q);
      if (!(c.ce_bound <= *c.union_measure)) {
        ce_ok = Decision::False;
        detail = "CE bound exceeds the union at Q = " + std::to_string(c.Q);
      }
    } else if (last) {
      if (!k0.grid()) throw InvalidArgument("Monte Carlo stage needs psi on the 2^-96 grid");
      c.monte_carlo = montecarlo::estimate_box_union(k0.P_table(), c.Q, G, cfg.mc_samples, cfg.seed,
                                                     cfg.threads);
      const long double bound = c.monte_carlo->p_hat + 4 * c.monte_carlo->half_width;
      const long double ce_ld = static_cast<long double>(c.ce_bound.get_d());
      if (ce_ld > bound + 1e-12L) {
        ce_ok = Decision::False;
        detail = "CE bound exceeds the Monte Carlo estimate plus 4 half-widths";
      } else if (ce_ld > bound - 1e-12L) {
        ce_ok = Decision::Indeterminate;
      }
    }
    rep.checkpoints.push_back(std::move(c));
  }
  rep.invariants.push_back({k == 1 ? "ce_bound_le_union" : "ce_bound_le_mc_plus_4ci", ce_ok, detail});

  // Weight classes: q/phi(q) for k = 2, d(q) for k = 1.
  if (k <= 2) {
    const auto& sieve = arith::shared_sieve(Q);
    std::map<unsigned, ClassRow> rows;
    for (std::uint64_t q = 1; q <= Q; ++q) {
      const long double p = cfg.psi.eval_ld(q);
      if (p == 0) continue;
      const unsigned l = k == 2 ? arith::dl_index_from_phi(q, sieve.phi(q)) : arith::floor_log2(sieve.d(q));
      auto& r = rows[l];
      r.l = l;
      ++r.count;
      long double w;
      if (k == 2) {
        const long double x = p * sieve.phi(q) / static_cast<long double>(q);
        w = x * x;
      } else {
        w = p;
      }
      r.a_l.value += w;
      r.a_l.err += w * std::ldexp(1.0L, -55);
    }
    for (auto& [l, r] : rows) {
      const unsigned ll = l;
      auto in_class = [&, ll](std::uint64_t q) {
        return (k == 2 ? arith::dl_index_from_phi(q, sieve.phi(q)) : arith::floor_log2(sieve.d(q))) == ll;
      };
      const auto pts = ce_series(cfg.psi, cfg.gammas, {Q}, cfg.threads, in_class);
      if (!pts.empty() && sgn(pts.back().sum_measure) > 0) r.ce_bound = pts.back().ce_bound;
      r.a_l.err += r.a_l.value * std::ldexp(1.0L, -60) * static_cast<long double>(r.count);
      rep.classes.push_back(r);
    }
  }
  rep.diagnostics.push_back({"k", std::to_string(k)});
  rep.diagnostics.push_back({"seed", std::to_string(cfg.seed)});
  rep.diagnostics.push_back({"mc_samples", std::to_string(cfg.mc_samples)});
  return rep;
}

mpq_class cf_ratio(std::uint64_t q) {
  if (q == 0) throw InvalidArgument("q must be positive");
  const auto f = arith::factor(q);
  mpz_class sigma = 1, phi = 1;
  for (const auto& [p, a] : f.factors) {
    mpz_class pa;
    mpz_ui_pow_ui(pa.get_mpz_t(), p, a);
    sigma *= (pa * p - 1) / (p - 1);
    phi *= pa / p * (p - 1);
  }
  mpq_class r(sigma * phi, mpz_class(static_cast<unsigned long>(q)) * mpz_class(static_cast<unsigned long>(q)));
  r.canonicalize();
  return r;
}

CfRatioReport cf_ratio_fact_check(std::uint64_t Q) {
  if (Q == 0 || Q > 1000000) throw InvalidArgument("Q must lie in [1, 10^6]");
  const auto& sieve = arith::shared_sieve(Q);
  CfRatioReport rep;
  rep.Q = Q;
  // ratio = num / q^2 with num = sigma(q) phi(q).
  u128 min_num = 1, max_num = 1, min_den = 1, max_den = 1;
  rep.argmin = rep.argmax = 1;
  for (std::uint64_t q = 2; q <= Q; ++q) {
    const auto f = sieve.factor(q);
    u128 sigma = 1;
    for (const auto& [p, a] : f.factors) {
      u128 pa = 1;
      for (unsigned i = 0; i < a; ++i) pa *= p;
      sigma *= (pa * p - 1) / (p - 1);
    }
    const u128 num = sigma * sieve.phi(q);
    const u128 den = static_cast<u128>(q) * q;
    if (num * min_den < min_num * den) {
      min_num = num;
      min_den = den;
      rep.argmin = q;
    }
    if (num * max_den > max_num * den) {
      max_num = num;
      max_den = den;
      rep.argmax = q;
    }
  }
  rep.min_ratio = mpq_class(to_mpz(min_num), to_mpz(min_den));
  rep.min_ratio.canonicalize();
  rep.max_ratio = mpq_class(to_mpz(max_num), to_mpz(max_den));
  rep.max_ratio.canonicalize();
  const long double inv_min = 1 / static_cast<long double>(rep.min_ratio.get_d());
  rep.fitted_C = std::max(inv_min, static_cast<long double>(rep.max_ratio.get_d()));
  return rep;
}

}  // namespace mdl::experiments

namespace mdl::experiments {

SieveMassReport sieve_mass_scan(const ApproxFunction& psi, const mpq_class& epsilon, std::uint64_t Q,
                                unsigned group_width, unsigned threads) {
  if (sgn(epsilon) <= 0) throw InvalidArgument("sieve_mass_scan: epsilon must be positive");
  if (Q < 4) throw InvalidArgument("sieve_mass_scan: Q must be at least 4");
  if (group_width == 0) throw InvalidArgument("sieve_mass_scan: group_width must be positive");
  SieveMassReport rep;
  rep.epsilon = epsilon;
  rep.Q = Q;
  rep.group_width = group_width;
  unsigned full = 1;
  while ((std::uint64_t{1} << (full + 1)) <= Q) ++full;
  struct Acc {
    std::vector<std::uint64_t> count;
    std::vector<mpq_class> inc;
    std::uint64_t indeterminate = 0;
  };
  const unsigned top = full + 1;  // block index of a partial tail block
  auto blank = [&] {
    Acc a;
    a.count.assign(top + 1, 0);
    a.inc.assign(top + 1, mpq_class(0));
    return a;
  };
  Acc acc = parallel_reduce<Acc>(
      3, Q + 1, 4096, threads, blank(),
      [&](std::uint64_t b, std::uint64_t e) {
        Acc a = blank();
        for (std::uint64_t q = b; q < e; ++q) {
          const Decision d = arith::omega_support_decide(q, epsilon);
          if (d == Decision::Indeterminate) ++a.indeterminate;
          if (d != Decision::False) continue;
          const unsigned j = static_cast<unsigned>(std::bit_width(q - 1));
          ++a.count[j];
          a.inc[j] += psi.eval(q);
        }
        return a;
      },
      [&](Acc x, Acc y) {
        if (x.count.empty()) return y;
        for (unsigned j = 0; j <= top; ++j) {
          x.count[j] += y.count[j];
          x.inc[j] += y.inc[j];
        }
        x.indeterminate += y.indeterminate;
        return x;
      });
  rep.indeterminate = acc.indeterminate;
  for (unsigned j = 0; j <= top; ++j) {
    rep.count += acc.count[j];
    rep.mass += acc.inc[j];
  }
  rep.mass.canonicalize();
  for (unsigned j = 2; j <= full; ++j) {
    acc.inc[j].canonicalize();
    rep.blocks.push_back({j, acc.count[j], acc.inc[j]});
  }
  for (std::size_t i = 0; i + group_width <= rep.blocks.size(); i += group_width) {
    mpq_class g = 0;
    for (std::size_t t = i; t < i + group_width; ++t) g += rep.blocks[t].increment;
    rep.group_increments.push_back(g);
  }
  for (std::size_t i = 1; i < rep.group_increments.size(); ++i) {
    if (sgn(rep.group_increments[i - 1]) == 0) continue;
    mpq_class r = rep.group_increments[i] / rep.group_increments[i - 1];
    if (i == 1 || r > rep.max_group_ratio) rep.max_group_ratio = r;
  }
  return rep;
}

}  // namespace mdl::experiments
