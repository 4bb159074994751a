#include "mdl/intervals.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl::intervals {

namespace {

mpq_class floor_q(const mpq_class& x) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return mpq_class(f);
}

mpz_class lcm_z(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

template <class Int>
Int lattice_sum_impl(const Int& D, const Int& M, const Int& delta, const Int& step) {
  // f(x) = max(0, min(D - |x|, M)) at x = j step + delta, 0 < M <= D.
  const Int zero = 0;
  if (D <= zero || M <= zero) return zero;
  const Int one = 1;
  const Int jA = floor_div(Int(-D - delta), step) + one;     // first j with x > -D
  const Int jB = ceil_div(Int(D - delta), step) - one;       // last j with x < D
  const Int pL = ceil_div(Int(M - D - delta), step);         // first j with x >= M - D
  const Int pR = floor_div(Int(D - M - delta), step);        // last j with x <= D - M
  Int total = 0;
  // Left slope: j in [jA, min(pL - 1, jB)], f = D + delta + j step.
  {
    const Int a = jA;
    const Int b = std::min(Int(pL - one), jB);
    if (b >= a) {
      const Int n = b - a + one;
      const Int first = D + delta + a * step;
      total += n * first + step * (n * (n - one) / 2);
    }
  }
  // Plateau.
  {
    const Int a = std::max(pL, jA);
    const Int b = std::min(pR, jB);
    if (b >= a) total += (b - a + one) * M;
  }
  // Right slope: j in [max(pR + 1, jA), jB], f = D - delta - j step.
  {
    const Int a = std::max(Int(pR + one), jA);
    const Int b = jB;
    if (b >= a) {
      const Int n = b - a + one;
      const Int first = D - delta - a * step;
      total += n * first - step * (n * (n - one) / 2);
    }
  }
  return total;
}

void check_psi(const mpq_class& p) {
  if (sgn(p) < 0 || p >= mpq_class(1, 2))
    throw InvalidArgument("psi(q) must lie in [0, 1/2)");
}

}  // namespace

IntervalUnion IntervalUnion::from_components(std::vector<Component> parts) {
  const mpq_class zero(0), one(1);
  std::vector<Component> kept;
  kept.reserve(parts.size());
  for (auto& c : parts) {
    if (c.a < zero) c.a = zero;
    if (c.b > one) c.b = one;
    if (c.a < c.b) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Component& x, const Component& y) { return x.a < y.a || (x.a == y.a && x.b < y.b); });
  IntervalUnion u;
  for (auto& c : kept) {
    if (!u.parts_.empty() && c.a < u.parts_.back().b) {
      if (c.b > u.parts_.back().b) u.parts_.back().b = c.b;
    } else {
      u.parts_.push_back(std::move(c));
    }
  }
  return u;
}

IntervalUnion IntervalUnion::from_sorted_disjoint(std::vector<Component> parts) {
  IntervalUnion u;
  u.parts_ = std::move(parts);
  return u;
}

mpq_class IntervalUnion::measure() const {
  // Accumulate over a common denominator and reduce once at the end.
  mpz_class num = 0, den = 1, t;
  auto add = [&](const mpz_class& n, const mpz_class& d, bool negate) {
    if (!mpz_divisible_p(den.get_mpz_t(), d.get_mpz_t())) {
      const mpz_class l = lcm_z(den, d);
      num *= l / den;
      den = l;
    }
    mpz_divexact(t.get_mpz_t(), den.get_mpz_t(), d.get_mpz_t());
    t *= n;
    if (negate) num -= t;
    else num += t;
  };
  for (const auto& c : parts_) {
    add(c.b.get_num(), c.b.get_den(), false);
    add(c.a.get_num(), c.a.get_den(), true);
  }
  mpq_class m(num, den);
  m.canonicalize();
  return m;
}

bool IntervalUnion::valid() const {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const auto& c = parts_[i];
    if (sgn(c.a) < 0 || c.b > 1 || !(c.a < c.b)) return false;
    if (i + 1 < parts_.size() && parts_[i + 1].a < c.b) return false;
  }
  return true;
}

std::string IntervalUnion::dump() const {
  std::string out;
  for (const auto& c : parts_) {
    out += c.a.get_num().get_str() + "/" + c.a.get_den().get_str() + " " +
           c.b.get_num().get_str() + "/" + c.b.get_den().get_str() + "\n";
  }
  return out;
}

IntervalUnion IntervalUnion::parse_dump(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Component> parts;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra))
      throw InvalidArgument("interval dump line " + std::to_string(lineno) + ": expected two fractions");
    Component c;
    try {
      c.a = mpq_class(a);
      c.b = mpq_class(b);
    } catch (const std::invalid_argument&) {
      throw InvalidArgument("interval dump line " + std::to_string(lineno) + ": bad fraction");
    }
    c.a.canonicalize();
    c.b.canonicalize();
    parts.push_back(std::move(c));
  }
  return from_components(std::move(parts));
}

mpq_class measure(const IntervalUnion& u) { return u.measure(); }

IntervalUnion intersect(const IntervalUnion& u, const IntervalUnion& v) {
  std::vector<Component> out;
  const auto& A = u.components();
  const auto& B = v.components();
  std::size_t i = 0, j = 0;
  while (i < A.size() && j < B.size()) {
    const mpq_class& lo = std::max(A[i].a, B[j].a);
    const mpq_class& hi = std::min(A[i].b, B[j].b);
    if (lo < hi) out.push_back({lo, hi});
    if (A[i].b < B[j].b) ++i;
    else ++j;
  }
  return IntervalUnion::from_components(std::move(out));
}

IntervalUnion unite(const IntervalUnion& u, const IntervalUnion& v) {
  std::vector<Component> all(u.components());
  all.insert(all.end(), v.components().begin(), v.components().end());
  return IntervalUnion::from_components(std::move(all));
}

IntervalUnion build_Aq_exact(std::uint64_t q, const mpq_class& psi_q, const mpq_class& gamma_hat) {
  if (q == 0) throw InvalidArgument("q must be positive");
  check_psi(psi_q);
  if (sgn(psi_q) == 0) return {};
  const mpq_class g = gamma_hat - floor_q(gamma_hat);
  // Endpoints (n L + lo) / (q L) and (n L + hi) / (q L) with integer lo, hi.
  const mpz_class L = lcm_z(g.get_den(), psi_q.get_den());
  const mpz_class G = g.get_num() * (L / g.get_den());
  const mpz_class P = psi_q.get_num() * (L / psi_q.get_den());
  const mpz_class den = L * static_cast<unsigned long>(q);
  std::vector<Component> parts;
  parts.reserve(q + 2);
  mpz_class lo = G - P - L, hi = G + P - L;  // n = -1
  // Consecutive pieces are 1/q apart and shorter than 1/q, so they never overlap.
  for (long long n = -1; n <= static_cast<long long>(q); ++n, lo += L, hi += L) {
    if (sgn(hi) <= 0 || lo >= den) continue;
    Component c;
    if (sgn(lo) <= 0) c.a = 0;
    else {
      c.a = mpq_class(lo, den);
      c.a.canonicalize();
    }
    if (hi >= den) c.b = 1;
    else {
      c.b = mpq_class(hi, den);
      c.b.canonicalize();
    }
    parts.push_back(std::move(c));
  }
  return IntervalUnion::from_sorted_disjoint(std::move(parts));
}

AqSet build_Aq(std::uint64_t q, const ApproxFunction& psi, const CertifiedReal& gamma) {
  const auto hat = realnum::rational_hat(gamma);
  AqSet s;
  s.psi = psi.eval(q);
  s.gamma_hat = hat.value;
  s.perturbation = hat.err / mpq_class(static_cast<unsigned long>(q));
  s.set = build_Aq_exact(q, s.psi, s.gamma_hat);
  return s;
}

i128 lattice_sum(i128 D, i128 M, i128 delta, i128 step) {
  return lattice_sum_impl<i128>(D, M, delta, step);
}

mpz_class lattice_sum(const mpz_class& D, const mpz_class& M, const mpz_class& delta,
                      const mpz_class& step) {
  return lattice_sum_impl<mpz_class>(D, M, delta, step);
}

mpq_class pair_measure_exact(std::uint64_t q, std::uint64_t q2, const mpq_class& psi_q,
                             const mpq_class& psi_q2, const mpq_class& gamma_hat) {
  check_psi(psi_q);
  check_psi(psi_q2);
  if (sgn(psi_q) == 0 || sgn(psi_q2) == 0) return 0;
  if (q == q2) return 2 * (psi_q < psi_q2 ? psi_q : psi_q2);
  const mpz_class Dn = lcm_z(lcm_z(psi_q.get_den(), psi_q2.get_den()), gamma_hat.get_den());
  const mpz_class P = psi_q.get_num() * (Dn / psi_q.get_den());
  const mpz_class P2 = psi_q2.get_num() * (Dn / psi_q2.get_den());
  const mpz_class G = gamma_hat.get_num() * (Dn / gamma_hat.get_den());
  const mpz_class zq(static_cast<unsigned long>(q)), zq2(static_cast<unsigned long>(q2));
  const mpz_class g(static_cast<unsigned long>(arith::gcd(q, q2)));
  const mpz_class D = zq2 * P + zq * P2;
  const mpz_class a = P * zq2, b = P2 * zq;
  const mpz_class M = 2 * (a < b ? a : b);
  const mpz_class delta = G * (zq2 - zq);
  const mpz_class S = lattice_sum(D, M, delta, g * Dn);
  return make_q(g * S, zq * zq2 * Dn);
}

PairKernel::PairKernel(const ApproxFunction& psi, const CertifiedReal& gamma, std::uint64_t q_max,
                       unsigned threads)
    : psi_(psi), q_max_(q_max) {
  const auto grid = realnum::to_grid96(gamma);
  const bool gamma_on_grid = !gamma.is_exact() || grid.on_grid;
  grid_ = psi.on_grid() && gamma_on_grid && q_max <= kGridQMax;
  const auto hat = realnum::rational_hat(gamma);
  gamma_hat_ = hat.value;
  gamma_err_ = hat.err;
  gamma_err_ld_ = static_cast<long double>(hat.err.get_d()) * (1 + 1e-12L);
  if (grid_) {
    G_ = grid.G;
    table_ = psi.grid_table(q_max, threads);
  } else {
    exact_.resize(q_max + 1);
    for (std::uint64_t q = 1; q <= q_max; ++q) {
      exact_[q] = psi.eval(q);
      check_psi(exact_[q]);
    }
  }
}

mpq_class PairKernel::psi(std::uint64_t q) const {
  if (q > q_max_) return psi_.eval(q);
  if (grid_) {
    mpq_class r(to_mpz((*table_)[q]), to_mpz(pow2_u128(96)));
    r.canonicalize();
    return r;
  }
  return exact_[q];
}

i128 PairKernel::scaled_pair_grid(std::uint64_t q, std::uint64_t q2) const {
  const i128 P = static_cast<i128>((*table_)[q]);
  const i128 P2 = static_cast<i128>((*table_)[q2]);
  if (P == 0 || P2 == 0) return 0;
  const i128 iq = static_cast<i128>(q), iq2 = static_cast<i128>(q2);
  if (q == q2) return 2 * P * iq * iq;
  const i128 g = static_cast<i128>(arith::gcd(q, q2));
  const i128 D = iq2 * P + iq * P2;
  const i128 M = 2 * std::min(P * iq2, P2 * iq);
  const i128 delta = static_cast<i128>(G_) * (iq2 - iq);
  return g * lattice_sum(D, M, delta, g * static_cast<i128>(pow2_u128(96)));
}

mpq_class PairKernel::measure(std::uint64_t q, std::uint64_t q2) const {
  if (grid_ && q <= q_max_ && q2 <= q_max_) {
    const mpz_class den = mpz_class(static_cast<unsigned long>(q)) *
                          mpz_class(static_cast<unsigned long>(q2)) * to_mpz(pow2_u128(96));
    mpq_class r(to_mpz(scaled_pair_grid(q, q2)), den);
    r.canonicalize();
    return r;
  }
  return pair_measure_exact(q, q2, psi(q), psi(q2), gamma_hat_);
}

mpq_class PairKernel::delta(std::uint64_t q, std::uint64_t q2) const {
  return mpq_class(static_cast<unsigned long>(q)) * psi(q2) +
         mpq_class(static_cast<unsigned long>(q2)) * psi(q);
}

Decision PairKernel::chi(std::uint64_t q, std::uint64_t q2, bool* hat_value) const {
  const std::uint64_t g = arith::gcd(q, q2);
  const std::int64_t m = (static_cast<std::int64_t>(q2) - static_cast<std::int64_t>(q)) /
                         static_cast<std::int64_t>(g);
  const std::uint64_t am = static_cast<std::uint64_t>(m < 0 ? -m : m);
  bool hat;
  long double gap, margin;
  if (grid_ && q <= q_max_ && q2 <= q_max_) {
    const u128 mask = pow2_u128(96) - 1;
    const u128 y = (static_cast<u128>(static_cast<i128>(m)) * G_) & mask;
    const i128 sy = y >= pow2_u128(95) ? static_cast<i128>(y) - static_cast<i128>(pow2_u128(96))
                                       : static_cast<i128>(y);
    const i128 lhs = abs_i128(sy) * static_cast<i128>(g);
    const i128 rhs = static_cast<i128>(q) * static_cast<i128>((*table_)[q2]) +
                     static_cast<i128>(q2) * static_cast<i128>((*table_)[q]);
    hat = lhs < rhs;
    // Distances in units of 2^-96 / g.
    gap = to_long_double(lhs - rhs);
    margin = static_cast<long double>(am) * static_cast<long double>(g) * gamma_err_ld_ *
             to_long_double(pow2_u128(96));
  } else {
    const mpq_class x = gamma_hat_ * mpq_class(static_cast<long>(m));
    const mpq_class f = abs(realnum::signed_frac(x));
    const mpq_class r = delta(q, q2) / mpq_class(static_cast<unsigned long>(g));
    hat = f < r;
    const mpq_class d = f - r;
    gap = static_cast<long double>(d.get_d());
    margin = static_cast<long double>(am) * gamma_err_ld_;
    if (sgn(gamma_err_) == 0) {
      if (hat_value) *hat_value = hat;
      return hat ? Decision::True : Decision::False;
    }
    // Exact comparison of |f - r| against the error ball.
    const mpq_class em = gamma_err_ * mpq_class(static_cast<unsigned long>(am));
    if (hat_value) *hat_value = hat;
    if (abs(d) <= em) return Decision::Indeterminate;
    return hat ? Decision::True : Decision::False;
  }
  if (hat_value) *hat_value = hat;
  if (gamma_err_ld_ == 0) return hat ? Decision::True : Decision::False;
  // gap is exact up to its float rounding; widen the margin accordingly.
  const long double slack = margin * (1 + 1e-9L) + std::abs(gap) * 1e-15L;
  if (std::abs(gap) <= slack) return Decision::Indeterminate;
  return hat ? Decision::True : Decision::False;
}

PairContext pairwise_intersection_measure(std::uint64_t q, std::uint64_t q2,
                                          const ApproxFunction& psi, const CertifiedReal& gamma,
                                          unsigned H) {
  if (q == 0 || q2 == 0) throw InvalidArgument("q must be positive");
  const auto hat = realnum::rational_hat(gamma);
  PairContext c;
  c.q = q;
  c.q2 = q2;
  c.g = arith::gcd(q, q2);
  c.psi_q = psi.eval(q);
  c.psi_q2 = psi.eval(q2);
  c.measure = pair_measure_exact(q, q2, c.psi_q, c.psi_q2, hat.value);
  c.delta = mpq_class(static_cast<unsigned long>(q)) * c.psi_q2 +
            mpq_class(static_cast<unsigned long>(q2)) * c.psi_q;
  c.delta_over_g = c.delta / mpq_class(static_cast<unsigned long>(c.g));
  c.branch1 = c.delta < mpq_class(static_cast<unsigned long>(H) * c.g);
  c.perturbation = hat.err / mpq_class(static_cast<unsigned long>(std::min(q, q2)));
  return c;
}

mpq_class union_measure_generic(const ApproxFunction& psi, const CertifiedReal& gamma,
                                std::uint64_t q_lo, std::uint64_t q_hi) {
  const auto hat = realnum::rational_hat(gamma);
  std::vector<Component> all;
  for (std::uint64_t q = q_lo; q <= q_hi; ++q) {
    const auto a = build_Aq_exact(q, psi.eval(q), hat.value);
    all.insert(all.end(), a.components().begin(), a.components().end());
  }
  return IntervalUnion::from_components(std::move(all)).measure();
}

mpq_class ProductBox::measure() const {
  if (factors.empty()) throw InvalidArgument("product box needs k >= 1");
  mpq_class m = 1;
  for (const auto& f : factors) m *= f.measure();
  return m;
}

ProductBox box_ops(unsigned k, std::uint64_t q, const ApproxFunction& psi,
                   const std::vector<CertifiedReal>& gammas) {
  if (k == 0 || gammas.size() != k) throw InvalidArgument("box_ops needs k >= 1 gammas");
  ProductBox b;
  for (const auto& g : gammas) b.factors.push_back(build_Aq(q, psi, g).set);
  return b;
}

mpq_class box_pair_intersection_measure(std::uint64_t q, std::uint64_t q2,
                                        const ApproxFunction& psi,
                                        const std::vector<CertifiedReal>& gammas) {
  if (gammas.empty()) throw InvalidArgument("box measure needs k >= 1 gammas");
  const mpq_class pq = psi.eval(q), pq2 = psi.eval(q2);
  mpq_class m = 1;
  for (const auto& g : gammas) {
    m *= pair_measure_exact(q, q2, pq, pq2, realnum::rational_hat(g).value);
    if (sgn(m) == 0) break;
  }
  return m;
}

}  // namespace mdl::intervals
