#include "mdl/approxfun.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl::approxfun {

namespace {

constexpr long double kLdEps = std::numeric_limits<long double>::epsilon();
const u128 kHalf = pow2_u128(kGridBits - 1);

mpz_class two_pow(unsigned e) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
  return r;
}

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

long double up(long double v) {
  return std::nextafter(v, std::numeric_limits<long double>::infinity());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

mpq_class parse_rational(const std::string& text) {
  return realnum::CertifiedReal::parse(text).ball().mid;
}

// F(q) from a factorization, summed exactly as arith::F does.
Estimate F_of(std::uint64_t q) {
  const auto& sv = arith::shared_sieve(1);
  const auto f = q <= sv.limit() ? sv.factor(q) : arith::factor(q);
  const auto divs = arith::divisors(f);
  long double s = 0;
  for (auto r : divs) s += arith::F_term(r);
  return {s, arith::F_error_bound(divs.size())};
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::CoverQ:
      return "c_over_q";
    case Family::CoverQLogLog2:
      return "c_over_q_loglog2";
    case Family::CoverQLogLogLog2:
      return "c_over_q_log_loglog2";
    case Family::CoverQLog:
      return "c_over_q_log";
    case Family::Constant:
      return "constant";
    default:
      return "table";
  }
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::CoverQ, Family::CoverQLogLog2, Family::CoverQLogLogLog2,
                   Family::CoverQLog, Family::Constant, Family::Table})
    if (name == family_name(f)) return f;
  throw InvalidArgument("unknown psi family '" + name + "'");
}

Filter Filter::parse(const std::string& raw) {
  const std::string text = trim(raw);
  Filter f;
  auto inner = [&](const std::string& head) -> std::optional<std::string> {
    if (text.size() > head.size() + 1 && text.compare(0, head.size() + 1, head + "(") == 0 &&
        text.back() == ')')
      return trim(text.substr(head.size() + 1, text.size() - head.size() - 2));
    return std::nullopt;
  };
  if (auto arg = inner("omega")) {
    f.kind = Kind::Omega;
    f.epsilon = parse_rational(*arg);
    if (sgn(f.epsilon) <= 0) throw InvalidArgument("omega filter: epsilon must be positive");
    return f;
  }
  if (auto arg = inner("multiples")) {
    f.kind = Kind::Multiples;
    try {
      f.modulus = std::stoull(*arg);
    } catch (const std::exception&) {
      throw InvalidArgument("multiples filter: bad modulus '" + *arg + "'");
    }
    if (f.modulus == 0) throw InvalidArgument("multiples filter: modulus must be positive");
    return f;
  }
  if (auto arg = inner("set")) {
    f.kind = Kind::IntegerSet;
    std::stringstream ss(*arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        f.set.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw InvalidArgument("set filter: bad entry '" + item + "'");
      }
    }
    std::sort(f.set.begin(), f.set.end());
    f.set.erase(std::unique(f.set.begin(), f.set.end()), f.set.end());
    return f;
  }
  if (text.rfind("F<=", 0) == 0) {
    f.kind = Kind::FAtMost;
    f.threshold_text = trim(text.substr(3));
    try {
      size_t used = 0;
      f.threshold = std::stold(f.threshold_text, &used);
      if (used != f.threshold_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("F filter: bad threshold '" + f.threshold_text + "'");
    }
    return f;
  }
  throw InvalidArgument("unknown filter '" + text + "'");
}

std::string Filter::to_string() const {
  switch (kind) {
    case Kind::Omega:
      return "omega(" + epsilon.get_str() + ")";
    case Kind::FAtMost:
      return "F<=" + threshold_text;
    case Kind::IntegerSet: {
      std::string s = "set(";
      for (size_t i = 0; i < set.size(); ++i) s += (i ? "," : "") + std::to_string(set[i]);
      return s + ")";
    }
    default:
      return "multiples(" + std::to_string(modulus) + ")";
  }
}

Decision Filter::decide(std::uint64_t q) const {
  switch (kind) {
    case Kind::Omega:
      if (q < 3) return Decision::True;  // Omega(q) <= (log2 q)^e holds as 0 <= 0 and 1 <= 1
      return arith::omega_support_decide(q, epsilon);
    case Kind::FAtMost: {
      const Estimate F = F_of(q);
      if (F.hi() <= threshold) return Decision::True;
      if (F.lo() > threshold) return Decision::False;
      return Decision::Indeterminate;
    }
    case Kind::IntegerSet:
      return std::binary_search(set.begin(), set.end(), q) ? Decision::True : Decision::False;
    default:
      return q % modulus == 0 ? Decision::True : Decision::False;
  }
}

bool Filter::accepts(std::uint64_t q) const { return decide(q) == Decision::True; }

struct ApproxFunction::Impl {
  Family family = Family::Table;
  mpq_class c = 0;
  std::uint64_t q0 = 1;
  std::vector<Filter> filters;
  std::map<std::uint64_t, mpq_class> table;
  bool grid = true;
  long double c_ld = 0;

  mutable std::mutex mu;
  mutable std::shared_ptr<const std::vector<u128>> cache;
};

ApproxFunction::ApproxFunction() : impl_(std::make_shared<Impl>()) {}

namespace {

struct MpfrBox {
  mpfr_t v;
  explicit MpfrBox(mpfr_prec_t p) { mpfr_init2(v, p); }
  ~MpfrBox() { mpfr_clear(v); }
};

// Floor of c * 2^96 / den(q) where den is one of the logarithmic families.
mpz_class log_family_floor(Family fam, const mpq_class& c, std::uint64_t q) {
  const mpq_class c96 = c * mpq_class(two_pow(kGridBits));
  // Exact when log2 q (and for the log-log families log2 log2 q) are integers.
  if (is_pow2(q)) {
    const std::uint64_t k = static_cast<std::uint64_t>(std::countr_zero(q));
    mpq_class den;
    if (fam == Family::CoverQLog) {
      den = mpq_class(q) * k;
    } else if (is_pow2(k)) {
      const std::uint64_t m = static_cast<std::uint64_t>(std::countr_zero(k));
      den = mpq_class(q) * m * m;
      if (fam == Family::CoverQLogLogLog2) den *= k;
    }
    if (sgn(den) > 0) {
      const mpq_class v = c96 / den;
      mpz_class f;
      mpz_fdiv_q(f.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
      return f;
    }
  }
  for (mpfr_prec_t prec = 160; prec <= 65536; prec *= 2) {
    MpfrBox l_lo(prec), l_hi(prec), d_lo(prec), d_hi(prec), t(prec);
    mpfr_set_ui(t.v, q, MPFR_RNDN);
    mpfr_log2(l_lo.v, t.v, MPFR_RNDD);
    mpfr_log2(l_hi.v, t.v, MPFR_RNDU);
    if (fam == Family::CoverQLog) {
      mpfr_mul_ui(d_lo.v, l_lo.v, q, MPFR_RNDD);
      mpfr_mul_ui(d_hi.v, l_hi.v, q, MPFR_RNDU);
    } else {
      MpfrBox ll_lo(prec), ll_hi(prec);
      mpfr_log2(ll_lo.v, l_lo.v, MPFR_RNDD);  // q >= 5, so log2 log2 q > 1
      mpfr_log2(ll_hi.v, l_hi.v, MPFR_RNDU);
      mpfr_sqr(d_lo.v, ll_lo.v, MPFR_RNDD);
      mpfr_sqr(d_hi.v, ll_hi.v, MPFR_RNDU);
      mpfr_mul_ui(d_lo.v, d_lo.v, q, MPFR_RNDD);
      mpfr_mul_ui(d_hi.v, d_hi.v, q, MPFR_RNDU);
      if (fam == Family::CoverQLogLogLog2) {
        mpfr_mul(d_lo.v, d_lo.v, l_lo.v, MPFR_RNDD);
        mpfr_mul(d_hi.v, d_hi.v, l_hi.v, MPFR_RNDU);
      }
    }
    MpfrBox v_lo(prec), v_hi(prec);
    mpfr_set_q(t.v, c96.get_mpq_t(), MPFR_RNDD);
    mpfr_div(v_lo.v, t.v, d_hi.v, MPFR_RNDD);
    mpfr_set_q(t.v, c96.get_mpq_t(), MPFR_RNDU);
    mpfr_div(v_hi.v, t.v, d_lo.v, MPFR_RNDU);
    mpz_class f_lo, f_hi;
    mpfr_get_z(f_lo.get_mpz_t(), v_lo.v, MPFR_RNDD);
    mpfr_get_z(f_hi.get_mpz_t(), v_hi.v, MPFR_RNDD);
    if (f_lo == f_hi) return f_lo;
  }
  throw IndeterminateAtPrecision("psi quantization undecided at q = " + std::to_string(q));
}

std::uint64_t guard_start(Family f) {
  switch (f) {
    case Family::CoverQLogLog2:
    case Family::CoverQLogLogLog2:
      return 5;
    case Family::CoverQLog:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

u128 ApproxFunction::family_grid_value(std::uint64_t q) const {
  const Impl& m = *impl_;
  if (q < m.q0 || q < guard_start(m.family)) return 0;
  mpz_class f;
  switch (m.family) {
    case Family::CoverQ: {
      const mpz_class num = m.c.get_num() * two_pow(kGridBits);
      const mpz_class den = m.c.get_den() * q;
      mpz_fdiv_q(f.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
      break;
    }
    case Family::Constant: {
      const mpz_class num = m.c.get_num() * two_pow(kGridBits);
      mpz_fdiv_q(f.get_mpz_t(), num.get_mpz_t(), m.c.get_den_mpz_t());
      break;
    }
    default:
      f = log_family_floor(m.family, m.c, q);
  }
  return to_u128(f);
}

ApproxFunction ApproxFunction::make(Family family, const mpq_class& c,
                                    std::optional<std::uint64_t> q0, std::vector<Filter> filters) {
  if (family == Family::Table) throw InvalidArgument("use ApproxFunction::table for tables");
  if (sgn(c) <= 0) throw InvalidArgument("psi: c must be positive");
  ApproxFunction psi;
  auto& m = *psi.impl_;
  m.family = family;
  m.c = c;
  m.c.canonicalize();
  m.c_ld = static_cast<long double>(c.get_d());
  {
    mpfr_t t;
    mpfr_init2(t, 64);
    mpfr_set_q(t, m.c.get_mpq_t(), MPFR_RNDN);
    m.c_ld = mpfr_get_ld(t, MPFR_RNDN);
    mpfr_clear(t);
  }
  m.filters = std::move(filters);
  m.q0 = 1;
  if (family == Family::Constant) {
    if (c >= mpq_class(1, 2)) throw InvalidArgument("psi: constant c must be below 1/2");
    m.q0 = q0.value_or(1);
    if (m.q0 == 0) throw InvalidArgument("psi: q0 must be positive");
    return psi;
  }
  const std::uint64_t g = guard_start(family);
  if (q0) {
    if (*q0 == 0) throw InvalidArgument("psi: q0 must be positive");
    m.q0 = std::max(*q0, g);
    if (psi.family_grid_value(m.q0) >= kHalf)
      throw InvalidArgument("psi: c = " + c.get_str() + " gives psi(q0) >= 1/2 at q0 = " +
                            std::to_string(m.q0));
    return psi;
  }
  // Each family decreases from its guard on, so the first admissible q works.
  std::uint64_t q = g;
  m.q0 = 1;
  while (psi.family_grid_value(q) >= kHalf) {
    ++q;
    if (q > (1ull << 40)) throw InvalidArgument("psi: c too large, no admissible q0");
  }
  m.q0 = q;
  return psi;
}

ApproxFunction ApproxFunction::table(std::map<std::uint64_t, mpq_class> values,
                                     std::vector<Filter> filters) {
  ApproxFunction psi;
  auto& m = *psi.impl_;
  m.family = Family::Table;
  m.filters = std::move(filters);
  const mpz_class two96 = two_pow(kGridBits);
  for (auto it = values.begin(); it != values.end();) {
    it->second.canonicalize();
    if (it->first == 0) throw InvalidArgument("psi table: q must be positive");
    if (sgn(it->second) < 0 || it->second >= mpq_class(1, 2))
      throw InvalidArgument("psi table: value at q = " + std::to_string(it->first) +
                            " must lie in [0, 1/2)");
    if (sgn(it->second) == 0) {
      it = values.erase(it);
      continue;
    }
    if (two96 % it->second.get_den() != 0) m.grid = false;
    ++it;
  }
  m.table = std::move(values);
  return psi;
}

ApproxFunction ApproxFunction::with_filter(const Filter& f) const {
  ApproxFunction out;
  const Impl& m = *impl_;
  auto& n = *out.impl_;
  n.family = m.family;
  n.c = m.c;
  n.q0 = m.q0;
  n.filters = m.filters;
  n.filters.push_back(f);
  n.table = m.table;
  n.grid = m.grid;
  n.c_ld = m.c_ld;
  return out;
}

Family ApproxFunction::family() const { return impl_->family; }
const mpq_class& ApproxFunction::c() const { return impl_->c; }
std::uint64_t ApproxFunction::q0() const { return impl_->q0; }
const std::vector<Filter>& ApproxFunction::filters() const { return impl_->filters; }
const std::map<std::uint64_t, mpq_class>& ApproxFunction::table_values() const {
  return impl_->table;
}
bool ApproxFunction::on_grid() const { return impl_->grid; }
bool ApproxFunction::is_zero() const {
  return impl_->family == Family::Table && impl_->table.empty();
}

std::string ApproxFunction::describe() const {
  const Impl& m = *impl_;
  std::string s = family_name(m.family);
  if (m.family == Family::Table) {
    s += "[" + std::to_string(m.table.size()) + " entries]";
  } else {
    s += ":" + m.c.get_str() + " (q0=" + std::to_string(m.q0) + ")";
  }
  for (const auto& f : m.filters) s += " " + f.to_string();
  return s;
}

std::uint64_t ApproxFunction::support_max() const {
  if (impl_->family != Family::Table) return std::numeric_limits<std::uint64_t>::max();
  return impl_->table.empty() ? 0 : impl_->table.rbegin()->first;
}

bool ApproxFunction::passes_filters(std::uint64_t q) const {
  for (const auto& f : impl_->filters)
    if (!f.accepts(q)) return false;
  return true;
}

mpq_class ApproxFunction::eval(std::uint64_t q) const {
  if (q == 0) throw InvalidArgument("psi: q must be positive");
  const Impl& m = *impl_;
  if (m.family == Family::Table) {
    auto it = m.table.find(q);
    if (it == m.table.end() || !passes_filters(q)) return 0;
    return it->second;
  }
  const u128 P = eval_grid(q);
  mpq_class v(to_mpz(P), two_pow(kGridBits));
  v.canonicalize();
  return v;
}

u128 ApproxFunction::eval_grid(std::uint64_t q) const {
  if (q == 0) throw InvalidArgument("psi: q must be positive");
  const Impl& m = *impl_;
  if (!m.grid) throw InvalidArgument("psi: values are not on the 2^-96 grid");
  {
    std::shared_ptr<const std::vector<u128>> c;
    {
      std::lock_guard<std::mutex> l(m.mu);
      c = m.cache;
    }
    if (c && q < c->size()) return (*c)[q];
  }
  if (m.family == Family::Table) {
    auto it = m.table.find(q);
    if (it == m.table.end() || !passes_filters(q)) return 0;
    const mpq_class s = it->second * mpq_class(two_pow(kGridBits));
    return to_u128(s.get_num());
  }
  const u128 v = family_grid_value(q);
  if (v == 0 || !passes_filters(q)) return 0;
  return v;
}

std::shared_ptr<const std::vector<u128>> ApproxFunction::grid_table(std::uint64_t q_max,
                                                                    unsigned threads) const {
  const Impl& m = *impl_;
  std::shared_ptr<const std::vector<u128>> cur;
  {
    std::lock_guard<std::mutex> l(m.mu);
    cur = m.cache;
  }
  if (cur && cur->size() > q_max) return cur;
  const std::uint64_t from = cur ? cur->size() : 1;
  auto next = std::make_shared<std::vector<u128>>(q_max + 1, 0);
  if (cur) std::copy(cur->begin(), cur->end(), next->begin());
  std::vector<u128>& out = *next;
  parallel_for(from, q_max + 1, 256, threads, [&](std::uint64_t q) {
    if (q == 0) return;
    out[q] = eval_grid(q);
  });
  std::lock_guard<std::mutex> l(m.mu);
  if (!m.cache || m.cache->size() < next->size()) m.cache = next;
  return m.cache;
}

long double ApproxFunction::eval_ld(std::uint64_t q) const {
  const Impl& m = *impl_;
  if (m.family == Family::Table) {
    auto it = m.table.find(q);
    if (it == m.table.end() || !passes_filters(q)) return 0;
    mpfr_t t;
    mpfr_init2(t, 64);
    mpfr_set_q(t, it->second.get_mpq_t(), MPFR_RNDN);
    const long double v = mpfr_get_ld(t, MPFR_RNDN);
    mpfr_clear(t);
    return v;
  }
  if (q < m.q0 || q < guard_start(m.family)) return 0;
  const long double x = static_cast<long double>(q);
  long double v;
  switch (m.family) {
    case Family::CoverQ:
      v = m.c_ld / x;
      break;
    case Family::Constant:
      v = m.c_ld;
      break;
    case Family::CoverQLog:
      v = m.c_ld / (x * std::log2(x));
      break;
    case Family::CoverQLogLog2: {
      const long double ll = std::log2(std::log2(x));
      v = m.c_ld / (x * ll * ll);
      break;
    }
    default: {
      const long double l = std::log2(x), ll = std::log2(l);
      v = m.c_ld / (x * l * ll * ll);
    }
  }
  if (!m.filters.empty() && !passes_filters(q)) return 0;
  return v;
}

mpq_class delta(const ApproxFunction& psi, std::uint64_t q, std::uint64_t q2) {
  return mpq_class(q) * psi.eval(q2) + mpq_class(q2) * psi.eval(q);
}

DivergenceReport dyadic_partial_sums(const ApproxFunction& psi, std::uint64_t Q) {
  DivergenceReport rep;
  mpq_class s = 0;
  mpz_class grid_sum = 0;
  const bool grid = psi.on_grid();
  std::shared_ptr<const std::vector<u128>> tab;
  if (grid) tab = psi.grid_table(Q);
  std::uint64_t next = 1;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    if (grid)
      grid_sum += to_mpz((*tab)[q]);
    else
      s += psi.eval(q);
    if (q == next || q == Q) {
      PartialSum p;
      p.Q = q;
      p.exact = grid ? make_q(grid_sum, two_pow(kGridBits)) : s;
      p.exact.canonicalize();
      rep.partial_sums.push_back(p);
      if (q == next) next *= 2;
    }
  }
  return rep;
}

namespace {

struct LdSum {
  long double sum = 0, comp = 0, abs_sum = 0;
  std::uint64_t terms = 0;

  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
    abs_sum += std::fabs(x);
    ++terms;
  }
  long double value() const { return sum + comp; }
};

LdSum merge(LdSum a, const LdSum& b) {
  LdSum r;
  r.add(a.value());
  r.add(b.value());
  r.abs_sum = a.abs_sum + b.abs_sum;
  r.terms = a.terms + b.terms;
  return r;
}

Estimate finish(const LdSum& s, long double rel_err, long double per_term_abs) {
  const long double v = s.value();
  const long double err = s.abs_sum * (rel_err + 8 * kLdEps) +
                          static_cast<long double>(s.terms) * per_term_abs + std::fabs(v) * kLdEps;
  return {v, up(err)};
}

constexpr long double kEvalRelErr = 1.0L / 288230376151711744.0L;  // 2^-58

}  // namespace

DivergenceReport wex_scan(const ApproxFunction& psi, const std::vector<std::uint64_t>& Q_list,
                          unsigned threads) {
  DivergenceReport rep;
  for (std::uint64_t Q : Q_list) {
    if (Q < 16) throw InvalidArgument("wex_scan: each Q must be at least 16");
    const long double lq = std::log2(static_cast<long double>(Q));
    const long double e = lq * std::pow(lq, 0.125L);
    WexWindow w;
    w.Q = Q;
    if (e >= 40) {
      w.upper = kWexCap;
      w.capped = true;
      rep.window_capped = true;
    } else {
      w.upper = static_cast<std::uint64_t>(std::floor(std::exp2(e)));
    }
    // Tables vanish past their last key; skip the zero tail.
    const std::uint64_t last = std::min(w.upper, psi.support_max());
    const LdSum s = parallel_reduce<LdSum>(
        Q, last < Q ? Q : last + 1, 1ull << 20, threads, LdSum{},
        [&](std::uint64_t b, std::uint64_t e2) {
          LdSum acc;
          for (std::uint64_t q = b; q < e2; ++q) acc.add(psi.eval_ld(q));
          return acc;
        },
        merge);
    // The quantized values differ from the real family by less than 2^-96 each.
    w.sum = finish(s, kEvalRelErr, std::ldexp(1.0L, -96));
    rep.wex.push_back(w);
  }
  return rep;
}

Decision condition_d_member(std::uint64_t q, const realnum::TorusPoint& beta,
                            const realnum::TorusPoint& gamma2, Estimate* distance) {
  if (q < 2) return Decision::False;
  const u128 t = static_cast<u128>(q) * beta.t - gamma2.t;
  const i128 s = static_cast<i128>(t);
  const long double two128 = std::ldexp(1.0L, 128);
  const long double mag = t == pow2_u128(127) ? 0.5L : std::fabs(to_long_double(s)) / two128;
  const long double err =
      up((static_cast<long double>(q) * beta.err_ld + gamma2.err_ld) * (1 + 4 * kLdEps) +
         mag * kLdEps);
  if (distance) *distance = {mag, err};
  const long double thr = 1 / std::log2(static_cast<long double>(q));
  const long double terr = 4 * kLdEps * thr;
  if (mag - err >= thr + terr) return Decision::True;
  if (mag + err < thr - terr) return Decision::False;

  // Near the threshold: exact distance ball against an MPFR enclosure of 1/log2 q.
  mpz_class num = t == pow2_u128(127) ? two_pow(127) : mpz_class(abs(to_mpz(s)));
  const mpq_class d(num, two_pow(128));
  const mpq_class rad = mpq_class(q) * beta.err + gamma2.err;
  const mpq_class dlo = d - rad, dhi = d + rad;
  mpfr_t lo, hi, x;
  mpfr_inits2(256, lo, hi, x, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_ui(x, q, MPFR_RNDN);
  mpfr_log2(lo, x, MPFR_RNDU);
  mpfr_ui_div(lo, 1, lo, MPFR_RNDD);
  mpfr_log2(hi, x, MPFR_RNDD);
  mpfr_ui_div(hi, 1, hi, MPFR_RNDU);
  Decision r = Decision::Indeterminate;
  if (mpfr_cmp_q(hi, dlo.get_mpq_t()) <= 0)
    r = Decision::True;
  else if (mpfr_cmp_q(lo, dhi.get_mpq_t()) > 0)
    r = Decision::False;
  mpfr_clears(lo, hi, x, static_cast<mpfr_ptr>(nullptr));
  return r;
}

DivergenceReport condition_D_scan(const ApproxFunction& psi, const realnum::CertifiedReal& beta,
                                  const realnum::CertifiedReal& gamma2, std::uint64_t Q) {
  if (Q < 16) throw InvalidArgument("condition_D_scan: Q must be at least 16");
  const auto B = realnum::to_torus128(beta, 120);
  const auto G2 = realnum::to_torus128(gamma2, 120);
  DivergenceReport rep;
  LdSum acc;
  long double extra_err = 0;
  std::uint64_t members = 0, indet = 0;
  std::uint64_t next = 2;
  for (std::uint64_t q = 2; q <= Q; ++q) {
    Estimate d;
    const Decision m = condition_d_member(q, B, G2, &d);
    if (m == Decision::True) {
      ++members;
      const long double p = psi.eval_ld(q);
      if (p != 0) {
        const long double term = p / d.value;
        acc.add(term);
        // relative error of 1/d plus the evaluation error of psi
        extra_err += term * (d.err / (d.value - d.err) + kEvalRelErr + 4 * kLdEps);
      }
    } else if (m == Decision::Indeterminate) {
      ++indet;
      rep.indeterminate_q.push_back(q);
    }
    if (q == next || q == Q) {
      DCheckpoint c;
      c.Q = q;
      c.sum = finish(acc, 0, 0);
      c.sum.err = up(c.sum.err + extra_err);
      c.members = members;
      c.indeterminate = indet;
      rep.condition_d.push_back(c);
      if (q == next) next *= 2;
    }
  }
  return rep;
}

RestrictedSum restricted_sum(const std::function<long double(std::uint64_t)>& weight,
                             const std::function<bool(std::uint64_t)>& in_set, std::uint64_t Q,
                             long double rel_err) {
  if (Q == 0) throw InvalidArgument("restricted_sum: Q must be positive");
  RestrictedSum r;
  LdSum acc;
  std::uint64_t next = 2;
  bool first = true;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    if (in_set(q)) {
      ++r.count;
      acc.add(weight(q));
    }
    if (q == next) {
      mpq_class dens(r.count, q);
      dens.canonicalize();
      r.densities.emplace_back(q, dens);
      if (first || dens < r.min_density) {
        r.min_density = dens;
        r.min_density_at = q;
        first = false;
      }
      next *= 2;
    }
  }
  if (first) {
    // Q < 2: the only checkpoint is Q itself.
    r.min_density = make_q(r.count, Q);
    r.min_density.canonicalize();
    r.min_density_at = Q;
    r.densities.emplace_back(Q, r.min_density);
  }
  r.sum = finish(acc, rel_err, 0);
  return r;
}

RestrictedSum restricted_sum(const ApproxFunction& psi,
                             const std::function<bool(std::uint64_t)>& in_set, std::uint64_t Q) {
  return restricted_sum([&](std::uint64_t q) { return psi.eval_ld(q); }, in_set, Q, kEvalRelErr);
}

}  // namespace mdl::approxfun
