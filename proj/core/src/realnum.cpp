#include "mdl/realnum.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"

namespace mdl::realnum {

namespace {

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

mpz_class pow2(unsigned long e) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
  return r;
}

mpq_class mpfr_to_q(mpfr_srcptr x) {
  mpq_class r;
  mpfr_get_q(r.get_mpq_t(), x);
  return r;
}

std::pair<mpq_class, mpq_class> mpfr_constant(unsigned digits,
                                              int (*fn)(mpfr_ptr, mpfr_rnd_t)) {
  const mpfr_prec_t prec = static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 32;
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  fn(lo, MPFR_RNDD);
  fn(hi, MPFR_RNDU);
  const mpq_class a = mpfr_to_q(lo), b = mpfr_to_q(hi);
  mpfr_clear(lo);
  mpfr_clear(hi);
  return {(a + b) / 2, (b - a) / 2};
}

int mpfr_e(mpfr_ptr r, mpfr_rnd_t rnd) {
  mpfr_t one;
  mpfr_init2(one, 2);
  mpfr_set_ui(one, 1, MPFR_RNDN);
  const int t = mpfr_exp(r, one, rnd);
  mpfr_clear(one);
  return t;
}
int mpfr_pi(mpfr_ptr r, mpfr_rnd_t rnd) { return mpfr_const_pi(r, rnd); }
int mpfr_ln2(mpfr_ptr r, mpfr_rnd_t rnd) { return mpfr_const_log2(r, rnd); }

std::pair<mpq_class, mpq_class> sqrt_scaled(unsigned digits, unsigned long radicand) {
  // sqrt(radicand) in [s, s + 1) / 10^d
  const mpz_class scale = pow10(digits);
  mpz_class s = radicand * scale * scale;
  mpz_sqrt(s.get_mpz_t(), s.get_mpz_t());
  mpq_class mid(2 * s + 1, 2 * scale);
  mid.canonicalize();
  mpq_class rad(1, 2 * scale);
  rad.canonicalize();
  return {mid, rad};
}

std::pair<mpq_class, mpq_class> liouville_partial(unsigned digits) {
  // smallest N with (N + 1)! >= digits + 1
  unsigned long N = 1, next_fact = 2;
  while (next_fact < digits + 1ul) {
    ++N;
    next_fact *= (N + 1);
  }
  mpq_class sum = 0;
  unsigned long fact = 1;
  for (unsigned long n = 1; n <= N; ++n) {
    fact *= n;
    sum += mpq_class(1, pow10(fact));
  }
  sum.canonicalize();
  mpq_class err(2, pow10(next_fact));
  err.canonicalize();
  return {sum, err};
}

mpq_class parse_decimal(const std::string& text) {
  size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw InvalidArgument("not a decimal number: '" + text + "'");
  long exp10 = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    size_t used = 0;
    try {
      exp10 = std::stol(text.substr(i), &used);
    } catch (const std::exception&) {
      throw InvalidArgument("bad exponent in '" + text + "'");
    }
    i += used;
  }
  if (i != text.size()) throw InvalidArgument("trailing characters in '" + text + "'");
  const long e = exp10 - frac_digits;
  if (std::labs(e) > 100000) throw InvalidArgument("exponent out of range in '" + text + "'");
  mpq_class v{mpz_class(digits)};
  if (e >= 0)
    v *= pow10(static_cast<unsigned long>(e));
  else
    v /= pow10(static_cast<unsigned long>(-e));
  v.canonicalize();
  return neg ? mpq_class(-v) : v;
}

long double ld_up(const mpq_class& x) {
  mpfr_t t;
  mpfr_init2(t, 64);
  mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDU);
  const long double r = mpfr_get_ld(t, MPFR_RNDU);
  mpfr_clear(t);
  return r;
}

Estimate from_bounds(long double lo, long double hi) {
  const long double v = lo / 2 + hi / 2;
  const long double e = std::max(hi - v, v - lo);
  return {v, std::nextafter(e, std::numeric_limits<long double>::infinity())};
}

mpq_class frac_part(const mpq_class& x) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return x - mpq_class(f);
}

}  // namespace

struct CertifiedReal::State {
  std::mutex mu;
  mpq_class approx = 0;
  mpq_class err = 0;
  unsigned digits = 0;
  bool exact = true;
  bool refinable = false;
  std::string label;
  Refiner refiner;
  PrecisionPolicy policy;
};

CertifiedReal::CertifiedReal() : state_(std::make_shared<State>()) { state_->label = "0"; }

CertifiedReal CertifiedReal::exact(const mpq_class& value, std::string label) {
  CertifiedReal r;
  r.state_->approx = value;
  r.state_->approx.canonicalize();
  r.state_->label = label.empty() ? r.state_->approx.get_str() : std::move(label);
  return r;
}

CertifiedReal CertifiedReal::fixed(const mpq_class& approx, const mpq_class& err,
                                   std::string label) {
  if (sgn(err) < 0) throw InvalidArgument("error bound must be nonnegative");
  CertifiedReal r;
  r.state_->approx = approx;
  r.state_->err = err;
  r.state_->exact = sgn(err) == 0;
  r.state_->label = std::move(label);
  return r;
}

CertifiedReal CertifiedReal::from_refiner(std::string label, Refiner refiner,
                                          PrecisionPolicy policy) {
  if (policy.start_digits == 0 || policy.max_digits < policy.start_digits)
    throw InvalidArgument("precision policy: need 0 < start_digits <= max_digits");
  CertifiedReal r;
  auto& s = *r.state_;
  s.label = std::move(label);
  s.refiner = std::move(refiner);
  s.policy = policy;
  s.exact = false;
  s.refinable = true;
  s.digits = policy.start_digits;
  std::tie(s.approx, s.err) = s.refiner(s.digits);
  return r;
}

const std::vector<std::string>& CertifiedReal::preset_names() {
  static const std::vector<std::string> names{"sqrt2", "golden", "e", "pi", "ln2", "liouville"};
  return names;
}

bool CertifiedReal::is_preset(const std::string& name) {
  const auto& n = preset_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

CertifiedReal CertifiedReal::preset(const std::string& name, PrecisionPolicy policy) {
  Refiner f;
  if (name == "sqrt2") {
    f = [](unsigned d) { return sqrt_scaled(d, 2); };
  } else if (name == "golden") {
    f = [](unsigned d) {
      auto [m, r] = sqrt_scaled(d, 5);
      return std::make_pair(mpq_class((m + 1) / 2), mpq_class(r / 2));
    };
  } else if (name == "e") {
    f = [](unsigned d) { return mpfr_constant(d, mpfr_e); };
  } else if (name == "pi") {
    f = [](unsigned d) { return mpfr_constant(d, mpfr_pi); };
  } else if (name == "ln2") {
    f = [](unsigned d) { return mpfr_constant(d, mpfr_ln2); };
  } else if (name == "liouville") {
    f = liouville_partial;
  } else {
    throw InvalidArgument("unknown preset '" + name + "'");
  }
  return from_refiner(name, std::move(f), policy);
}

CertifiedReal CertifiedReal::parse(const std::string& text, PrecisionPolicy policy) {
  if (text.empty()) throw InvalidArgument("empty real-number literal");
  if (is_preset(text)) return preset(text, policy);
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const mpq_class a = parse_decimal(text.substr(0, colon));
    const mpq_class e = parse_decimal(text.substr(colon + 1));
    if (sgn(e) < 0) throw InvalidArgument("negative error bound in '" + text + "'");
    return fixed(a, e, text);
  }
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    mpq_class v;
    const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    mpz_class n, d;
    if (num.empty() || den.empty() || n.set_str(num, 10) != 0 || d.set_str(den, 10) != 0)
      throw InvalidArgument("bad fraction '" + text + "'");
    if (d == 0) throw InvalidArgument("zero denominator in '" + text + "'");
    v = make_q(n, d);
    v.canonicalize();
    return exact(v, text);
  }
  return exact(parse_decimal(text), text);
}

bool CertifiedReal::is_exact() const {
  std::lock_guard<std::mutex> l(state_->mu);
  return state_->exact;
}

bool CertifiedReal::refinable() const {
  std::lock_guard<std::mutex> l(state_->mu);
  return state_->refinable;
}

const std::string& CertifiedReal::label() const { return state_->label; }
const PrecisionPolicy& CertifiedReal::policy() const { return state_->policy; }

Ball CertifiedReal::ball() const {
  std::lock_guard<std::mutex> l(state_->mu);
  return {state_->approx, state_->err};
}

unsigned CertifiedReal::digits() const {
  std::lock_guard<std::mutex> l(state_->mu);
  return state_->digits;
}

bool CertifiedReal::refine_once() const {
  std::lock_guard<std::mutex> l(state_->mu);
  auto& s = *state_;
  if (!s.refinable || s.digits >= s.policy.max_digits) return false;
  const unsigned next = std::min(s.digits * 2, s.policy.max_digits);
  auto [a, e] = s.refiner(next);
  if (e >= s.err) return false;
  s.approx = std::move(a);
  s.err = std::move(e);
  s.digits = next;
  return true;
}

Ball CertifiedReal::ball_within(const mpq_class& target) const {
  for (;;) {
    Ball b = ball();
    if (b.rad <= target) return b;
    if (!refine_once())
      throw IndeterminateAtPrecision("cannot refine " + label() + " to the requested error");
  }
}

TorusPoint to_torus128(const CertifiedReal& x, int min_err_bits) {
  Ball b = x.refinable() ? x.ball_within(mpq_class(1, pow2(min_err_bits))) : x.ball();
  const mpq_class f = frac_part(b.mid);
  const mpz_class scale = pow2(128);
  mpq_class scaled = f * scale;
  // round to nearest
  mpz_class T;
  mpz_class twice = 2 * scaled.get_num() + scaled.get_den();
  mpz_class den2 = 2 * scaled.get_den();
  mpz_fdiv_q(T.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
  TorusPoint p;
  p.err = b.rad + abs(scaled - mpq_class(T)) / mpq_class(scale);
  p.err.canonicalize();
  mpz_class Tm;
  mpz_fdiv_r_2exp(Tm.get_mpz_t(), T.get_mpz_t(), 128);
  p.t = to_u128(Tm);
  p.err_ld = ld_up(p.err);
  return p;
}

Grid96 to_grid96(const CertifiedReal& x) {
  Grid96 g;
  Ball b = x.refinable() ? x.ball_within(mpq_class(1, pow2(112))) : x.ball();
  const mpq_class f = frac_part(b.mid);
  const mpz_class scale = pow2(96);
  mpq_class scaled = f * scale;
  if (sgn(b.rad) == 0 && scaled.get_den() == 1) {
    g.G = to_u128(scaled.get_num());
    g.on_grid = true;
    return g;
  }
  mpz_class twice = 2 * scaled.get_num() + scaled.get_den();
  mpz_class den2 = 2 * scaled.get_den();
  mpz_class G;
  mpz_fdiv_q(G.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
  g.err = b.rad + abs(scaled - mpq_class(G)) / mpq_class(scale);
  g.err.canonicalize();
  if (G == scale) G = 0;
  g.G = to_u128(G);
  g.err_ld = ld_up(g.err);
  return g;
}

RationalHat rational_hat(const CertifiedReal& x) {
  if (x.is_exact()) return {frac_part(x.ball().mid), 0};
  const Grid96 g = to_grid96(x);
  mpq_class v(to_mpz(g.G), pow2(96));
  v.canonicalize();
  return {v, g.err};
}

mpq_class signed_frac(const mpq_class& x) {
  const mpq_class y = x - mpq_class(1, 2);
  mpz_class n;
  mpz_cdiv_q(n.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  return x - mpq_class(n);
}

mpq_class dist_to_int(const mpq_class& x) { return abs(signed_frac(x)); }

Ball signed_frac(const CertifiedReal& x) {
  for (;;) {
    const Ball b = x.ball();
    if (sgn(b.rad) == 0) return {signed_frac(b.mid), 0};
    auto n_of = [](const mpq_class& v) {
      const mpq_class y = v - mpq_class(1, 2);
      mpz_class n;
      mpz_cdiv_q(n.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
      return n;
    };
    const mpz_class n1 = n_of(b.lo()), n2 = n_of(b.hi());
    if (n1 == n2) return {b.mid - mpq_class(n1), b.rad};
    if (!x.refine_once())
      throw IndeterminateAtPrecision("signed_frac: " + x.label() + " sits on a half-integer");
  }
}

Ball dist_to_int(const CertifiedReal& x) { return dist_ball(x.ball(), 1, 0); }

Ball dist_ball(const Ball& x, const mpz_class& q, const mpq_class& shift) {
  const mpq_class m = mpq_class(q) * x.mid - shift;
  return {dist_to_int(m), mpq_class(abs(q)) * x.rad};
}

ContinuedFraction cf_from_quotients(const std::vector<mpz_class>& a) {
  ContinuedFraction cf;
  cf.a = a;
  mpz_class p_prev2 = 0, p_prev = 1, q_prev2 = 1, q_prev = 0;
  for (const auto& ai : a) {
    const mpz_class p = ai * p_prev + p_prev2;
    const mpz_class q = ai * q_prev + q_prev2;
    cf.p.push_back(p);
    cf.q.push_back(q);
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
  }
  return cf;
}

ContinuedFraction cf_expand(const CertifiedReal& gamma, unsigned n_terms) {
  for (;;) {
    const Ball b = gamma.ball();
    mpq_class lo = b.lo(), hi = b.hi();
    std::vector<mpz_class> a;
    bool terminated = false, stuck = false;
    while (a.size() < n_terms) {
      mpz_class f_lo, f_hi;
      mpz_fdiv_q(f_lo.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
      mpz_fdiv_q(f_hi.get_mpz_t(), hi.get_num_mpz_t(), hi.get_den_mpz_t());
      if (lo == hi) {
        a.push_back(f_lo);
        const mpq_class r = lo - mpq_class(f_lo);
        if (sgn(r) == 0) {
          terminated = true;
          break;
        }
        lo = hi = 1 / r;
        continue;
      }
      if (f_lo != f_hi || lo == mpq_class(f_lo)) {
        stuck = true;
        break;
      }
      a.push_back(f_lo);
      const mpq_class nlo = 1 / (hi - mpq_class(f_lo));
      const mpq_class nhi = 1 / (lo - mpq_class(f_lo));
      lo = nlo;
      hi = nhi;
    }
    if (!stuck || !gamma.refine_once()) {
      ContinuedFraction cf = cf_from_quotients(a);
      cf.terminated = terminated;
      cf.complete = !stuck;
      return cf;
    }
  }
}

const char* to_string(LiouvilleClass c) {
  switch (c) {
    case LiouvilleClass::Tamely:
      return "tamely";
    case LiouvilleClass::Wildly:
      return "wildly";
    default:
      return "indeterminate";
  }
}

Estimate log_rational(const mpq_class& x) {
  if (sgn(x) <= 0) throw InvalidArgument("log of a nonpositive number");
  mpfr_t lo, hi;
  mpfr_init2(lo, 96);
  mpfr_init2(hi, 96);
  mpfr_set_q(lo, x.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi, x.get_mpq_t(), MPFR_RNDU);
  mpfr_log(lo, lo, MPFR_RNDD);
  mpfr_log(hi, hi, MPFR_RNDU);
  const long double l = mpfr_get_ld(lo, MPFR_RNDD), h = mpfr_get_ld(hi, MPFR_RNDU);
  mpfr_clear(lo);
  mpfr_clear(hi);
  return from_bounds(l, h);
}

namespace {

constexpr long double kLdEps = std::numeric_limits<long double>::epsilon();

// Enclosure of log(1/||q gamma||) / log q from a ball for ||q gamma||.
bool sigma_term(const Ball& d, std::uint64_t q, long double& lo, long double& hi) {
  const mpq_class dl = d.lo();
  if (sgn(dl) <= 0) return false;
  mpq_class dh = d.hi();
  if (dh > mpq_class(1, 2)) dh = mpq_class(1, 2);
  const Estimate a_hi = log_rational(dl);  // log of the smaller distance
  const Estimate a_lo = log_rational(dh);
  const Estimate lq = log_rational(mpq_class(q));
  lo = (-a_lo.hi()) / lq.hi() * (1 - 4 * kLdEps);
  hi = (-a_hi.lo()) / lq.lo() * (1 + 4 * kLdEps);
  return true;
}

LiouvilleClass classify(const Estimate& sigma, long double threshold) {
  const long double slack = 16 * kLdEps * std::max(1.0L, threshold);
  if (sigma.hi() <= threshold - slack) return LiouvilleClass::Tamely;
  if (sigma.lo() > threshold + slack) return LiouvilleClass::Wildly;
  return LiouvilleClass::Indeterminate;
}

}  // namespace

std::vector<SigmaProfile> sigma_series(const CertifiedReal& gamma, std::uint64_t Q_max) {
  if (Q_max < 2) throw InvalidArgument("sigma_of_Q: Q must be at least 2");
  std::vector<long double> lo(Q_max + 1), hi(Q_max + 1), mid(Q_max + 1);
  for (;;) {
    const Ball g = gamma.ball();
    bool ok = true;
    for (std::uint64_t q = 2; q <= Q_max && ok; ++q) {
      const Ball d = dist_ball(g, q);
      ok = sigma_term(d, q, lo[q], hi[q]);
      mid[q] = lo[q] / 2 + hi[q] / 2;
    }
    if (ok) break;
    if (!gamma.refine_once())
      throw IndeterminateAtPrecision("sigma_of_Q: ||q gamma|| not certified nonzero for " +
                                     gamma.label());
  }
  std::vector<SigmaProfile> out;
  out.reserve(Q_max - 1);
  long double run_lo = -1, run_hi = -1, best_mid = -1;
  std::uint64_t witness = 0;
  for (std::uint64_t Q = 2; Q <= Q_max; ++Q) {
    run_lo = std::max(run_lo, lo[Q]);
    run_hi = std::max(run_hi, hi[Q]);
    if (mid[Q] > best_mid) {
      best_mid = mid[Q];
      witness = Q;
    }
    SigmaProfile p;
    p.Q = Q;
    p.sigma = from_bounds(run_lo, run_hi);
    p.witness = witness;
    p.threshold = std::pow(std::log2(static_cast<long double>(Q)), 0.25L);
    p.classification = classify(p.sigma, p.threshold);
    out.push_back(p);
  }
  return out;
}

SigmaProfile sigma_of_Q(const CertifiedReal& gamma, std::uint64_t Q) {
  return sigma_series(gamma, Q).back();
}

LiouvilleScan liouville_set_scan(const CertifiedReal& gamma, std::uint64_t Q_max,
                                 const std::function<unsigned(std::uint64_t)>& sigma_fn,
                                 std::uint64_t Q_min) {
  LiouvilleScan out;
  if (Q_min == 0) Q_min = 1;
  unsigned prev = 0;
  for (std::uint64_t Q = Q_min; Q <= Q_max; ++Q) {
    const unsigned s = sigma_fn(Q);
    if (s == 0) throw InvalidArgument("liouville_set_scan: sigma_fn must be positive");
    if (s < prev) throw InvalidArgument("liouville_set_scan: sigma_fn must be nondecreasing");
    prev = s;
    mpz_class qs;
    mpz_ui_pow_ui(qs.get_mpz_t(), Q, s);
    const mpq_class t(1, qs);
    for (;;) {
      const Ball d = dist_ball(gamma.ball(), Q);
      if (d.hi() < t) {
        out.members.push_back(Q);
        break;
      }
      if (d.lo() >= t) break;
      if (!gamma.refine_once()) {
        out.indeterminate.push_back(Q);
        break;
      }
    }
  }
  return out;
}

SlowGrowthReport slow_growth_check(const CertifiedReal& gamma, std::uint64_t Q,
                                   const std::function<bool(std::uint64_t)>& support,
                                   std::optional<Estimate> sigma, std::uint64_t sieve_limit) {
  if (Q < 2) throw InvalidArgument("slow_growth_check: Q must be at least 2");
  SlowGrowthReport r;
  r.Q = Q;
  r.sigma = sigma ? *sigma : sigma_of_Q(gamma, Q).sigma;
  if (!(r.sigma.lo() > 0)) throw InvalidArgument("slow_growth_check: sigma must be positive");
  const long double lq = std::log2(static_cast<long double>(Q));
  const long double range = std::pow(static_cast<long double>(Q), r.sigma.hi() / 2);
  if (!(range <= static_cast<long double>(sieve_limit)) ||
      range > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
    throw RangeExceeded("slow_growth_check: Q^(sigma/2) = " + format_long_double(range, 6) +
                        " exceeds the sieve limit " + std::to_string(sieve_limit));
  // Guard against pow landing a hair below an exact integer power.
  std::uint64_t X = static_cast<std::uint64_t>(std::floor(range * (1 + 8 * kLdEps)));
  X = std::min<std::uint64_t>(X, sieve_limit);
  r.range_max = X;
  const auto& sv = arith::shared_sieve(std::max<std::uint64_t>(X, 1));
  for (std::uint64_t q = 1; q <= X; ++q) {
    if (!support(q)) continue;
    if (sv.d(q) > r.max_divisor_count) {
      r.max_divisor_count = sv.d(q);
      r.argmax = q;
    }
  }
  // ratio = maxd * log2 Q / Q^(2/sigma); outward from the ends of sigma.
  const long double lo_den = std::pow(static_cast<long double>(Q), 2 / r.sigma.lo());
  const long double hi_den = std::pow(static_cast<long double>(Q), 2 / r.sigma.hi());
  const long double num = static_cast<long double>(r.max_divisor_count) * lq;
  r.ratio = from_bounds(num / lo_den * (1 - 8 * kLdEps), num / hi_den * (1 + 8 * kLdEps));
  return r;
}

}  // namespace mdl::realnum
