#include "mdl/arith.hpp"

#include <mpfr.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>

#include "mdl/errors.hpp"

namespace mdl::arith {

bool FactoredInt::valid() const {
  if (value == 0) return false;
  std::uint64_t prod = 1;
  std::uint64_t last = 1;
  for (auto [p, e] : factors) {
    if (p <= last || e == 0) return false;
    last = p;
    for (unsigned i = 0; i < e; ++i) prod *= p;
  }
  return prod == value;
}

FactoredInt factor(std::uint64_t q) {
  if (q == 0) throw InvalidArgument("factor: q must be positive");
  FactoredInt f;
  f.value = q;
  std::uint64_t m = q;
  auto strip = [&](std::uint64_t p) {
    unsigned e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (e) f.factors.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  for (std::uint64_t p = 5; p <= m / p; p += 6) {
    strip(p);
    strip(p + 2);
  }
  if (m > 1) f.factors.emplace_back(m, 1);
  return f;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t euler_phi(const FactoredInt& f) {
  std::uint64_t r = 1;
  for (auto [p, e] : f.factors) {
    r *= p - 1;
    for (unsigned i = 1; i < e; ++i) r *= p;
  }
  return r;
}

std::uint64_t divisor_count(const FactoredInt& f) {
  std::uint64_t r = 1;
  for (auto [p, e] : f.factors) r *= e + 1;
  return r;
}

unsigned big_omega(const FactoredInt& f) {
  unsigned r = 0;
  for (auto [p, e] : f.factors) r += e;
  return r;
}

std::uint64_t euler_phi(std::uint64_t q) { return euler_phi(factor(q)); }
std::uint64_t divisor_count(std::uint64_t q) { return divisor_count(factor(q)); }
unsigned big_omega(std::uint64_t q) { return big_omega(factor(q)); }

std::vector<std::uint64_t> divisors(const FactoredInt& f) {
  std::vector<std::uint64_t> out{1};
  for (auto [p, e] : f.factors) {
    const size_t n = out.size();
    std::uint64_t pk = 1;
    for (unsigned i = 0; i < e; ++i) {
      pk *= p;
      for (size_t j = 0; j < n; ++j) out.push_back(out[j] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> divisors(std::uint64_t q) { return divisors(factor(q)); }

long double F_term(std::uint64_t r) {
  return std::log2(static_cast<long double>(r)) / static_cast<long double>(r);
}

// The r = 1 term is an exact zero.
long double F_error_bound(std::uint64_t d) {
  return std::ldexp(static_cast<long double>(d - 1), -50);
}

Estimate F(std::uint64_t q) {
  const auto divs = divisors(q);
  long double s = 0;
  for (auto r : divs) s += F_term(r);
  return {s, F_error_bound(divs.size())};
}

namespace {

// Outward-rounded enclosure of (log2 q)^e at the given precision.
void omega_power_bounds(std::uint64_t q, const mpq_class& e, mpfr_prec_t prec, mpfr_t lo,
                        mpfr_t hi) {
  mpfr_t lq, ee;
  mpfr_init2(lq, prec);
  mpfr_init2(ee, prec);
  mpfr_set_ui(lq, q, MPFR_RNDN);  // q < 2^64 fits exactly once prec >= 64
  mpfr_log2(lo, lq, MPFR_RNDD);
  mpfr_log2(hi, lq, MPFR_RNDU);
  // log2 q > 1, so x^e is increasing in both x and e.
  mpfr_set_q(ee, e.get_mpq_t(), MPFR_RNDD);
  mpfr_pow(lo, lo, ee, MPFR_RNDD);
  mpfr_set_q(ee, e.get_mpq_t(), MPFR_RNDU);
  mpfr_pow(hi, hi, ee, MPFR_RNDU);
  mpfr_clear(lq);
  mpfr_clear(ee);
}

}  // namespace

Decision omega_support_decide(std::uint64_t q, const mpq_class& epsilon) {
  if (q < 3) throw InvalidArgument("omega_support_filter: q must be at least 3");
  if (sgn(epsilon) <= 0) throw InvalidArgument("omega_support_filter: epsilon must be positive");
  const FactoredInt f = factor(q);
  const unsigned om = big_omega(f);
  const mpq_class e = mpq_class(1, 2) + epsilon;

  const long double t = std::pow(std::log2(static_cast<long double>(q)), e.get_d());
  const long double margin = std::ldexp(std::max(1.0L, t), -40);
  if (static_cast<long double>(om) < t - margin) return Decision::True;
  if (static_cast<long double>(om) > t + margin) return Decision::False;

  // q a power of two: (log2 q)^(a/b) = Omega iff k^a = Omega^b, decidable exactly.
  if ((q & (q - 1)) == 0 && e.get_num().fits_ulong_p() && e.get_den().fits_ulong_p() &&
      e.get_num() < 4096 && e.get_den() < 4096) {
    const unsigned long k = static_cast<unsigned long>(std::countr_zero(q));
    mpz_class lhs, rhs;
    mpz_ui_pow_ui(lhs.get_mpz_t(), k, e.get_num().get_ui());
    mpz_ui_pow_ui(rhs.get_mpz_t(), om, e.get_den().get_ui());
    return lhs >= rhs ? Decision::True : Decision::False;
  }

  for (mpfr_prec_t prec = 128; prec <= 65536; prec *= 2) {
    mpfr_t lo, hi;
    mpfr_init2(lo, prec);
    mpfr_init2(hi, prec);
    omega_power_bounds(q, e, prec, lo, hi);
    const int c_lo = mpfr_cmp_ui(lo, om);
    const int c_hi = mpfr_cmp_ui(hi, om);
    mpfr_clear(lo);
    mpfr_clear(hi);
    if (c_lo >= 0) return Decision::True;
    if (c_hi < 0) return Decision::False;
  }
  return Decision::Indeterminate;
}

bool omega_support_filter(std::uint64_t q, const mpq_class& epsilon) {
  return omega_support_decide(q, epsilon) == Decision::True;
}

unsigned dl_index_from_phi(std::uint64_t q, std::uint64_t phi) {
  unsigned l = 0;
  while ((static_cast<unsigned __int128>(phi) << (l + 1)) <= q) ++l;
  return l;
}

unsigned dl_index(std::uint64_t q) { return dl_index_from_phi(q, euler_phi(q)); }

unsigned floor_log2(std::uint64_t d) {
  if (d == 0) throw InvalidArgument("floor_log2 of zero");
  return 63u - static_cast<unsigned>(std::countl_zero(d));
}

SieveTable::SieveTable(std::uint64_t limit) : limit_(limit) {
  if (limit == 0) throw InvalidArgument("SieveTable: limit must be positive");
  if (limit > 0xFFFFFFFFull) throw RangeExceeded("SieveTable: limit above 2^32");
  const size_t n = limit + 1;
  spf_.assign(n, 0);
  phi_.assign(n, 0);
  d_.assign(n, 0);
  omega_.assign(n, 0);
  std::vector<std::uint32_t> primes;
  std::vector<std::uint32_t> expo(n, 0), rest(n, 0);

  phi_[1] = 1;
  d_[1] = 1;
  omega_[1] = 0;
  spf_[1] = 1;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf_[i] == 0) {
      spf_[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes) {
      const std::uint64_t m = static_cast<std::uint64_t>(p) * i;
      if (p > spf_[i] || m > limit) break;
      spf_[m] = p;
    }
  }
  for (std::uint64_t q = 2; q <= limit; ++q) {
    const std::uint32_t p = spf_[q];
    const std::uint64_t m = q / p;
    if (m > 1 && spf_[m] == p) {
      expo[q] = expo[m] + 1;
      rest[q] = rest[m];
    } else {
      expo[q] = 1;
      rest[q] = static_cast<std::uint32_t>(m);
    }
    const std::uint32_t r = rest[q];
    std::uint64_t pk1 = 1;
    for (std::uint32_t k = 1; k < expo[q]; ++k) pk1 *= p;
    phi_[q] = static_cast<std::uint32_t>(phi_[r] * pk1 * (p - 1));
    d_[q] = d_[r] * (expo[q] + 1);
    omega_[q] = static_cast<std::uint8_t>(omega_[r] + expo[q]);
  }
}

FactoredInt SieveTable::factor(std::uint64_t q) const {
  if (q == 0) throw InvalidArgument("factor: q must be positive");
  if (q > limit_) return arith::factor(q);
  FactoredInt f;
  f.value = q;
  while (q > 1) {
    const std::uint64_t p = spf_[q];
    unsigned e = 0;
    while (q % p == 0) {
      q /= p;
      ++e;
    }
    f.factors.emplace_back(p, e);
  }
  return f;
}

std::vector<long double> SieveTable::F_values(std::uint64_t upto) const {
  std::vector<long double> out(upto + 1, 0.0L);
  for (std::uint64_t r = 1; r <= upto; ++r) {
    const long double t = F_term(r);
    for (std::uint64_t m = r; m <= upto; m += r) out[m] += t;
  }
  return out;
}

namespace {

void put_u64(std::ofstream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error("sieve cache: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void SieveTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("sieve cache: cannot open " + path);
  os.write(kMagic, 9);
  put_u64(os, limit_);
  for (std::uint64_t q = 0; q <= limit_; ++q) put_u64(os, phi_[q]);
  for (std::uint64_t q = 0; q <= limit_; ++q) put_u64(os, d_[q]);
  for (std::uint64_t q = 0; q <= limit_; ++q) put_u64(os, omega_[q]);
  for (std::uint64_t q = 0; q <= limit_; ++q) put_u64(os, spf_[q]);
  if (!os) throw Error("sieve cache: write failed for " + path);
}

SieveTable SieveTable::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("sieve cache: cannot open " + path);
  char magic[9];
  if (!is.read(magic, 9) || std::string(magic, 9) != std::string(kMagic, 9))
    throw Error("sieve cache: bad magic in " + path);
  SieveTable t{Empty{}};
  t.limit_ = get_u64(is);
  if (t.limit_ == 0 || t.limit_ > 0xFFFFFFFFull) throw Error("sieve cache: bad limit");
  const size_t n = t.limit_ + 1;
  t.phi_.resize(n);
  t.d_.resize(n);
  t.omega_.resize(n);
  t.spf_.resize(n);
  for (size_t q = 0; q < n; ++q) t.phi_[q] = static_cast<std::uint32_t>(get_u64(is));
  for (size_t q = 0; q < n; ++q) t.d_[q] = static_cast<std::uint32_t>(get_u64(is));
  for (size_t q = 0; q < n; ++q) t.omega_[q] = static_cast<std::uint8_t>(get_u64(is));
  for (size_t q = 0; q < n; ++q) t.spf_[q] = static_cast<std::uint32_t>(get_u64(is));
  return t;
}

bool SieveTable::operator==(const SieveTable& o) const {
  return limit_ == o.limit_ && phi_ == o.phi_ && d_ == o.d_ && omega_ == o.omega_ &&
         spf_ == o.spf_;
}

const SieveTable& shared_sieve(std::uint64_t at_least) {
  static std::mutex mu;
  static std::vector<std::unique_ptr<SieveTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  if (tables.empty() || tables.back()->limit() < at_least) {
    const std::uint64_t lim = std::max<std::uint64_t>(at_least, SieveTable::kDefaultLimit);
    tables.push_back(std::make_unique<SieveTable>(lim));
  }
  return *tables.back();
}

FTailCount f_tail_count(const std::vector<long double>& F_table, std::uint64_t Q,
                        long double threshold) {
  if (Q >= F_table.size()) throw RangeExceeded("f_tail_count: F table too short");
  const SieveTable& s = shared_sieve(Q);
  FTailCount out;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    const long double err = F_error_bound(s.d(q));
    if (F_table[q] - err > threshold)
      ++out.count;
    else if (F_table[q] + err > threshold)
      ++out.indeterminate;
  }
  return out;
}

FTailCount f_tail_count(std::uint64_t Q, long double threshold) {
  const SieveTable& s = shared_sieve(Q);
  return f_tail_count(s.F_values(Q), Q, threshold);
}

}  // namespace mdl::arith
