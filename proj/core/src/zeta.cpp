#include <cmath>
#include <limits>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"

namespace mdl::arith {

namespace {

// f(x) = x^-a (alpha + beta ln x).
struct LogPower {
  long double a, alpha, beta;

  long double at(long double x) const { return std::pow(x, -a) * (alpha + beta * std::log(x)); }
  LogPower derivative() const { return {a + 1, beta - a * alpha, -a * beta}; }
};

constexpr long double kEps = std::numeric_limits<long double>::epsilon();
constexpr int kCutoff = 1000;
constexpr int kTerms = 3;
// B_2/2!, B_4/4!, B_6/6!
constexpr long double kBernoulliOverFactorial[kTerms] = {1.0L / 12, -1.0L / 720, 1.0L / 30240};
// 2 zeta(2p) / (2 pi)^(2p) for p = 3, rounded up
constexpr long double kRemainderFactor = 2.0L * 1.0173430619844491397L / 61528.0L;

// sum_{n >= 1} f(n) for f = x^-a (alpha + beta ln x), a > 1.
Estimate euler_maclaurin(const LogPower& f) {
  if (!(f.a > 1)) throw InvalidArgument("zeta: exponent must exceed 1");
  const long double N = kCutoff;
  long double head = 0, abs_head = 0;
  for (int n = 1; n < kCutoff; ++n) {
    const long double t = f.at(n);
    head += t;
    abs_head += std::fabs(t);
  }
  const long double s1 = f.a - 1;
  const long double lnN = std::log(N);
  const long double integral =
      std::pow(N, -s1) * (f.alpha / s1 + f.beta * (lnN / s1 + 1 / (s1 * s1)));

  long double correction = f.at(N) / 2;
  long double abs_corr = std::fabs(correction);
  LogPower g = f.derivative();  // f'
  for (int j = 0; j < kTerms; ++j) {
    const long double term = -kBernoulliOverFactorial[j] * g.at(N);
    correction += term;
    abs_corr += std::fabs(term);
    g = g.derivative().derivative();
  }
  // g now holds f^(2p+1); the remainder needs f^(2p-1) and the sign of f^(2p).
  LogPower d = f;
  for (int i = 0; i < 2 * kTerms - 1; ++i) d = d.derivative();
  const LogPower d2 = d.derivative();
  const long double c0 = d2.alpha + d2.beta * lnN;
  if (d2.beta != 0 && ((c0 > 0) != (d2.beta > 0)))
    throw Error("zeta: derivative changes sign beyond the cutoff");
  const long double remainder = kRemainderFactor * std::fabs(d.at(N));

  const long double value = head + integral + correction;
  // Each evaluated term carries a few ulps from pow/log; summation adds n ulps.
  const long double rounding =
      (8 + kCutoff) * kEps * (abs_head + std::fabs(integral) + abs_corr);
  return {value, remainder + rounding};
}

}  // namespace

Estimate zeta(long double s) { return euler_maclaurin({s, 1, 0}); }

Estimate neg_zeta_prime(long double s) { return euler_maclaurin({s, 0, 1}); }

ZetaConstants zeta_constants(unsigned K) {
  if (K < 2) throw InvalidArgument("zeta_constants: K must be at least 2");
  ZetaConstants z;
  z.K = K;
  z.zeta2 = zeta(2);
  if (K >= 3) z.zeta_k_minus_1 = zeta(static_cast<long double>(K - 1));

  const long double s = 1 + 1.0L / K;
  Estimate nz = neg_zeta_prime(s);
  // s is 1 + 1/K rounded; |zeta''| <= 2K^3 + 2 near s bounds the induced shift.
  const long double k3 = static_cast<long double>(K) * K * K;
  nz.err += (2 * k3 + 2) * kEps * s;
  z.neg_zeta_prime = nz;

  const long double k2 = static_cast<long double>(K) * K;
  z.c_natural = {nz.value / k2, nz.err / k2 + std::fabs(nz.value / k2) * kEps};
  const long double ln2 = 0.693147180559945309417232121458176568L;
  z.c_log2 = {z.c_natural.value / ln2, z.c_natural.err / ln2 + std::fabs(z.c_natural.value) * 4 * kEps};
  return z;
}

}  // namespace mdl::arith
