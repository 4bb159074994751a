#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace mdl {

using u128 = unsigned __int128;
using i128 = __int128;

inline constexpr u128 pow2_u128(unsigned e) { return static_cast<u128>(1) << e; }

std::string to_string(u128 v);
std::string to_string(i128 v);

mpz_class to_mpz(u128 v);
mpz_class to_mpz(i128 v);

// Requires 0 <= v < 2^128.
u128 to_u128(const mpz_class& v);
// Requires |v| < 2^127.
i128 to_i128(const mpz_class& v);

// Floor and ceiling division for the signed 128-bit type (b > 0).
inline i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

inline mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}
inline mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline i128 abs_i128(i128 v) { return v < 0 ? -v : v; }

// Signed view of a 128-bit torus coordinate: t/2^128 in [-1/2, 1/2).
inline i128 torus_signed(u128 t) { return static_cast<i128>(t); }

long double to_long_double(u128 v);
// num / den in lowest terms.
inline mpq_class make_q(const mpz_class& num, const mpz_class& den) {
  mpq_class r(num, den);
  r.canonicalize();
  return r;
}
long double to_long_double(i128 v);

}  // namespace mdl
