#include "mdl/int128.hpp"

#include <algorithm>
#include <stdexcept>

namespace mdl {

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(i128 v) {
  if (v >= 0) return to_string(static_cast<u128>(v));
  return "-" + to_string(static_cast<u128>(0) - static_cast<u128>(v));
}

mpz_class to_mpz(u128 v) {
  mpz_class r;
  const std::uint64_t words[2] = {static_cast<std::uint64_t>(v),
                                  static_cast<std::uint64_t>(v >> 64)};
  mpz_import(r.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  return r;
}

mpz_class to_mpz(i128 v) {
  if (v >= 0) return to_mpz(static_cast<u128>(v));
  mpz_class r = to_mpz(static_cast<u128>(0) - static_cast<u128>(v));
  return -r;
}

u128 to_u128(const mpz_class& v) {
  if (sgn(v) < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 128)
    throw std::out_of_range("value does not fit in 128 bits");
  std::uint64_t words[2] = {0, 0};
  size_t count = 0;
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, v.get_mpz_t());
  return (static_cast<u128>(words[1]) << 64) | words[0];
}

i128 to_i128(const mpz_class& v) {
  mpz_class a = abs(v);
  if (mpz_sizeinbase(a.get_mpz_t(), 2) > 126 && a >= to_mpz(pow2_u128(127)))
    throw std::out_of_range("value does not fit in signed 128 bits");
  const i128 m = static_cast<i128>(to_u128(a));
  return sgn(v) < 0 ? -m : m;
}

long double to_long_double(u128 v) {
  return static_cast<long double>(static_cast<std::uint64_t>(v >> 64)) * 18446744073709551616.0L +
         static_cast<long double>(static_cast<std::uint64_t>(v));
}

long double to_long_double(i128 v) {
  if (v >= 0) return to_long_double(static_cast<u128>(v));
  return -to_long_double(static_cast<u128>(0) - static_cast<u128>(v));
}

}  // namespace mdl
