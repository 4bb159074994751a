#include "mdl/estimate.hpp"

#include <cmath>
#include <cstdio>

namespace mdl {

Decision certified_less(const Estimate& a, const Estimate& b) {
  if (a.hi() < b.lo()) return Decision::True;
  if (a.lo() >= b.hi()) return Decision::False;
  return Decision::Indeterminate;
}

std::string format_long_double(long double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
  return buf;
}

std::string format_estimate(const Estimate& e) {
  // Inflate before rounding to three digits so the printed bound stays an upper bound.
  return format_long_double(e.value) + ":" + format_long_double(e.err * 1.01L, 3);
}

const char* to_string(Decision d) {
  switch (d) {
    case Decision::False:
      return "false";
    case Decision::True:
      return "true";
    default:
      return "indeterminate";
  }
}

}  // namespace mdl
