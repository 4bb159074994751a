#pragma once

#include <string>

namespace mdl {

// A floating-point value with an absolute error bound: the true quantity
// lies in [value - err, value + err].
struct Estimate {
  long double value = 0;
  long double err = 0;

  long double lo() const { return value - err; }
  long double hi() const { return value + err; }
};

enum class Decision { False, True, Indeterminate };

// Certified comparison of two estimates: True iff a < b for every admissible
// pair of values, False iff a >= b for every pair.
Decision certified_less(const Estimate& a, const Estimate& b);

// "value:err" with enough digits to round-trip a long double.
std::string format_estimate(const Estimate& e);
std::string format_long_double(long double v, int digits = 21);
const char* to_string(Decision d);

}  // namespace mdl
