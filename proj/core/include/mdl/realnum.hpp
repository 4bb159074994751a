#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "mdl/estimate.hpp"
#include "mdl/int128.hpp"

namespace mdl::realnum {

// Closed ball [mid - rad, mid + rad] with exact rational data.
struct Ball {
  mpq_class mid;
  mpq_class rad;

  mpq_class lo() const { return mid - rad; }
  mpq_class hi() const { return mid + rad; }
};

struct PrecisionPolicy {
  unsigned start_digits = 64;
  unsigned max_digits = 65536;
};

// A real number carried as a rational approximation with a certified
// absolute error, refinable on demand. Copies share one synchronized cache.
class CertifiedReal {
 public:
  // Returns (approx, err) with err <= 10^-digits where the source allows it.
  using Refiner = std::function<std::pair<mpq_class, mpq_class>(unsigned digits)>;

  CertifiedReal();

  static CertifiedReal exact(const mpq_class& value, std::string label = "");
  // A fixed enclosure that cannot be refined (user-supplied decimal).
  static CertifiedReal fixed(const mpq_class& approx, const mpq_class& err, std::string label);
  static CertifiedReal from_refiner(std::string label, Refiner refiner,
                                    PrecisionPolicy policy = {});

  // sqrt2 | golden | e | pi | ln2 | liouville
  static CertifiedReal preset(const std::string& name, PrecisionPolicy policy = {});
  static bool is_preset(const std::string& name);
  static const std::vector<std::string>& preset_names();

  // Preset name, "p/q", or a decimal with optional ":err".
  static CertifiedReal parse(const std::string& text, PrecisionPolicy policy = {});

  bool is_exact() const;
  bool refinable() const;
  const std::string& label() const;
  const PrecisionPolicy& policy() const;

  // The current enclosure (at least start_digits of precision).
  Ball ball() const;
  // Refine until rad <= target. Throws IndeterminateAtPrecision if the cap
  // is reached first.
  Ball ball_within(const mpq_class& target) const;
  // Refine to the next precision level; returns false at the cap.
  bool refine_once() const;
  unsigned digits() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// A point of the circle R/Z as a wrapping 128-bit fraction t/2^128 plus an
// error bound on its distance to the true point.
struct TorusPoint {
  u128 t = 0;
  mpq_class err;
  long double err_ld = 0;  // upper bound on err
};

// frac(x) on the 2^-128 grid, rounded to nearest.
TorusPoint to_torus128(const CertifiedReal& x, int min_err_bits = 120);

// frac(x) on the 2^-96 grid: G < 2^96. on_grid is true when x is exactly G/2^96.
struct Grid96 {
  u128 G = 0;
  mpq_class err;
  long double err_ld = 0;
  bool on_grid = false;
};
Grid96 to_grid96(const CertifiedReal& x);

// The rational approximation used for set construction: x itself when it is
// an exact rational, otherwise the 2^-96 grid value. err bounds |x - x_hat|.
struct RationalHat {
  mpq_class value;  // in [0, 1)
  mpq_class err;
};
RationalHat rational_hat(const CertifiedReal& x);

// {x} in (-1/2, 1/2].
mpq_class signed_frac(const mpq_class& x);
mpq_class dist_to_int(const mpq_class& x);
Ball signed_frac(const CertifiedReal& x);
Ball dist_to_int(const CertifiedReal& x);

// ||q x - shift|| as a ball; never needs refinement since ||.|| is 1-Lipschitz.
Ball dist_ball(const Ball& x, const mpz_class& q, const mpq_class& shift = 0);

struct ContinuedFraction {
  std::vector<mpz_class> a;  // a0; a1, a2, ...
  std::vector<mpz_class> p;  // convergent numerators
  std::vector<mpz_class> q;  // convergent denominators
  bool complete = true;      // false if the precision cap cut the expansion short
  bool terminated = false;   // the value is rational and the expansion ended
};

ContinuedFraction cf_expand(const CertifiedReal& gamma, unsigned n_terms);
ContinuedFraction cf_from_quotients(const std::vector<mpz_class>& a);

enum class LiouvilleClass { Tamely, Wildly, Indeterminate };
const char* to_string(LiouvilleClass c);

struct SigmaProfile {
  std::uint64_t Q = 0;
  Estimate sigma;
  std::uint64_t witness = 0;
  long double threshold = 0;  // (log2 Q)^(1/4)
  LiouvilleClass classification = LiouvilleClass::Indeterminate;
  bool provisional = true;
};

SigmaProfile sigma_of_Q(const CertifiedReal& gamma, std::uint64_t Q);

// sigma(Q) for every Q in [2, Q_max]; entry i holds Q = i + 2.
std::vector<SigmaProfile> sigma_series(const CertifiedReal& gamma, std::uint64_t Q_max);

struct LiouvilleScan {
  std::vector<std::uint64_t> members;
  std::vector<std::uint64_t> indeterminate;
};

// Q in [Q_min, Q_max] with ||Q gamma|| < Q^-sigma_fn(Q).
LiouvilleScan liouville_set_scan(const CertifiedReal& gamma, std::uint64_t Q_max,
                                 const std::function<unsigned(std::uint64_t)>& sigma_fn,
                                 std::uint64_t Q_min = 1);

struct SlowGrowthReport {
  std::uint64_t Q = 0;
  Estimate sigma;
  std::uint64_t range_max = 0;  // floor(Q^(sigma/2)), from the upper end of sigma
  std::uint64_t max_divisor_count = 0;
  std::uint64_t argmax = 0;
  Estimate ratio;  // max d(q) * log2 Q / Q^(2/sigma)
};

// support(q) is true where psi(q) != 0. sigma defaults to sigma_of_Q(gamma, Q).
SlowGrowthReport slow_growth_check(const CertifiedReal& gamma, std::uint64_t Q,
                                   const std::function<bool(std::uint64_t)>& support,
                                   std::optional<Estimate> sigma = std::nullopt,
                                   std::uint64_t sieve_limit = 1000000);

// Outward-rounded natural log of a positive rational.
Estimate log_rational(const mpq_class& x);

}  // namespace mdl::realnum
