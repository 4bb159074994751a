#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/estimate.hpp"
#include "mdl/int128.hpp"
#include "mdl/realnum.hpp"

namespace mdl::approxfun {

inline constexpr unsigned kGridBits = 96;

enum class Family {
  CoverQ,            // c / q
  CoverQLogLog2,     // c / (q (log2 log2 q)^2), zero for q <= 4
  CoverQLogLogLog2,  // c / (q log2 q (log2 log2 q)^2), zero for q <= 4
  CoverQLog,         // c / (q log2 q), zero at q = 1
  Constant,          // c for q >= q0
  Table,             // explicit exact values, zero elsewhere
};

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct Filter {
  enum class Kind { Omega, FAtMost, IntegerSet, Multiples };
  Kind kind = Kind::Multiples;
  mpq_class epsilon;          // Omega
  long double threshold = 0;  // FAtMost
  std::string threshold_text;
  std::vector<std::uint64_t> set;  // IntegerSet, sorted
  std::uint64_t modulus = 1;       // Multiples

  // "omega(0.1)", "F<=4.0", "set(1,2,3)", "multiples(5)"
  static Filter parse(const std::string& text);
  std::string to_string() const;
  // Indeterminate verdicts count as rejection.
  bool accepts(std::uint64_t q) const;
  Decision decide(std::uint64_t q) const;
};

// psi : N -> [0, 1/2). Built-in families are quantized toward zero onto the
// 2^-96 grid; table values are kept exactly as given.
class ApproxFunction {
 public:
  ApproxFunction();  // identically zero

  static ApproxFunction make(Family family, const mpq_class& c,
                             std::optional<std::uint64_t> q0 = std::nullopt,
                             std::vector<Filter> filters = {});
  static ApproxFunction table(std::map<std::uint64_t, mpq_class> values,
                              std::vector<Filter> filters = {});

  ApproxFunction with_filter(const Filter& f) const;

  Family family() const;
  const mpq_class& c() const;
  std::uint64_t q0() const;
  const std::vector<Filter>& filters() const;
  const std::map<std::uint64_t, mpq_class>& table_values() const;
  std::string describe() const;
  bool is_zero() const;

  mpq_class eval(std::uint64_t q) const;
  // True when every value is an exact multiple of 2^-96.
  bool on_grid() const;
  // Numerator P of psi(q) = P / 2^96; requires on_grid().
  u128 eval_grid(std::uint64_t q) const;
  // Value table for q = 0..q_max (entry 0 unused), cached and shared.
  std::shared_ptr<const std::vector<u128>> grid_table(std::uint64_t q_max,
                                                      unsigned threads = 1) const;
  // Fast approximation with relative error below 2^-58 (filters applied).
  long double eval_ld(std::uint64_t q) const;
  bool passes_filters(std::uint64_t q) const;
  // Largest q with a possibly nonzero value (tables), otherwise UINT64_MAX.
  std::uint64_t support_max() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  u128 family_grid_value(std::uint64_t q) const;
};

// q psi(q') + q' psi(q), exact.
mpq_class delta(const ApproxFunction& psi, std::uint64_t q, std::uint64_t q2);

struct PartialSum {
  std::uint64_t Q = 0;
  mpq_class exact;  // sum_{q <= Q} psi(q)
};

struct WexWindow {
  std::uint64_t Q = 0;
  std::uint64_t upper = 0;  // floor(Q^((log2 Q)^(1/8))), capped
  bool capped = false;
  Estimate sum;
};

struct DCheckpoint {
  std::uint64_t Q = 0;
  Estimate sum;
  std::uint64_t members = 0;
  std::uint64_t indeterminate = 0;
};

struct DivergenceReport {
  std::vector<PartialSum> partial_sums;
  std::vector<WexWindow> wex;
  std::vector<DCheckpoint> condition_d;
  std::vector<std::uint64_t> indeterminate_q;
  bool window_capped = false;
};

inline constexpr std::uint64_t kWexCap = 1ull << 40;

// Exact partial sums at Q = 1, 2, 4, ... and at Q itself.
DivergenceReport dyadic_partial_sums(const ApproxFunction& psi, std::uint64_t Q);

DivergenceReport wex_scan(const ApproxFunction& psi, const std::vector<std::uint64_t>& Q_list,
                          unsigned threads = 1);

// Membership in B = {q >= 2 : ||q beta - gamma2|| >= 1 / log2 q}.
Decision condition_d_member(std::uint64_t q, const realnum::TorusPoint& beta,
                            const realnum::TorusPoint& gamma2, Estimate* distance = nullptr);

DivergenceReport condition_D_scan(const ApproxFunction& psi, const realnum::CertifiedReal& beta,
                                  const realnum::CertifiedReal& gamma2, std::uint64_t Q);

struct RestrictedSum {
  Estimate sum;
  std::uint64_t count = 0;
  mpq_class min_density;
  std::uint64_t min_density_at = 0;
  std::vector<std::pair<std::uint64_t, mpq_class>> densities;  // Q' = 2, 4, 8, ...
};

// weight(q) must carry relative error at most rel_err.
RestrictedSum restricted_sum(const std::function<long double(std::uint64_t)>& weight,
                             const std::function<bool(std::uint64_t)>& in_set, std::uint64_t Q,
                             long double rel_err = 0);
RestrictedSum restricted_sum(const ApproxFunction& psi,
                             const std::function<bool(std::uint64_t)>& in_set, std::uint64_t Q);

}  // namespace mdl::approxfun
