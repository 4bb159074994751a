#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "mdl/int128.hpp"

namespace mdl::montecarlo {

// SplitMix64 finalizer applied to seed + counter * golden increment. Stateless,
// so any coordinate of any sample can be drawn independently.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter);

// Coordinate d of sample i in dimension k, as a fraction X / 2^64.
inline std::uint64_t sample_coordinate(std::uint64_t seed, std::uint64_t i, unsigned k, unsigned d) {
  return splitmix64(seed, i * k + d);
}

struct BoxUnionEstimate {
  std::uint64_t N = 0;
  std::uint64_t hits = 0;
  long double p_hat = 0;
  long double half_width = 0;  // Wald interval at z = 1.96
};

inline constexpr long double kWaldZ = 1.96L;

// Fraction of N samples lying in some B_q = prod_i A_q(gamma_i), q in [1, Q].
// psi_grid[q] and G[i] are numerators over 2^96.
BoxUnionEstimate estimate_box_union(const std::vector<u128>& psi_grid, std::uint64_t Q,
                                    const std::vector<u128>& G, std::uint64_t N,
                                    std::uint64_t seed, unsigned threads = 1);

// Membership of X / 2^64 in A_q on the 2^-96 grid.
inline bool in_Aq_grid(std::uint64_t X, std::uint64_t q, u128 P, u128 G) {
  const u128 mask = pow2_u128(96) - 1;
  const u128 y = (static_cast<u128>(q) * (static_cast<u128>(X) << 32) - G) & mask;
  const u128 d = y < pow2_u128(95) ? y : pow2_u128(96) - y;
  return d < P;
}

}  // namespace mdl::montecarlo
