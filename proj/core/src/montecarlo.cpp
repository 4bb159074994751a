#include "mdl/montecarlo.hpp"

#include <cmath>

#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl::montecarlo {

std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

BoxUnionEstimate estimate_box_union(const std::vector<u128>& psi_grid, std::uint64_t Q,
                                    const std::vector<u128>& G, std::uint64_t N,
                                    std::uint64_t seed, unsigned threads) {
  if (G.empty()) throw InvalidArgument("need at least one gamma");
  if (psi_grid.size() <= Q) throw InvalidArgument("psi table shorter than Q");
  if (N == 0) throw InvalidArgument("need at least one sample");
  const unsigned k = static_cast<unsigned>(G.size());
  std::vector<std::uint64_t> support;
  for (std::uint64_t q = 1; q <= Q; ++q)
    if (psi_grid[q] != 0) support.push_back(q);
  const std::uint64_t hits = parallel_reduce<std::uint64_t>(
      0, N, 1 << 14, threads, 0,
      [&](std::uint64_t b, std::uint64_t e) {
        std::uint64_t h = 0;
        std::vector<std::uint64_t> x(k);
        for (std::uint64_t i = b; i < e; ++i) {
          for (unsigned d = 0; d < k; ++d) x[d] = sample_coordinate(seed, i, k, d);
          for (std::uint64_t q : support) {
            bool in = true;
            for (unsigned d = 0; d < k && in; ++d) in = in_Aq_grid(x[d], q, psi_grid[q], G[d]);
            if (in) {
              ++h;
              break;
            }
          }
        }
        return h;
      },
      [](std::uint64_t a, std::uint64_t b) { return a + b; });
  BoxUnionEstimate est;
  est.N = N;
  est.hits = hits;
  est.p_hat = static_cast<long double>(hits) / static_cast<long double>(N);
  est.half_width =
      kWaldZ * std::sqrt(est.p_hat * (1 - est.p_hat) / static_cast<long double>(N));
  return est;
}

}  // namespace mdl::montecarlo
