#include <algorithm>
#include <map>
#include <vector>

#include "mdl/errors.hpp"
#include "mdl/intervals.hpp"
#include "mdl/parallel.hpp"

namespace mdl::intervals {

namespace {

// Endpoint num / (q 2^96).
struct Item {
  i128 l, r;
  std::uint32_t q;
};

inline bool less_frac(i128 a, std::uint32_t qa, i128 b, std::uint32_t qb) {
  return a * static_cast<i128>(qb) < b * static_cast<i128>(qa);
}

// Per-denominator sums of closing-right minus opening-left numerators.
struct Acc {
  std::vector<i128> by_q;
};

}  // namespace

mpq_class union_measure_grid(const std::vector<u128>& P, std::uint64_t q_lo, std::uint64_t q_hi,
                             u128 G, unsigned threads, unsigned chunk_bits) {
  if (q_lo == 0) q_lo = 1;
  if (q_hi < q_lo) return 0;
  if (q_hi > kGridQMax) throw BudgetExceeded("exact union sweep supports q <= 2^14");
  if (P.size() <= q_hi) throw InvalidArgument("psi table shorter than q range");
  if (chunk_bits > 40) throw InvalidArgument("chunk_bits too large");
  const std::uint64_t C = 1ull << chunk_bits;
  const i128 unit = static_cast<i128>(pow2_u128(96));
  const i128 g = static_cast<i128>(G);
  const std::size_t width = q_hi + 1;

  auto chunk_fn = [&](std::uint64_t cb, std::uint64_t ce) {
    Acc acc;
    acc.by_q.assign(width, 0);
    std::vector<Item> items;
    for (std::uint64_t c = cb; c < ce; ++c) {
      items.clear();
      for (std::uint64_t q = q_lo; q <= q_hi; ++q) {
        const i128 p = static_cast<i128>(P[q]);
        if (p == 0) continue;
        const i128 iq = static_cast<i128>(q);
        // Chunk [c/C, (c+1)/C] in units of 1 / (q 2^96).
        const i128 Lc = static_cast<i128>(c) * iq * (unit / static_cast<i128>(C));
        const i128 Rc = Lc + iq * (unit / static_cast<i128>(C));
        const i128 n_lo = floor_div(Lc - g - p, unit) + 1;
        const i128 n_hi = ceil_div(Rc - g + p, unit) - 1;
        for (i128 n = n_lo; n <= n_hi; ++n) {
          const i128 base = n * unit + g;
          const i128 l = std::max(base - p, Lc);
          const i128 r = std::min(base + p, Rc);
          if (l < r) items.push_back({l, r, static_cast<std::uint32_t>(q)});
        }
      }
      if (items.empty()) continue;
      std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        const i128 a = x.l * static_cast<i128>(y.q), b = y.l * static_cast<i128>(x.q);
        if (a != b) return a < b;
        return x.q < y.q;
      });
      Item cur = items[0];
      i128 cur_r = cur.r;
      std::uint32_t cur_rq = cur.q;
      for (std::size_t i = 1; i < items.size(); ++i) {
        const Item& it = items[i];
        if (less_frac(it.l, it.q, cur_r, cur_rq)) {
          if (less_frac(cur_r, cur_rq, it.r, it.q)) {
            cur_r = it.r;
            cur_rq = it.q;
          }
        } else {
          acc.by_q[cur_rq] += cur_r;
          acc.by_q[cur.q] -= cur.l;
          cur = it;
          cur_r = it.r;
          cur_rq = it.q;
        }
      }
      acc.by_q[cur_rq] += cur_r;
      acc.by_q[cur.q] -= cur.l;
    }
    return acc;
  };

  std::vector<mpz_class> total(width);
  // Chunks are fixed; the exact fold makes the result independent of threads.
  const std::uint64_t grain = std::max<std::uint64_t>(1, C / 64);
  parallel_reduce<Acc>(
      0, C, grain, threads, Acc{},
      chunk_fn,
      [&](Acc a, Acc b) {
        for (std::size_t q = 0; q < b.by_q.size(); ++q)
          if (b.by_q[q] != 0) total[q] += to_mpz(b.by_q[q]);
        return a;
      });
  mpz_class L = 1;
  for (std::uint64_t q = q_lo; q <= q_hi; ++q)
    if (total[q] != 0) mpz_lcm_ui(L.get_mpz_t(), L.get_mpz_t(), q);
  mpz_class num = 0;
  for (std::uint64_t q = q_lo; q <= q_hi; ++q)
    if (total[q] != 0) num += total[q] * (L / static_cast<unsigned long>(q));
  mpq_class r(num, L * to_mpz(pow2_u128(96)));
  r.canonicalize();
  return r;
}

}  // namespace mdl::intervals
