#include <benchmark/benchmark.h>

#include "mdl/approxfun.hpp"
#include "mdl/arith.hpp"
#include "mdl/intervals.hpp"
#include "mdl/rotation.hpp"

using namespace mdl;

namespace {

approxfun::ApproxFunction half() {
  return approxfun::ApproxFunction::make(approxfun::Family::CoverQ, mpq_class(1, 2));
}

void BM_Sieve(benchmark::State& st) {
  for (auto _ : st) {
    arith::SieveTable t(static_cast<std::uint64_t>(st.range(0)));
    benchmark::DoNotOptimize(t.phi(t.limit()));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Sieve)->Arg(1 << 16)->Arg(1 << 20);

void BM_PairMeasure(benchmark::State& st) {
  const auto q_max = static_cast<std::uint64_t>(st.range(0));
  const intervals::PairKernel k(half(), realnum::CertifiedReal::preset("sqrt2"), q_max);
  for (auto _ : st) {
    i128 acc = 0;
    for (std::uint64_t q = 2; q <= q_max; ++q)
      for (std::uint64_t q2 = 1; q2 < q; ++q2) acc += k.scaled_pair_grid(q2, q);
    benchmark::DoNotOptimize(acc);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(q_max * (q_max - 1) / 2));
}
BENCHMARK(BM_PairMeasure)->Arg(200)->Arg(1000);

void BM_BuildAq(benchmark::State& st) {
  const auto q = static_cast<std::uint64_t>(st.range(0));
  const auto gamma = realnum::CertifiedReal::preset("golden");
  for (auto _ : st) benchmark::DoNotOptimize(intervals::build_Aq(q, half(), gamma).set.measure());
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_BuildAq)->Arg(100)->Arg(5000);

void BM_Discrepancy(benchmark::State& st) {
  const auto N = static_cast<std::uint64_t>(st.range(0));
  const rotation::Orbit o(realnum::CertifiedReal::preset("golden"), N);
  for (auto _ : st) benchmark::DoNotOptimize(rotation::exact_discrepancy(o).value);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Discrepancy)->Arg(2000)->Arg(1 << 18);

void BM_DiscrepancySeries(benchmark::State& st) {
  const rotation::Orbit o(realnum::CertifiedReal::preset("sqrt2"), static_cast<std::uint64_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(rotation::discrepancy_series(o).size());
}
BENCHMARK(BM_DiscrepancySeries)->Arg(2000);

void BM_UnionGrid(benchmark::State& st) {
  const auto Q = static_cast<std::uint64_t>(st.range(0));
  const intervals::PairKernel k(half(), realnum::CertifiedReal::preset("sqrt2"), Q);
  for (auto _ : st) benchmark::DoNotOptimize(intervals::union_measure_grid(k.P_table(), 1, Q, k.G()));
}
BENCHMARK(BM_UnionGrid)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
