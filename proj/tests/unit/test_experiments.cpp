#include <gtest/gtest.h>

#include <numbers>

#include "mdl/errors.hpp"
#include "mdl/experiments.hpp"
#include "test_support.hpp"

using namespace mdl;
using namespace mdl::experiments;
using approxfun::Family;

namespace {

mpq_class r(long n, long d) {
  mpq_class v(n, d);
  v.canonicalize();
  return v;
}

ApproxFunction half() { return ApproxFunction::make(Family::CoverQ, r(1, 2)); }

}  // namespace

TEST(ChungErdos, Examples) {
  EXPECT_EQ(ce_lower_bound({r(1, 2)}, [](std::size_t, std::size_t) { return mpq_class(0); }), r(1, 2));
  EXPECT_EQ(ce_lower_bound({r(1, 4), r(1, 4)}, [](std::size_t, std::size_t) { return mpq_class(0); }), r(1, 2));
  EXPECT_THROW(ce_lower_bound(mpq_class(0), mpq_class(0)), ZeroMass);
}

TEST(ChungErdos, NeverExceedsUnion) {
  test::Gen gen(71);
  for (int it = 0; it < 200; ++it) {
    std::vector<intervals::IntervalUnion> sets;
    const int n = static_cast<int>(gen.range(1, 5));
    for (int i = 0; i < n; ++i) {
      mpq_class a = gen.unit_rational(40), b = gen.unit_rational(40);
      if (a > b) std::swap(a, b);
      sets.push_back(intervals::IntervalUnion::from_components({{a, b}}));
    }
    std::vector<mpq_class> ms;
    intervals::IntervalUnion all;
    for (const auto& s : sets) {
      ms.push_back(s.measure());
      all = intervals::unite(all, s);
    }
    if (all.measure() == 0) continue;
    const mpq_class ce = ce_lower_bound(ms, [&](std::size_t i, std::size_t j) {
      return intervals::intersect(sets[i], sets[j]).measure();
    });
    ASSERT_LE(ce, all.measure());
  }
}

TEST(ChungErdos, SeriesMatchesPairwiseDefinition) {
  const auto gamma = CertifiedReal::preset("sqrt2");
  const auto ce = ce_series(half(), {gamma}, {8, 32});
  ASSERT_EQ(ce.size(), 2u);
  mpq_class sm = 0, sp = 0;
  for (std::uint64_t a = 1; a <= 32; ++a) {
    sm += intervals::build_Aq(a, half(), gamma).set.measure();
    for (std::uint64_t b = 1; b <= 32; ++b)
      sp += intervals::intersect(intervals::build_Aq(a, half(), gamma).set,
                                 intervals::build_Aq(b, half(), gamma).set)
                .measure();
  }
  EXPECT_EQ(ce[1].sum_measure, sm);
  EXPECT_EQ(ce[1].sum_pairs, sp);
  EXPECT_EQ(ce[1].ce_bound, sm * sm / sp);
}

TEST(Coverage, SmallRun) {
  ExperimentConfig cfg;
  cfg.psi = half();
  cfg.Q = 2048;
  const auto rep = union_coverage_scan(cfg);
  EXPECT_TRUE(rep.all_passed());
  EXPECT_EQ(rep.header, kProxyHeader);
  ASSERT_FALSE(rep.checkpoints.empty());
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i) {
    const auto& c = rep.checkpoints[i];
    ASSERT_TRUE(c.union_measure);
    EXPECT_LE(c.ce_bound, *c.union_measure);
    if (i) {
      EXPECT_GE(*c.union_measure, *rep.checkpoints[i - 1].union_measure);
    }
  }
  cfg.Q = 20000;
  EXPECT_THROW(union_coverage_scan(cfg), BudgetExceeded);
  cfg.Q = 64;
  cfg.gammas.push_back(CertifiedReal::preset("e"));
  EXPECT_THROW(union_coverage_scan(cfg), std::invalid_argument);
}

TEST(Szusz, ConstantIsShrunk) {
  std::map<std::uint64_t, mpq_class> t;
  for (std::uint64_t k = 1; k <= 10000; ++k) t[k] = r(1, 4);
  const auto res = szusz_shrink(ApproxFunction::table(t), 10000);
  EXPECT_TRUE(res.changed);
  ASSERT_FALSE(res.triggers.empty());
  EXPECT_EQ(res.triggers.front(), 100u);
  EXPECT_FALSE(res.windows.empty());
  for (const auto& w : res.windows) EXPECT_GE(w.sum, r(1, 4)) << w.lo << " " << w.hi;
  const mpq_class grid = mpq_class(1) / mpq_class(mpz_class(1) << 96);
  for (std::uint64_t k = 50; k <= 100; ++k) {
    const mpq_class v = res.shrunk.eval(k);
    EXPECT_LE(v, mpq_class(1, 2 * k));
    EXPECT_LT(mpq_class(1, 2 * k) - v, grid);
  }
  for (std::uint64_t k = 1; k <= 10000; ++k) {
    const mpq_class v = res.shrunk.eval(k);
    ASSERT_LE(v, r(1, 4));
    ASSERT_LE(v, std::max(r(1, 4), mpq_class(1, 2 * k)));
  }
}

TEST(Szusz, AlreadySmallIsUnchanged) {
  const auto res = szusz_shrink(half(), 5000);
  EXPECT_FALSE(res.changed);
  EXPECT_TRUE(res.triggers.empty());
  EXPECT_EQ(res.shrunk.eval(777), half().eval(777));
}

TEST(Szusz, NotMonotone) {
  EXPECT_THROW(szusz_shrink(ApproxFunction::table({{1, r(1, 8)}, {2, r(1, 4)}}), 10), NotMonotone);
}

TEST(Bkl, CountsMatchOracle) {
  const auto rep = bkl_counts(CertifiedReal::preset("sqrt2"), CertifiedReal::exact(0), 13);
  std::string got;
  for (const auto& c : rep.cells) {
    if (!got.empty()) got += ";";
    got += std::to_string(c.k) + "," + std::to_string(c.l) + "," + std::to_string(c.count);
    EXPECT_EQ(c.indeterminate, 0u);
    EXPECT_EQ(c.degenerate, (2u << c.l) >= c.k);
  }
  EXPECT_EQ(got, test::oracle("bkl_counts"));
  EXPECT_EQ(rep.c_fit, test::oracle_q("bkl_c_fit"));
  EXPECT_EQ(rep.c_fit_nondegenerate, test::oracle_q("bkl_c_fit_nondegenerate"));
}

TEST(Multiplicative, Pipeline) {
  const auto psi = ApproxFunction::make(Family::CoverQLogLogLog2, 1);
  const auto rep = multiplicative_pipeline(psi, CertifiedReal::preset("sqrt2"), CertifiedReal::preset("golden"),
                                           CertifiedReal::exact(0), 2048);
  ASSERT_FALSE(rep.condition_d.condition_d.empty());
  EXPECT_GT(rep.condition_d.condition_d.back().sum.value, 0);
  EXPECT_GT(rep.B_members, 0u);
  for (std::uint64_t k = 2; k <= 2048; k += 37) EXPECT_TRUE(rep.psi_prime.eval(k) < r(1, 2));
  EXPECT_TRUE(rep.coverage.all_passed());
  const auto z = multiplicative_pipeline(ApproxFunction::table({}), CertifiedReal::preset("sqrt2"),
                                         CertifiedReal::preset("golden"), CertifiedReal::exact(0), 64);
  EXPECT_TRUE(z.coverage.checkpoints.empty());
  EXPECT_THROW(multiplicative_pipeline(psi, CertifiedReal::preset("sqrt2"), CertifiedReal::preset("golden"),
                                       CertifiedReal::exact(0), 20000),
               BudgetExceeded);
}

TEST(HighDim, Examples) {
  const auto psi = ApproxFunction::table({{1, r(1, 10)}});
  const std::vector<CertifiedReal> g{CertifiedReal::exact(r(1, 4)), CertifiedReal::exact(r(1, 4))};
  EXPECT_EQ(intervals::box_ops(2, 1, psi, g).measure(), r(1, 25));

  ExperimentConfig cfg;
  cfg.psi = half();
  cfg.k = 3;
  cfg.Q = 256;
  cfg.mc_samples = 20000;
  cfg.gammas = {CertifiedReal::preset("sqrt2"), CertifiedReal::preset("golden"), CertifiedReal::preset("e")};
  const auto rep = highdim_experiment(cfg);
  EXPECT_TRUE(rep.all_passed());
  bool seen = false;
  for (const auto& [key, val] : rep.diagnostics)
    if (key == "divergence_verdict") {
      seen = true;
      EXPECT_EQ(val, "likely convergent (heuristic)");
    }
  EXPECT_TRUE(seen);
  ASSERT_TRUE(rep.checkpoints.back().monte_carlo);
  cfg.k = 2;
  EXPECT_THROW(highdim_experiment(cfg), std::invalid_argument);
}

TEST(HighDim, BoxesMatchDirectGridIntersection) {
  // 2-d route: intersect the products as sets of rectangles.
  const auto psi = ApproxFunction::make(Family::CoverQ, r(1, 2));
  const std::vector<CertifiedReal> g{CertifiedReal::preset("sqrt2"), CertifiedReal::preset("golden")};
  for (std::uint64_t a = 2; a <= 20; a += 3)
    for (std::uint64_t b = 2; b <= 20; b += 4) {
      const auto A = intervals::box_ops(2, a, psi, g), B = intervals::box_ops(2, b, psi, g);
      mpq_class area = 0;
      for (const auto& x1 : A.factors[0].components())
        for (const auto& y1 : A.factors[1].components())
          for (const auto& x2 : B.factors[0].components())
            for (const auto& y2 : B.factors[1].components()) {
              const mpq_class w = std::min(x1.b, x2.b) - std::max(x1.a, x2.a);
              const mpq_class h = std::min(y1.b, y2.b) - std::max(y1.a, y2.a);
              if (w > 0 && h > 0) area += w * h;
            }
      ASSERT_EQ(intervals::box_pair_intersection_measure(a, b, psi, g), area) << a << " " << b;
    }
}

TEST(CfRatio, Examples) {
  EXPECT_EQ(cf_ratio(1), 1);
  EXPECT_EQ(cf_ratio(2), r(3, 4));
  const auto rep = cf_ratio_fact_check(100000);
  EXPECT_EQ(rep.min_ratio, test::oracle_q("cf_min_100000"));
  EXPECT_EQ(rep.argmin, test::oracle_u("cf_argmin_100000"));
  EXPECT_EQ(rep.max_ratio, test::oracle_q("cf_max_100000"));
  EXPECT_EQ(rep.argmax, test::oracle_u("cf_argmax_100000"));
  EXPECT_GT(rep.min_ratio.get_d(), 6 / (std::numbers::pi * std::numbers::pi) - 0.01);
}

TEST(Sieve, SmallScanMatchesDirectCount) {
  const auto psi = half();
  const auto rep = sieve_mass_scan(psi, r(1, 10), 5000);
  const auto om = approxfun::Filter::parse("omega(0.1)");
  std::uint64_t count = 0;
  mpq_class mass = 0;
  for (std::uint64_t k = 3; k <= 5000; ++k)
    if (om.decide(k) == Decision::False) {
      ++count;
      mass += psi.eval(k);
    }
  EXPECT_EQ(rep.count, count);
  EXPECT_EQ(rep.mass, mass);
  EXPECT_EQ(rep.indeterminate, 0u);
  mpq_class blocks = 0;
  for (const auto& b : rep.blocks) blocks += b.increment;
  EXPECT_LE(blocks, rep.mass);
}

TEST(Verdict, Heuristic) {
  EXPECT_EQ(divergence_verdict({1, 2}), "undetermined (heuristic: too few checkpoints)");
  EXPECT_EQ(divergence_verdict({1, 1.5, 1.75, 1.875, 1.9375}), "likely convergent (heuristic)");
  EXPECT_EQ(divergence_verdict({1, 2, 3, 4, 5}), "likely divergent (heuristic)");
}
