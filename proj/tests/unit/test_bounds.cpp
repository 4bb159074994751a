#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mdl/bounds.hpp"
#include "test_support.hpp"

using namespace mdl;
using namespace mdl::bounds;
using approxfun::Family;

namespace {

mpq_class r(long n, long d) {
  mpq_class v(n, d);
  v.canonicalize();
  return v;
}

BoundsConfig tenth_config() {
  BoundsConfig c;
  c.psi = ApproxFunction::table({{1, r(1, 10)}, {2, r(1, 10)}});
  c.gamma = CertifiedReal::exact(r(1, 4));
  return c;
}

ApproxFunction ll2() { return ApproxFunction::make(Family::CoverQLogLog2, 1); }
ApproxFunction half() { return ApproxFunction::make(Family::CoverQ, r(1, 2)); }

}  // namespace

TEST(Master, Examples) {
  const auto row = master_check(1, 2, tenth_config());
  EXPECT_EQ(row.delta, r(3, 10));
  EXPECT_TRUE(row.branch1);
  EXPECT_EQ(row.chi, Decision::True);
  EXPECT_EQ(row.rhs, r(9, 10));
  EXPECT_EQ(row.measure, r(1, 40));
  EXPECT_EQ(row.pass, Decision::True);
  EXPECT_THROW(master_check(2, 2, tenth_config()), std::invalid_argument);

  BoundsConfig c;
  c.psi = half();
  c.gamma = CertifiedReal::preset("sqrt2");
  const auto r35 = master_check(3, 5, c);
  EXPECT_EQ(r35.measure, test::oracle_q("pair_3_5_measure"));
  EXPECT_TRUE(r35.branch1);  // Delta = 3 psi(5) + 5 psi(3) ~ 17/15 < 4
  EXPECT_EQ(r35.pass, Decision::True);
}

TEST(Master, RejectsSmallH) {
  BoundsConfig c = tenth_config();
  c.H = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.H = 3;
  c.kappa = r(1, 3);
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Master, BranchOneHoldsOnSmallRange) {
  for (const char* g : {"sqrt2", "golden", "e"}) {
    BoundsConfig c;
    c.psi = ll2();
    c.gamma = CertifiedReal::preset(g);
    const auto s = master_scan(300, c);
    EXPECT_EQ(s.pairs, 300u * 299u / 2);
    EXPECT_EQ(s.failures, 0u) << g;
    EXPECT_EQ(s.branch1 + s.branch2, s.pairs);
    EXPECT_LE(s.indeterminate * 1000, s.pairs);
  }
}

TEST(Master, BranchTwoImpliedConstantMatchesDefinition) {
  BoundsConfig c;
  c.psi = ApproxFunction::make(Family::Constant, r(1, 5));
  c.gamma = CertifiedReal::preset("golden");
  for (std::uint64_t a = 1; a < 40; ++a)
    for (std::uint64_t b = a + 1; b <= 40; ++b) {
      const auto row = master_check(a, b, c);
      if (row.branch1) continue;
      const mpq_class pp = 4 * c.psi.eval(a) * c.psi.eval(b);
      mpq_class want = 2 * mpq_class(c.H) * (row.measure / pp - 1);
      if (want < 0) want = 0;
      ASSERT_EQ(row.c0_implied, want);
    }
}

TEST(Harman, Examples) {
  const auto e = harman_c0_estimate(2, tenth_config().psi, CertifiedReal::exact(r(1, 4)));
  EXPECT_EQ(e.sup, r(3, 10));
  EXPECT_EQ(e.q_small, 1u);
  EXPECT_EQ(e.q, 2u);
  const auto z = harman_c0_estimate(50, ApproxFunction::table({}), CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(z.sup, 0);
  EXPECT_EQ(z.pairs, 0u);
  const auto h = harman_c0_estimate(100, half(), CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(h.sup, test::oracle_q("harman_sup_100"));
  EXPECT_EQ(std::to_string(h.q_small) + "," + std::to_string(h.q), test::oracle("harman_argmax_100"));
}

TEST(Harman, SeriesNondecreasing) {
  const auto s = harman_c0_series({10, 20, 40, 80, 120}, half(), CertifiedReal::preset("e"));
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i].sup, s[i - 1].sup);
  EXPECT_EQ(s.back().sup, harman_c0_estimate(120, half(), CertifiedReal::preset("e")).sup);
  EXPECT_THROW(harman_c0_series({10, 10}, half(), CertifiedReal::preset("e")), std::invalid_argument);
}

TEST(Counting, Examples) {
  const auto psi = ApproxFunction::table({{1, r(1, 4)}, {2, r(1, 8)}});
  const auto s2 = counting_sum(2, psi, CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(s2.value(), r(1, 16));
  EXPECT_EQ(s2.gsum, 1u);
  const auto z = counting_sum(7, psi, CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(z.value(), 0);
  const auto s100 = counting_sum(100, ll2(), CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(s100.value(), test::oracle_q("counting_sum_100"));
  EXPECT_EQ(s100.indeterminate, 0u);
  EXPECT_EQ(s100.value_lo(), s100.value_hi());
}

TEST(Counting, DecompositionMatchesDirectSum) {
  for (const char* g : {"sqrt2", "golden"}) {
    const auto gamma = CertifiedReal::preset(g);
    const intervals::PairKernel k(ll2(), gamma, 300);
    for (std::uint64_t q = 1; q <= 300; ++q) {
      const auto d = counting_decomposition(q, k);
      const auto s = counting_sum(q, k);
      ASSERT_EQ(d.total, s.value()) << g << " " << q;
      ASSERT_EQ(d.low_levels + d.high_levels, d.total);
      ASSERT_EQ(d.kappa_low + d.kappa_high, d.total);
      std::uint64_t members = 0;
      for (const auto& c : d.cells) members += c.size;
      ASSERT_EQ(members, q - 1);
    }
  }
}

TEST(Counting, DecompositionPrimeAndOracle) {
  const auto k7 = counting_decomposition(997, ll2(), CertifiedReal::preset("golden"));
  for (const auto& c : k7.cells) EXPECT_TRUE(c.r == 1 || c.r == 997);
  const auto d = counting_decomposition(360, ll2(), CertifiedReal::preset("golden"));
  std::ostringstream got;
  bool first = true;
  for (const auto& c : d.cells) {
    if (c.size == 0) continue;
    got << (first ? "" : ";") << c.r << "," << c.k << "," << c.size << "," << c.hits;
    first = false;
  }
  EXPECT_EQ(got.str(), test::oracle("decomposition_360_golden"));
}

TEST(Counting, RatioOracle) {
  const auto rep = counting_lemma_ratio(16, 1000, ll2(), CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(rep.argmax, test::oracle_u("ratio_argmax_10000"));
  EXPECT_NEAR(static_cast<double>(rep.max_ratio.value),
              static_cast<double>(test::oracle_ld("ratio_max_10000")), 1e-15);
  for (const auto& row : rep.rows)
    if (row.S == 0) {
      EXPECT_EQ(row.ratio.value, 0);
    }
  EXPECT_THROW(counting_lemma_ratio(15, 100, ll2(), CertifiedReal::preset("sqrt2")), std::invalid_argument);
}

TEST(Counting, WildWindowEmptyAtDeskScale) {
  const auto rep = counting_lemma_ratio_wild(10000, 1u << 20, ll2(), CertifiedReal::preset("liouville"));
  EXPECT_TRUE(rep.wild);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_FALSE(rep.note.empty());
}

TEST(FMoment, Examples) {
  EXPECT_TRUE(f_moment_tail_check(1000, 2).pass());
  EXPECT_TRUE(f_moment_tail_check(16, 2).pass());
  EXPECT_THROW(f_moment_tail_check(1000, 0), std::invalid_argument);
  EXPECT_THROW(f_moment_tail_check(2000000, 2), std::invalid_argument);
}

TEST(FMoment, MarkovChain) {
  for (std::uint64_t Q : {1000u, 10000u})
    for (unsigned K : {2u, 3u, 4u}) {
      const auto c = f_moment_tail_check(Q, K);
      EXPECT_TRUE(c.pass()) << Q << " " << K;
      const long double bound = c.moment.hi() / std::pow(c.threshold, static_cast<long double>(K));
      EXPECT_LE(static_cast<long double>(c.tail.count), bound);
    }
}
