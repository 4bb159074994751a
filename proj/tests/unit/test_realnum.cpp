#include <gtest/gtest.h>

#include <cmath>

#include "mdl/errors.hpp"
#include "mdl/realnum.hpp"
#include "test_support.hpp"

using namespace mdl;
using namespace mdl::realnum;

namespace {

mpq_class q(long n, long d) {
  mpq_class v(n, d);
  v.canonicalize();
  return v;
}

}  // namespace

TEST(SignedFrac, Examples) {
  EXPECT_EQ(signed_frac(q(3, 4)), q(-1, 4));
  EXPECT_EQ(signed_frac(q(3, 1)), 0);
  EXPECT_EQ(signed_frac(q(1, 2)), q(1, 2));
  EXPECT_EQ(signed_frac(q(-1, 2)), q(1, 2));
  EXPECT_EQ(dist_to_int(q(23, 10)), q(3, 10));
  EXPECT_EQ(dist_to_int(q(-1, 2)), q(1, 2));
}

TEST(SignedFrac, RangeAndDistanceProperty) {
  test::Gen gen(21);
  for (int i = 0; i < 10000; ++i) {
    const mpq_class x = gen.rational(1000, 50);
    const mpq_class f = signed_frac(x);
    ASSERT_GT(f, q(-1, 2));
    ASSERT_LE(f, q(1, 2));
    const mpq_class k = x - f;
    ASSERT_EQ(k.get_den(), 1);
    ASSERT_EQ(dist_to_int(x), abs(f));
  }
}

TEST(CertifiedReal, PresetEnclosures) {
  const auto s2 = CertifiedReal::preset("sqrt2");
  const Ball b = s2.ball();
  EXPECT_LE(b.rad, mpq_class(1) / mpq_class(mpz_class("1" + std::string(60, '0'))));
  EXPECT_LT(b.lo() * b.lo(), 2);
  EXPECT_GT(b.hi() * b.hi(), 2);
  const Ball d = dist_to_int(s2);
  EXPECT_NEAR(d.mid.get_d(), 0.41421356237, 1e-10);
  for (const auto& name : CertifiedReal::preset_names()) {
    const auto x = CertifiedReal::preset(name);
    const Ball t = x.ball_within(mpq_class(1) / mpq_class(mpz_class(1) << 300));
    EXPECT_LE(t.rad, mpq_class(1) / mpq_class(mpz_class(1) << 300)) << name;
  }
}

TEST(CertifiedReal, ParseForms) {
  EXPECT_TRUE(CertifiedReal::parse("1/3").is_exact());
  EXPECT_EQ(CertifiedReal::parse("1/3").ball().mid, q(1, 3));
  const auto d = CertifiedReal::parse("1.41421356:1e-8");
  EXPECT_FALSE(d.refinable());
  EXPECT_EQ(d.ball().rad, q(1, 100000000));
  EXPECT_THROW(CertifiedReal::parse("banana"), std::invalid_argument);
}

TEST(CertifiedReal, PrecisionCapRaises) {
  const auto x = CertifiedReal::preset("sqrt2", PrecisionPolicy{16, 64});
  EXPECT_THROW(x.ball_within(mpq_class(1) / mpq_class(mpz_class(1) << 1000)), IndeterminateAtPrecision);
}

TEST(ContinuedFractions, NamedConstants) {
  const auto s2 = cf_expand(CertifiedReal::preset("sqrt2"), 12);
  ASSERT_EQ(s2.a.size(), 12u);
  EXPECT_EQ(s2.a[0], 1);
  for (std::size_t i = 1; i < s2.a.size(); ++i) EXPECT_EQ(s2.a[i], 2);
  const auto g = cf_expand(CertifiedReal::preset("golden"), 12);
  for (const auto& a : g.a) EXPECT_EQ(a, 1);
  const auto e = cf_expand(CertifiedReal::preset("e"), 12);
  const auto want = test::split(test::oracle("cf_e_12"), ',');
  ASSERT_EQ(want.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(e.a[i], mpz_class(want[i])) << i;
  const auto r = cf_expand(CertifiedReal::exact(q(7, 3)), 10);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.a, (std::vector<mpz_class>{2, 3}));
}

TEST(ContinuedFractions, ConvergentInvariants) {
  for (const auto& name : {"sqrt2", "golden", "e", "pi", "ln2"}) {
    const auto x = CertifiedReal::preset(name);
    const auto cf = cf_expand(x, 30);
    ASSERT_TRUE(cf.complete) << name;
    const Ball b = x.ball_within(mpq_class(1) / mpq_class(mpz_class(1) << 400));
    for (std::size_t i = 0; i < cf.p.size(); ++i) {
      EXPECT_EQ(gcd(cf.p[i], cf.q[i]), 1) << name << i;
      if (i >= 2) {
        EXPECT_EQ(cf.q[i], cf.a[i] * cf.q[i - 1] + cf.q[i - 2]);
        EXPECT_EQ(cf.p[i], cf.a[i] * cf.p[i - 1] + cf.p[i - 2]);
      }
      if (i + 1 < cf.p.size()) {
        const mpq_class err = abs(b.mid - mpq_class(cf.p[i], cf.q[i])) + b.rad;
        EXPECT_LT(err, mpq_class(1) / mpq_class(cf.q[i] * cf.q[i + 1])) << name << " " << i;
      }
    }
  }
}

TEST(ContinuedFractions, BestApproximation) {
  for (const auto& name : {"sqrt2", "golden", "e"}) {
    const auto x = CertifiedReal::preset(name);
    const auto cf = cf_expand(x, 25);
    const Ball b = x.ball_within(mpq_class(1) / mpq_class(mpz_class(1) << 200));
    std::vector<mpq_class> d(10001);
    for (unsigned long k = 1; k <= 10000; ++k) d[k] = dist_to_int(b.mid * k);
    for (const auto& qi : cf.q) {
      if (qi > 10000 || qi < 2) continue;
      const unsigned long n = qi.get_ui();
      for (unsigned long k = 1; k < n; ++k) ASSERT_LT(d[n], d[k]) << name << " q_i=" << n << " q=" << k;
    }
  }
}

TEST(Sigma, Examples) {
  const auto g = sigma_of_Q(CertifiedReal::preset("golden"), 100);
  EXPECT_EQ(g.witness, test::oracle_u("sigma_golden_100_witness"));
  EXPECT_LE(std::fabs(g.sigma.value - test::oracle_ld("sigma_golden_100")), g.sigma.err + 1e-15L);
  EXPECT_NEAR(static_cast<double>(g.sigma.value), 2.08, 0.01);
  EXPECT_TRUE(g.provisional);
  const auto s = sigma_of_Q(CertifiedReal::preset("sqrt2"), 2);
  EXPECT_LE(std::fabs(s.sigma.value - test::oracle_ld("sigma_sqrt2_2")), s.sigma.err + 1e-15L);
  const auto l = sigma_of_Q(CertifiedReal::preset("liouville"), 10000);
  // The convergent 10^6 lies beyond Q = 10^4, so the witness is q = 100.
  EXPECT_NEAR(static_cast<double>(l.sigma.value), 2.1844, 1e-3);
}

TEST(Sigma, NondecreasingInQ) {
  for (const auto& name : {"sqrt2", "golden", "e", "liouville"}) {
    const auto s = sigma_series(CertifiedReal::preset(name), 3000);
    for (std::size_t i = 1; i < s.size(); ++i) ASSERT_GE(s[i].sigma.value, s[i - 1].sigma.value) << name;
  }
}

TEST(LiouvilleScan, Examples) {
  const auto third = liouville_set_scan(CertifiedReal::exact(q(1, 3)), 10, [](std::uint64_t) { return 1u; }, 3);
  EXPECT_EQ(third.members, (std::vector<std::uint64_t>{3, 6, 9}));
  const auto lv = liouville_set_scan(
      CertifiedReal::preset("liouville"), 1000,
      [](std::uint64_t Q) {
        return static_cast<unsigned>(std::ceil(std::pow(std::log2(static_cast<double>(std::max<std::uint64_t>(Q, 2))), 0.125))) + 1;
      },
      2);
  // ||10 L|| ~ 1/10 and ||100 L|| ~ 10^-4 miss Q^-3; only Q = 2 passes.
  EXPECT_EQ(lv.members, (std::vector<std::uint64_t>{2}));
  const auto s2 = liouville_set_scan(CertifiedReal::preset("sqrt2"), 10000, [](std::uint64_t) { return 3u; }, 2);
  EXPECT_TRUE(s2.members.empty());
}

TEST(LiouvilleScan, RationalGivesMultiples) {
  for (long den : {2L, 5L, 7L, 12L}) {
    const auto r = liouville_set_scan(CertifiedReal::exact(q(1, den)), 200, [](std::uint64_t) { return 1u; }, den);
    std::vector<std::uint64_t> want;
    for (std::uint64_t m = den; m <= 200; m += den) want.push_back(m);
    EXPECT_EQ(r.members, want) << den;
  }
}

TEST(SlowGrowth, GuardsAndSmallCase) {
  const auto every = [](std::uint64_t) { return true; };
  EXPECT_THROW(slow_growth_check(CertifiedReal::preset("sqrt2"), 10000, every, Estimate{4, 0}), RangeExceeded);
  EXPECT_THROW(slow_growth_check(CertifiedReal::preset("sqrt2"), 10, every, Estimate{14, 0}), RangeExceeded);
  const auto r = slow_growth_check(CertifiedReal::preset("sqrt2"), 100, every, Estimate{4, 0});
  EXPECT_EQ(r.range_max, 10000u);
  EXPECT_EQ(r.max_divisor_count, 64u);  // d(7560) = d(9240) = 64 below 10^4
}

TEST(LogRational, Encloses) {
  const Estimate l = log_rational(q(3, 2));
  EXPECT_LE(l.lo(), std::log(1.5L));
  EXPECT_GE(l.hi(), std::log(1.5L) - 1e-18L);
}
