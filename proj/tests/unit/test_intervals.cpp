#include <gtest/gtest.h>

#include <algorithm>

#include "mdl/arith.hpp"
#include "mdl/intervals.hpp"
#include "test_support.hpp"

using namespace mdl;
using namespace mdl::intervals;
using approxfun::Family;

namespace {

mpq_class r(long n, long d) {
  mpq_class v(n, d);
  v.canonicalize();
  return v;
}

IntervalUnion random_union(test::Gen& gen, int parts) {
  std::vector<Component> cs;
  for (int i = 0; i < parts; ++i) {
    mpq_class a = gen.unit_rational(60), b = gen.unit_rational(60);
    if (a > b) std::swap(a, b);
    cs.push_back({a, b});
  }
  return IntervalUnion::from_components(cs);
}

}  // namespace

TEST(BuildAq, Examples) {
  const auto a1 = build_Aq_exact(1, r(1, 10), r(1, 4));
  ASSERT_EQ(a1.size(), 1u);
  EXPECT_EQ(a1.components()[0], (Component{r(3, 20), r(7, 20)}));
  EXPECT_EQ(a1.measure(), r(1, 5));
  const auto a2 = build_Aq_exact(2, r(1, 10), r(1, 4));
  ASSERT_EQ(a2.size(), 2u);
  EXPECT_EQ(a2.components()[0], (Component{r(3, 40), r(7, 40)}));
  EXPECT_EQ(a2.components()[1], (Component{r(23, 40), r(27, 40)}));
  EXPECT_EQ(a2.measure(), r(1, 5));
  const auto w = build_Aq_exact(1, r(1, 10), r(1, 20));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w.components()[0], (Component{0, r(3, 20)}));
  EXPECT_EQ(w.components()[1], (Component{r(19, 20), 1}));
  EXPECT_EQ(w.measure(), r(1, 5));
  EXPECT_TRUE(build_Aq_exact(7, 0, r(1, 3)).empty());
  EXPECT_THROW(build_Aq_exact(3, r(1, 2), 0), std::invalid_argument);
}

TEST(Ops, Examples) {
  EXPECT_EQ(IntervalUnion().measure(), 0);
  const auto a1 = build_Aq_exact(1, r(1, 10), r(1, 4));
  const auto a2 = build_Aq_exact(2, r(1, 10), r(1, 4));
  const auto i = intersect(a1, a2);
  ASSERT_EQ(i.size(), 1u);
  EXPECT_EQ(i.components()[0], (Component{r(3, 20), r(7, 40)}));
  EXPECT_EQ(i.measure(), r(1, 40));
  EXPECT_EQ(unite(a1, a2).measure(), r(2, 5) - r(1, 40));
  // Touching open intervals stay apart.
  const auto t = IntervalUnion::from_components({{0, r(1, 2)}, {r(1, 2), 1}});
  EXPECT_EQ(t.size(), 2u);
  EXPECT_TRUE(intersect(IntervalUnion::from_components({{0, r(1, 2)}}),
                        IntervalUnion::from_components({{r(1, 2), 1}}))
                  .empty());
}

TEST(Ops, AlgebraProperties) {
  test::Gen gen(61);
  for (int it = 0; it < 400; ++it) {
    const auto u = random_union(gen, static_cast<int>(gen.range(0, 6)));
    const auto v = random_union(gen, static_cast<int>(gen.range(0, 6)));
    const auto w = random_union(gen, static_cast<int>(gen.range(0, 6)));
    ASSERT_TRUE(u.valid());
    ASSERT_EQ(intersect(u, v), intersect(v, u));
    ASSERT_EQ(unite(u, v), unite(v, u));
    ASSERT_EQ(intersect(intersect(u, v), w), intersect(u, intersect(v, w)));
    ASSERT_EQ(unite(unite(u, v), w), unite(u, unite(v, w)));
    ASSERT_EQ(measure(intersect(u, v)) + measure(unite(u, v)), measure(u) + measure(v));
    ASSERT_LE(measure(unite(u, v)), measure(u) + measure(v));
    ASSERT_TRUE(intersect(u, v).valid());
    ASSERT_TRUE(unite(u, v).valid());
    ASSERT_EQ(IntervalUnion::parse_dump(u.dump()), u);
  }
}

TEST(BuildAq, MeasureAndShapeProperty) {
  const std::vector<ApproxFunction> fs{ApproxFunction::make(Family::CoverQLogLog2, 1),
                                       ApproxFunction::make(Family::CoverQ, r(1, 2))};
  for (const char* g : {"sqrt2", "golden", "e"}) {
    const auto gamma = CertifiedReal::preset(g);
    for (const auto& f : fs) {
      for (std::uint64_t k = 16; k <= 600; ++k) {
        const auto s = build_Aq(k, f, gamma);
        const mpq_class m = s.set.measure();
        const mpq_class two_psi = 2 * s.psi;
        ASSERT_LE(abs(mpq_class(m - two_psi)), two_psi / k) << g << " " << k;
        ASSERT_TRUE(s.set.size() == k || s.set.size() == k + 1) << k;
        for (const auto& c : s.set.components()) ASSERT_LE(c.b - c.a, two_psi / k);
      }
    }
  }
}

TEST(BuildAq, EndpointPerturbation) {
  const auto f = ApproxFunction::make(Family::CoverQ, r(1, 2));
  for (const char* g : {"sqrt2", "golden", "e", "pi"}) {
    const auto gamma = CertifiedReal::preset(g);
    const mpq_class fine = gamma.ball_within(mpq_class(mpz_class(1), mpz_class("1" + std::string(80, '0')))).mid;
    mpz_class whole;
    mpz_fdiv_q(whole.get_mpz_t(), fine.get_num_mpz_t(), fine.get_den_mpz_t());
    const mpq_class frac = fine - whole;
    for (std::uint64_t k : {3u, 17u, 100u, 999u, 4096u}) {
      const auto coarse = build_Aq(k, f, gamma);
      const auto refined = build_Aq_exact(k, coarse.psi, frac);
      const auto& a = coarse.set.components();
      const auto& b = refined.components();
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_LE(abs(mpq_class(a[i].a - b[i].a)), coarse.perturbation) << g << " " << k;
        ASSERT_LE(abs(mpq_class(a[i].b - b[i].b)), coarse.perturbation) << g << " " << k;
      }
    }
  }
}

TEST(Pair, Examples) {
  const auto psi = ApproxFunction::table({{1, r(1, 10)}, {2, r(1, 10)}});
  const auto gamma = CertifiedReal::exact(r(1, 4));
  const auto c = pairwise_intersection_measure(1, 2, psi, gamma);
  EXPECT_EQ(c.measure, r(1, 40));
  EXPECT_EQ(c.g, 1u);
  EXPECT_EQ(c.delta, r(3, 10));
  EXPECT_TRUE(c.branch1);
  EXPECT_EQ(abs(mpq_class(c.measure - 4 * c.psi_q * c.psi_q2)), r(3, 200));
  const auto same = pairwise_intersection_measure(5, 5, ApproxFunction::make(Family::CoverQ, r(1, 2)),
                                                  CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(same.measure, 2 * same.psi_q);
  const auto p35 = pairwise_intersection_measure(3, 5, ApproxFunction::make(Family::CoverQ, r(1, 2)),
                                                 CertifiedReal::preset("sqrt2"));
  EXPECT_EQ(p35.measure, test::oracle_q("pair_3_5_measure"));
}

TEST(Pair, LatticeRouteMatchesDirectIntersection) {
  test::Gen gen(67);
  for (int it = 0; it < 600; ++it) {
    const std::uint64_t a = gen.range(1, 40), b = gen.range(1, 40);
    const mpq_class pa = gen.unit_rational(30) / 2, pb = gen.unit_rational(30) / 2;
    if (pa >= r(1, 2) || pb >= r(1, 2)) continue;
    const mpq_class g = gen.unit_rational(50);
    if (g == 1) continue;
    const mpq_class direct = intersect(build_Aq_exact(a, pa, g), build_Aq_exact(b, pb, g)).measure();
    ASSERT_EQ(pair_measure_exact(a, b, pa, pb, g), direct) << a << " " << b << " " << pa << " " << pb << " " << g;
  }
}

TEST(Pair, KernelMatchesGenericRoute) {
  const auto f = ApproxFunction::make(Family::CoverQLogLog2, 1);
  const auto gamma = CertifiedReal::preset("golden");
  PairKernel K(f, gamma, 200);
  ASSERT_TRUE(K.grid());
  for (std::uint64_t a = 5; a <= 200; a += 7)
    for (std::uint64_t b = 5; b <= 200; b += 11) {
      const mpq_class direct =
          intersect(build_Aq(a, f, gamma).set, build_Aq(b, f, gamma).set).measure();
      ASSERT_EQ(K.measure(a, b), direct) << a << " " << b;
      ASSERT_EQ(K.measure(a, b), K.measure(b, a));
      ASSERT_EQ(K.delta(a, b), approxfun::delta(f, a, b));
    }
}

TEST(Pair, ChiMatchesDefinition) {
  const auto f = ApproxFunction::make(Family::CoverQ, r(1, 2));
  const auto gamma = CertifiedReal::preset("sqrt2");
  PairKernel K(f, gamma, 300);
  for (std::uint64_t a = 2; a <= 300; a += 3)
    for (std::uint64_t b = a + 1; b <= 300; b += 13) {
      bool hat = false;
      const Decision d = K.chi(a, b, &hat);
      const std::uint64_t g = arith::gcd(a, b);
      const mpq_class x = K.gamma_hat() * mpq_class(b - a) / g;
      const bool want = realnum::dist_to_int(x) < K.delta(a, b) / g;
      ASSERT_EQ(hat, want) << a << " " << b;
      if (d != Decision::Indeterminate) {
        ASSERT_EQ(d == Decision::True, want);
      }
    }
}

TEST(Union, GridMatchesGenericRoute) {
  const auto f = ApproxFunction::make(Family::CoverQ, r(1, 2));
  for (const char* g : {"sqrt2", "e"}) {
    const auto gamma = CertifiedReal::preset(g);
    PairKernel K(f, gamma, 300);
    const auto P = K.P_table();
    for (auto [lo, hi] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{2, 50}, {2, 300}, {64, 128}}) {
      const mpq_class grid = union_measure_grid(P, lo, hi, K.G());
      ASSERT_EQ(grid, union_measure_generic(f, gamma, lo, hi)) << g << " " << lo << " " << hi;
      ASSERT_EQ(grid, union_measure_grid(P, lo, hi, K.G(), 3, 5));
    }
  }
}

TEST(Boxes, Examples) {
  const auto psi = ApproxFunction::table({{1, r(1, 10)}});
  const std::vector<CertifiedReal> g2{CertifiedReal::exact(r(1, 4)), CertifiedReal::exact(r(1, 4))};
  EXPECT_EQ(box_ops(2, 1, psi, g2).measure(), r(1, 25));
  const auto f = ApproxFunction::make(Family::CoverQ, r(1, 2));
  const std::vector<CertifiedReal> g1{CertifiedReal::preset("sqrt2")};
  EXPECT_EQ(box_pair_intersection_measure(3, 5, f, g1),
            pairwise_intersection_measure(3, 5, f, g1[0]).measure);
  const std::vector<CertifiedReal> g3{CertifiedReal::preset("sqrt2"), CertifiedReal::preset("golden"),
                                      CertifiedReal::preset("e")};
  EXPECT_EQ(box_pair_intersection_measure(7, 7, f, g3), box_ops(3, 7, f, g3).measure());
}
