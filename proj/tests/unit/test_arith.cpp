#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mdl/arith.hpp"
#include "mdl/errors.hpp"
#include "test_support.hpp"

using namespace mdl;
using namespace mdl::arith;

TEST(Factor, SmallCases) {
  EXPECT_TRUE(factor(1).factors.empty());
  const auto f12 = factor(12);
  ASSERT_EQ(f12.factors.size(), 2u);
  EXPECT_EQ(f12.factors[0], (std::pair<std::uint64_t, unsigned>{2, 2}));
  EXPECT_EQ(f12.factors[1], (std::pair<std::uint64_t, unsigned>{3, 1}));
  const auto f97 = factor(97);
  ASSERT_EQ(f97.factors.size(), 1u);
  EXPECT_EQ(f97.factors[0].first, 97u);
  EXPECT_THROW(factor(0), std::invalid_argument);
}

TEST(Factor, ProductAndOrderingProperty) {
  test::Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t q = gen.range(1, std::uint64_t{1} << 40);
    const auto f = factor(q);
    EXPECT_TRUE(f.valid()) << q;
    std::uint64_t prod = 1;
    for (const auto& [p, a] : f.factors)
      for (unsigned j = 0; j < a; ++j) prod *= p;
    EXPECT_EQ(prod, q);
  }
}

TEST(Multiplicative, Examples) {
  EXPECT_EQ(euler_phi(12), 4u);
  EXPECT_EQ(divisor_count(12), 6u);
  EXPECT_EQ(big_omega(12), 3u);
  EXPECT_EQ(euler_phi(1), 1u);
  EXPECT_EQ(divisor_count(1), 1u);
  EXPECT_EQ(big_omega(1), 0u);
  EXPECT_EQ(gcd(12, 18), 6u);
  EXPECT_EQ(divisors(12), (std::vector<std::uint64_t>{1, 2, 3, 4, 6, 12}));
}

TEST(Multiplicative, TotientSumsToIdentity) {
  const auto& s = shared_sieve(100000);
  for (std::uint64_t q = 1; q <= 100000; ++q) {
    std::uint64_t sum = 0;
    for (auto d : divisors(s.factor(q))) sum += s.phi(d);
    ASSERT_EQ(sum, q) << q;
  }
}

TEST(Multiplicative, DivisorCountAtMostTwoToOmega) {
  const auto& s = shared_sieve(1000000);
  for (std::uint64_t q = 1; q <= 1000000; ++q)
    ASSERT_LE(s.d(q), std::uint64_t{1} << s.omega(q)) << q;
}

TEST(Sieve, AgreesWithFactorization) {
  const SieveTable t(50000);
  EXPECT_EQ(t.phi(1), 1u);
  EXPECT_EQ(t.d(1), 1u);
  EXPECT_EQ(t.omega(1), 0u);
  test::Gen gen(5);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t q = gen.range(1, 50000);
    const auto f = factor(q);
    EXPECT_EQ(t.phi(q), euler_phi(f));
    EXPECT_EQ(t.d(q), divisor_count(f));
    EXPECT_EQ(t.omega(q), big_omega(f));
  }
}

TEST(Sieve, SaveLoadRoundTrip) {
  const SieveTable t(3000);
  const auto path = (std::filesystem::temp_directory_path() / "mdl_sieve_roundtrip.bin").string();
  t.save(path);
  const SieveTable u = SieveTable::load(path);
  EXPECT_TRUE(t == u);
  std::remove(path.c_str());
}

TEST(DivisorSumF, Examples) {
  EXPECT_EQ(F(1).value, 0.0L);
  EXPECT_NEAR(static_cast<double>(F(2).value), 0.5, 1e-18);
  const long double f6 = test::oracle_ld("F_6");
  EXPECT_LE(std::fabs(F(6).value - f6), F(6).err);
  EXPECT_NEAR(static_cast<double>(F(6).value), 1.45915, 1e-5);
  // divisors {1,2,4,8}: 1/2 + 2/4 + 3/8
  EXPECT_NEAR(static_cast<double>(F(8).value), 1.375, 1e-18);
  EXPECT_LE(F(6).err, 4 * std::ldexp(1.0L, -50));
}

TEST(DivisorSumF, MonotoneOverDivisors) {
  const auto& s = shared_sieve(20000);
  const auto Fv = s.F_values(20000);
  for (std::uint64_t q = 1; q <= 20000; ++q)
    for (auto r : divisors(s.factor(q))) ASSERT_LE(Fv[r], Fv[q] + F(q).err) << r << " | " << q;
}

TEST(DivisorSumF, SieveTableMatchesDirect) {
  const auto& s = shared_sieve(5000);
  const auto Fv = s.F_values(5000);
  for (std::uint64_t q = 1; q <= 5000; ++q) ASSERT_EQ(Fv[q], F(q).value) << q;
}

TEST(OmegaFilter, Examples) {
  const mpq_class eps(1, 10);
  EXPECT_FALSE(omega_support_filter(std::uint64_t{1} << 20, eps));
  EXPECT_FALSE(omega_support_filter(16, eps));
  for (std::uint64_t p : {5u, 7u, 101u, 7919u}) EXPECT_TRUE(omega_support_filter(p, mpq_class(1, 1000)));
  EXPECT_THROW(omega_support_filter(2, eps), std::invalid_argument);
  EXPECT_THROW(omega_support_filter(10, mpq_class(0)), std::invalid_argument);
}

TEST(OmegaFilter, ExactPowerOfTwoTie) {
  // epsilon = 1/2: Omega(2^k) = k = (log2 2^k)^1, equality holds.
  EXPECT_EQ(omega_support_decide(std::uint64_t{1} << 24, mpq_class(1, 2)), Decision::True);
  // epsilon = 1/10 at 2^32: 32^(3/5) = 8 exactly, against Omega = 32.
  EXPECT_EQ(omega_support_decide(std::uint64_t{1} << 32, mpq_class(1, 10)), Decision::False);
}

TEST(FTail, Examples) {
  EXPECT_EQ(f_tail_count(100, 0).count, 99u);
  EXPECT_EQ(f_tail_count(10, 10).count, 0u);
  const auto c = f_tail_count(10000, 4);
  EXPECT_EQ(c.indeterminate, 0u);
  EXPECT_EQ(c.count, test::oracle_u("f_tail_1e4_threshold_4"));
}

TEST(DlIndex, Examples) {
  EXPECT_EQ(dl_index(1), 0u);
  EXPECT_EQ(dl_index(2), 1u);
  EXPECT_EQ(dl_index(15), 0u);
  EXPECT_EQ(dl_index(6), 1u);   // 6/2 = 3
  EXPECT_EQ(dl_index(30), 1u);  // 30/8 = 3.75
  EXPECT_EQ(floor_log2(1), 0u);
  EXPECT_EQ(floor_log2(8), 3u);
}

TEST(DlIndex, PartitionsIntoHalfOpenClasses) {
  const auto& s = shared_sieve(100000);
  for (std::uint64_t q = 1; q <= 100000; ++q) {
    const unsigned l = dl_index_from_phi(q, s.phi(q));
    // 2^l phi <= q < 2^(l+1) phi
    ASSERT_LE((static_cast<unsigned __int128>(s.phi(q)) << l), q);
    ASSERT_GT((static_cast<unsigned __int128>(s.phi(q)) << (l + 1)), q);
  }
}

TEST(Zeta, Constants) {
  const auto z = zeta_constants(3);
  EXPECT_NEAR(static_cast<double>(z.zeta2.value), M_PI * M_PI / 6, 1e-12);
  EXPECT_LE(z.zeta2.err, 1e-10L);
  ASSERT_TRUE(z.zeta_k_minus_1.has_value());
  EXPECT_NEAR(static_cast<double>(z.zeta_k_minus_1->value), 1.6449340668, 1e-9);  // zeta(2)
  EXPECT_FALSE(zeta_constants(2).zeta_k_minus_1.has_value());
  const long double z3 = test::oracle_ld("zeta_3");
  const Estimate e3 = zeta(3);
  EXPECT_LE(std::fabs(e3.value - z3), e3.err + 1e-18L);
  EXPECT_LE(e3.err, 1e-10L);
  const Estimate dz = neg_zeta_prime(1.5L);
  EXPECT_LE(std::fabs(dz.value - test::oracle_ld("neg_zeta_prime_1.5")), dz.err + 1e-18L);
  EXPECT_NEAR(static_cast<double>(dz.value), 3.932, 1e-3);
  for (unsigned K : {2u, 3u, 4u}) {
    const auto c = zeta_constants(K).c_log2;
    EXPECT_LE(std::fabs(c.value - test::oracle_ld("C_log2_" + std::to_string(K))), c.err + 1e-17L) << K;
  }
  EXPECT_THROW(zeta_constants(1), std::invalid_argument);
}
