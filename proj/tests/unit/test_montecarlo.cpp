#include <gtest/gtest.h>

#include <cmath>

#include "mdl/approxfun.hpp"
#include "mdl/intervals.hpp"
#include "mdl/montecarlo.hpp"
#include "mdl/realnum.hpp"

using namespace mdl;
using namespace mdl::montecarlo;

TEST(SplitMix, KnownAnswer) {
  // First outputs of the reference SplitMix64 stream from state 0.
  EXPECT_EQ(splitmix64(0, 0), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(splitmix64(0, 1), 0x6E789E6AA1B965F4ull);
  EXPECT_EQ(sample_coordinate(5, 3, 2, 1), splitmix64(5, 7));
}

TEST(Membership, MatchesExactSet) {
  const auto psi = approxfun::ApproxFunction::make(approxfun::Family::CoverQ, mpq_class(1, 2));
  const auto gamma = realnum::CertifiedReal::preset("sqrt2");
  const auto G = realnum::to_grid96(gamma).G;
  for (std::uint64_t q : {2u, 3u, 10u, 97u}) {
    const auto A = intervals::build_Aq(q, psi, gamma).set;
    for (std::uint64_t i = 0; i < 4000; ++i) {
      const std::uint64_t X = splitmix64(99, i);
      const mpq_class x(mpz_class(std::to_string(X)), mpz_class(1) << 64);
      bool in = false;
      for (const auto& c : A.components())
        if (c.a < x && x < c.b) in = true;
      ASSERT_EQ(in_Aq_grid(X, q, psi.eval_grid(q), G), in) << q << " " << i;
    }
  }
}

TEST(BoxUnion, DeterministicAcrossThreads) {
  const auto psi = approxfun::ApproxFunction::make(approxfun::Family::CoverQ, mpq_class(1, 2));
  const auto P = *psi.grid_table(200);
  const std::vector<u128> G{realnum::to_grid96(realnum::CertifiedReal::preset("sqrt2")).G,
                            realnum::to_grid96(realnum::CertifiedReal::preset("golden")).G};
  const auto a = estimate_box_union(P, 200, G, 100000, 7, 1);
  const auto b = estimate_box_union(P, 200, G, 100000, 7, 2);
  const auto c = estimate_box_union(P, 200, G, 100000, 7, 8);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.hits, c.hits);
  EXPECT_GT(a.hits, 0u);
  EXPECT_NEAR(static_cast<double>(a.half_width),
              1.96 * std::sqrt(static_cast<double>(a.p_hat * (1 - a.p_hat)) / 100000), 1e-12);
  EXPECT_NE(estimate_box_union(P, 200, G, 100000, 8).hits, a.hits);
  EXPECT_THROW(estimate_box_union(P, 300, G, 10, 1), std::invalid_argument);
}
