#include <gtest/gtest.h>

#include <lxm/gen.hpp>
#include <lxm/market.hpp>

#include "fixtures.hpp"

using namespace lxm;
using fx::q;

TEST(Rational, ParsesIntegersAndFractions) {
  EXPECT_EQ(parse_rational("-6/8"), q(-3, 4));
  EXPECT_EQ(parse_rational("+7"), q(7));
  EXPECT_EQ(to_string(parse_rational("10/5")), "2");
  EXPECT_EQ(to_string(q(-3, 4)), "-3/4");
}

TEST(Rational, RejectsDecimalsAndZeroDenominators) {
  for (const char* bad : {"0.5", "1e3", "", "1/0", "/2", "3/", "1/-2", "abc"})
    EXPECT_THROW(parse_rational(bad), std::invalid_argument) << bad;
}

TEST(Validate, MinimalMarketIsValid) { EXPECT_TRUE(validate(fx::sym2()).empty()); }

TEST(Validate, AgentWithoutEdge) {
  auto mk = fx::market(2, {{1, 2, 1}, {1, 1, 1}});
  auto v = validate(mk);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].str(), "AgentWithoutEdge(2)");
}

TEST(Validate, Figure1FixtureIsValid) {
  auto mk = fx::figure1();
  EXPECT_EQ(mk.m(), 16);
  EXPECT_TRUE(validate(mk).empty());
}

TEST(Existence, ThreeAgentCounterexample) {
  auto r = existence_check(fx::nonexist3());
  EXPECT_FALSE(r.exists);
  EXPECT_EQ(r.witness, std::vector<int>{1});
}

TEST(Existence, Sym2StronglyConnected) {
  auto r = existence_check(fx::sym2());
  EXPECT_TRUE(r.exists);
  EXPECT_TRUE(r.strongly_connected);
}

TEST(Existence, SingleAgentSelfLoop) {
  auto r = existence_check(fx::market(1, {{1, 1, 1}}));
  EXPECT_TRUE(r.exists);
  EXPECT_TRUE(r.strongly_connected);
}

TEST(Mbb, Sym2UnitPrices) {
  auto r = mbb(fx::sym2(), fx::vec({1, 1}));
  EXPECT_EQ(r.alpha, fx::vec({1, 1}));
  EXPECT_EQ(r.edges, fx::edges(2, {{1, 2}, {2, 1}}));
}

TEST(Mbb, Asym2) {
  auto r = mbb(fx::asym2(), fx::vec({1, 2}));
  EXPECT_EQ(r.alpha, fx::vec({1, 1}));
  EXPECT_EQ(r.edges, fx::edges(2, {{1, 1}, {1, 2}, {2, 1}}));
}

TEST(Mbb, Figure1DoublePriceGoods) {
  auto mk = fx::figure1();
  Vec p(10, Rational(1));
  p[6] = p[7] = 2;
  auto r = mbb(mk, p);
  EXPECT_TRUE(r.edges.contains(0, 1));
  EXPECT_TRUE(r.edges.contains(0, 6));
}

TEST(Mbb, RejectsNonpositivePrices) {
  try {
    mbb(fx::sym2(), fx::vec({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonpositivePrice);
  }
}

TEST(Mbb, ScaleInvariant) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto mk = generate_market({5, q(1, 2), 6, seed, true});
    Rng rng(seed);
    Vec p(5);
    for (auto& v : p) v = q(rng.range(1, 9), rng.range(1, 4));
    Vec p2 = p;
    for (auto& v : p2) v *= q(7, 3);
    EXPECT_EQ(mbb(mk, p).edges, mbb(mk, p2).edges);
  }
}

TEST(Surplus, Examples) {
  auto s = surplus(fx::vec({1, 1}), fx::flow(2, {{1, 2, 1}, {2, 1, 1}}));
  EXPECT_EQ(s.c, fx::vec({0, 0}));
  EXPECT_EQ(s.s, fx::vec({0, 0}));
  s = surplus(fx::vec({1, 1}), Flow(2));
  EXPECT_EQ(s.c, fx::vec({1, 1}));
  EXPECT_EQ(s.s, fx::vec({1, 1}));
  s = surplus(fx::vec({1, 2}), fx::flow(2, {{2, 1, 1}}));
  EXPECT_EQ(s.c, fx::vec({1, 1}));
  EXPECT_EQ(s.s, fx::vec({0, 2}));
}

TEST(FAllocation, Examples) {
  auto mk = fx::sym2();
  EXPECT_TRUE(is_f_allocation(mk, EdgeSet(2), fx::vec({1, 1}), fx::flow(2, {{1, 2, 1}, {2, 1, 1}})).empty());
  auto v = is_f_allocation(mk, EdgeSet(2), fx::vec({1, 1}), fx::flow(2, {{1, 2, -1}}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].str(), "NegativeFlowOutsideF(1,g2)");
  EXPECT_TRUE(
      is_f_allocation(mk, fx::edges(2, {{1, 2}}), fx::vec({1, 1}), fx::flow(2, {{1, 2, -1}, {2, 1, 1}})).empty());
}

TEST(FAllocation, NormIdentityOnRandomAllocations) {
  // Any flow on F with nonnegative surpluses: ||c||_1 = ||s||_1 and
  // ||s||_inf <= ||s||_1 <= n ||s||_inf.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto pm = planted_market(5, seed);
    Flow f = pm.f;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) f(i, j) *= q(1, 2);
    ASSERT_TRUE(is_f_allocation(pm.mk, EdgeSet(5), pm.p, f).empty());
    auto s = surplus(pm.p, f);
    EXPECT_EQ(norm1(s.c), norm1(s.s));
    EXPECT_LE(norm_inf(s.s), norm1(s.s));
    EXPECT_LE(norm1(s.s), 5 * norm_inf(s.s));
  }
}

TEST(Potential, Examples) {
  EXPECT_EQ(phi_pow_n(fx::vec({1, 1}), fx::flow(2, {{1, 2, 1}, {2, 1, 1}})), 0);
  EXPECT_EQ(phi_pow_n(fx::vec({1, 1}), Flow(2)), 1);
  EXPECT_EQ(phi_pow_n(fx::vec({2, 2}), Flow(2)), 1);
}

TEST(Potential, ScaleInvariant) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const int n = 4;
    Vec p(n);
    Flow f(n);
    for (int j = 0; j < n; ++j) p[j] = q(rng.range(1, 9), rng.range(1, 5));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = q(rng.range(0, 3), rng.range(5, 9));
    Rational a = q(rng.range(1, 20), rng.range(1, 20));
    Vec pa = p;
    Flow fa = f;
    for (auto& v : pa) v *= a;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) fa(i, j) *= a;
    EXPECT_EQ(phi_pow_n(p, f), phi_pow_n(pa, fa));
  }
}

TEST(Components, CountsAgentsAndGoods) {
  EXPECT_EQ(f_component_count(EdgeSet(3)), 6);
  EXPECT_EQ(f_component_count(fx::edges(3, {{1, 2}, {3, 2}})), 4);
}
