#include <gtest/gtest.h>

#include <lxm/gen.hpp>
#include <lxm/oracle.hpp>
#include <lxm/price_boost.hpp>

#include "fixtures.hpp"

using namespace lxm;
using fx::q;

namespace {

// Random subset of the support of a planted equilibrium flow.
EdgeSet support_subset(const PlantedMarket& pm, Rng& rng) {
  const int n = pm.mk.n();
  EdgeSet F(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (pm.f(i, j) > 0 && rng.below(2) == 0) F.insert(i, j);
  return F;
}

}  // namespace

TEST(Boost, EmptyFGivesUnitPrices) {
  auto mk = fx::figure1();
  auto br = boost(mk, EdgeSet(10));
  ASSERT_EQ(br.tag, BoostResult::Tag::Approx);
  // p = 1 from the t = n identity system, scaled by 1/n^2.
  EXPECT_EQ(br.solved.x, Vec(10, Rational(1)));
  EXPECT_EQ(br.p, Vec(10, q(1, 100)));
  auto sp = surplus(br.p, br.f);
  EXPECT_EQ(norm_inf(sp.s), q(1, 100));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) EXPECT_EQ(br.f(i, j), 0);
}

TEST(Boost, Figure1RayLivesOnClosedComponents) {
  // Agents 4 and 5 only want goods 4 and 5, so Q_F is unbounded along
  // components 4 and 5 alone and the ray leaves other prices at zero.
  auto mk = fx::figure1();
  auto F = fx::figure1_F();
  auto pf = build_pf(mk, F, decompose(mk, F));
  auto sys = assemble_qf(pf, approx(pf.M, pf.gamma, pf.lambda));
  EXPECT_EQ(solve_max(sys).tag, M2VPIOutcome::Tag::Unbounded);
  auto ray = solve_ray(homogenize(sys));
  ASSERT_TRUE(ray.has_value());
  for (int c = 0; c < 3; ++c) EXPECT_EQ((*ray)[c], 0);
  EXPECT_GT((*ray)[3], 0);
  EXPECT_EQ((*ray)[3], (*ray)[4]);
  try {
    boost(mk, F);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonpositivePrice);
  }
}

TEST(Boost, PlantedSpanningSupportIsAnEquilibrium) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto pm = planted_market(5, seed);
    EdgeSet F(5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (pm.f(i, j) > 0) F.insert(i, j);
    auto br = boost(pm.mk, F);
    ASSERT_EQ(br.tag, BoostResult::Tag::FEquilibrium) << seed;
    EXPECT_EQ(norm1(surplus(br.p, br.f).s), 0);
    auto f = final_flow(pm.mk, br.p);
    EXPECT_TRUE(check_equilibrium(pm.mk, br.p, f).empty()) << seed;
  }
}

TEST(Boost, GuaranteeAgainstExactPsi) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 3 + static_cast<int>(seed % 3);
    auto pm = planted_market(n, seed, 3);
    Rng rng(seed * 31);
    EdgeSet F = support_subset(pm, rng);
    auto psi = psi_exact(pm.mk, F);
    auto br = boost(pm.mk, F);
    if (psi.zero) {
      EXPECT_EQ(br.tag, BoostResult::Tag::FEquilibrium) << seed;
      continue;
    }
    ASSERT_EQ(br.tag, BoostResult::Tag::Approx) << seed;
    EXPECT_TRUE(is_f_allocation(pm.mk, F, br.p, br.f).empty()) << seed;
    auto sp = surplus(br.p, br.f);
    EXPECT_LE(norm_inf(sp.s), 1);
    for (const auto& v : sp.s) EXPECT_GE(v, 0);
    for (const auto& v : sp.c) EXPECT_GE(v, 0);
    Rational phi = phi_pow_n(br.p, br.f);
    EXPECT_LE(psi.value, phi) << seed;
    EXPECT_LE(phi, pow(Rational(n), 2 * n) * psi.value) << seed;
  }
}

TEST(Extend, Figure1UnitComponentPrices) {
  auto d = decompose(fx::figure1(), fx::figure1_F());
  auto p = extend(d, Vec(5, Rational(1)));
  EXPECT_EQ(p[5], 1);
  EXPECT_EQ(p[6], 2);
  EXPECT_EQ(p[7], 2);
  EXPECT_EQ(p[8], 1);
  EXPECT_EQ(p[9], 1);
}

TEST(Extend, Linear) {
  auto d = decompose(fx::figure1(), fx::figure1_F());
  Vec pb = fx::vec({1, 2, 3, 4, 5});
  auto p = extend(d, pb);
  for (auto& v : pb) v *= q(5, 3);
  auto p2 = extend(d, pb);
  for (int l = 0; l < 10; ++l) EXPECT_EQ(p2[l], p[l] * q(5, 3));
  EXPECT_EQ(extend(decompose(fx::sym2(), EdgeSet(2)), fx::vec({1, 1})), fx::vec({1, 1}));
}

TEST(ComponentFlow, EmptyF) {
  auto mk = fx::sym2();
  auto d = decompose(mk, EdgeSet(2));
  auto f = component_flow(mk, EdgeSet(2), d, fx::vec({1, 1}));
  EXPECT_EQ(f(0, 1), 0);
  EXPECT_EQ(surplus(fx::vec({1, 1}), f).s, fx::vec({1, 1}));
}

TEST(ComponentFlow, WholeGraphClears) {
  auto mk = fx::sym2();
  auto F = fx::edges(2, {{1, 2}, {2, 1}});
  auto f = component_flow(mk, F, decompose(mk, F), fx::vec({1, 1}));
  EXPECT_EQ(norm1(surplus(fx::vec({1, 1}), f).s), 0);
}

TEST(ComponentFlow, Figure1SecondComponentTree) {
  auto mk = fx::figure1();
  auto F = fx::figure1_F();
  auto d = decompose(mk, F);
  Vec p = extend(d, Vec(5, Rational(1)));
  auto f = component_flow(mk, F, d, p);
  // C2 = agents {1, 9}, goods {2, 7, 8}; excess 5 - (p1 + p9) = 3 >= 0, so
  // each good keeps surplus 1 and both agents spend fully.
  const int c = d.comp_of_good[1];
  EXPECT_EQ(d.agents[c], (std::vector<int>{0, 8}));
  // Node balances on the tree {(1,g2), (1,g7), (9,g7), (9,g8)}.
  Rational f12 = f(0, 1), f17 = f(0, 6), f97 = f(8, 6), f98 = f(8, 7);
  EXPECT_EQ(f12 + f17, p[0]);
  EXPECT_EQ(f97 + f98, p[8]);
  EXPECT_EQ(f12, p[1] - 1);
  EXPECT_EQ(f17 + f97, p[6] - 1);
  EXPECT_EQ(f98, p[7] - 1);
  EXPECT_EQ(f12, 0);
  EXPECT_EQ(f17, 1);
  EXPECT_EQ(f97, 0);
  EXPECT_EQ(f98, 1);
}
