#include <gtest/gtest.h>

#include <lxm/flow.hpp>
#include <lxm/gen.hpp>
#include <lxm/lpbuild.hpp>
#include <lxm/oracle.hpp>

#include "fixtures.hpp"

using namespace lxm;
using fx::q;

namespace {

int count_arcs(const FlowNetwork& net, bool infinite) {
  int k = 0;
  for (const auto& a : net.arcs) k += a.infinite == infinite;
  return k;
}

// Minimum over all s-t cuts, by enumerating the side of every internal node.
Rational brute_min_cut(const FlowNetwork& net) {
  const int inner = 2 * net.n;
  std::optional<Rational> best;
  for (int mask = 0; mask < (1 << inner); ++mask) {
    auto side = [&](int v) {
      if (v == net.source()) return true;
      if (v == net.sink()) return false;
      return ((mask >> v) & 1) != 0;
    };
    Rational cut = 0;
    for (const auto& a : net.arcs)
      if (side(a.from) && !side(a.to)) cut += a.cap;
    if (!best || cut < *best) best = cut;
  }
  return *best;
}

}  // namespace

TEST(BuildNetwork, Sym2HasSixArcs) {
  auto net = build_network(fx::sym2(), EdgeSet(2), fx::vec({1, 1}));
  EXPECT_EQ(net.arcs.size(), 6u);
  EXPECT_EQ(count_arcs(net, true), 2);
}

TEST(BuildNetwork, FEdgeAddsReverseArc) {
  auto net = build_network(fx::sym2(), fx::edges(2, {{1, 2}}), fx::vec({1, 1}));
  EXPECT_EQ(net.arcs.size(), 7u);
  bool found = false;
  for (const auto& a : net.arcs)
    if (a.from == net.good(1) && a.to == net.agent(0)) found = a.infinite;
  EXPECT_TRUE(found);
}

TEST(BuildNetwork, Figure1AtExtendedPrices) {
  auto mk = fx::figure1();
  auto F = fx::figure1_F();
  auto dec = decompose(mk, F);
  // 3 pbar_3 = 2 pbar_2 puts (6, g8) exactly on agent 6's MBB tie.
  for (const Vec& pb : {fx::vec({1, 3, 2, 1, 1}), fx::vec({1, 3, 1, 1, 1})}) {
    Vec p = extend(dec, pb);
    auto net = build_network(mk, F, p);
    const bool extra = pb[2] == 2;
    EXPECT_EQ(mbb(mk, p).edges.contains(5, 7), extra);
    int forward = 0, reverse = 0;
    for (const auto& a : net.arcs) {
      if (!a.infinite) continue;
      (a.from < 10 ? forward : reverse) += 1;
    }
    EXPECT_EQ(forward, 15 + (extra ? 1 : 0));
    EXPECT_EQ(reverse, 15);
  }
  EXPECT_THROW(build_network(mk, F, extend(dec, Vec(5, Rational(1)))), Error);
}

TEST(BuildNetwork, RejectsFOutsideMbb) {
  try {
    build_network(fx::asym2(), fx::edges(2, {{1, 1}}), fx::vec({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotInMbb);
  }
}

TEST(MaxFlow, Sym2ValueTwo) {
  EXPECT_EQ(max_flow(build_network(fx::sym2(), EdgeSet(2), fx::vec({1, 1}))).value, 2);
}

TEST(MaxFlow, Asym2MatchesBruteForceCut) {
  auto net = build_network(fx::asym2(), EdgeSet(2), fx::vec({1, 2}));
  EXPECT_EQ(max_flow(net).value, brute_min_cut(net));
  EXPECT_EQ(max_flow(net).value, 2);
}

TEST(MaxFlow, ZeroSourceCapacities) {
  FlowNetwork net;
  net.n = 1;
  net.arcs = {{net.source(), 0, 0, false}, {0, 1, 5, true}, {1, net.sink(), 3, false}};
  EXPECT_EQ(max_flow(net).value, 0);
}

TEST(MaxFlow, RandomNetworksMatchBruteForceCut) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto mk = generate_market({3, q(1, 2), 4, seed, true});
    Rng rng(seed + 100);
    Vec p(3);
    for (auto& v : p) v = q(rng.range(1, 6), rng.range(1, 3));
    auto net = build_network(mk, EdgeSet(3), p);
    auto res = max_flow(net);
    EXPECT_EQ(res.value, brute_min_cut(net)) << seed;
    // Conservation at agents and goods.
    Vec bal(net.nodes(), Rational(0));
    for (std::size_t k = 0; k < net.arcs.size(); ++k) {
      EXPECT_GE(res.arc_flow[k], 0);
      EXPECT_LE(res.arc_flow[k], net.arcs[k].cap);
      bal[net.arcs[k].from] -= res.arc_flow[k];
      bal[net.arcs[k].to] += res.arc_flow[k];
    }
    for (int v = 0; v < 2 * net.n; ++v) EXPECT_EQ(bal[v], 0);
  }
}

TEST(BalancedFlow, Sym2ClearsEverything) {
  auto f = balanced_flow(fx::sym2(), EdgeSet(2), fx::vec({1, 1}));
  EXPECT_EQ(f(0, 1), 1);
  EXPECT_EQ(f(1, 0), 1);
  EXPECT_EQ(norm1(surplus(fx::vec({1, 1}), f).s), 0);
}

TEST(BalancedFlow, Asym2MinimizesSurplusNorm) {
  // Agent 1 splits its budget a / (1 - a) over g1 / g2; agent 2 takes what is
  // left of g1. Among max flows, pick the smallest c1^2 + c2^2.
  const Vec p = fx::vec({1, 2});
  std::optional<Rational> best_value, best_norm;
  for (int k = 0; k <= 60; ++k) {
    Rational a = q(k, 60);
    Rational f21 = std::min(Rational(1 - a), Rational(2));
    Rational value = 1 + f21;
    Rational c1 = 0, c2 = 2 - f21;
    Rational nrm = c1 * c1 + c2 * c2;
    if (!best_value || value > *best_value || (value == *best_value && nrm < *best_norm)) {
      best_value = value;
      best_norm = nrm;
    }
  }
  auto f = balanced_flow(fx::asym2(), EdgeSet(2), p);
  auto sp = surplus(p, f);
  EXPECT_EQ(sum(p) - norm1(sp.s), *best_value);
  EXPECT_EQ(norm2_sq(sp.c), *best_norm);
  EXPECT_TRUE(check_balanced(fx::asym2(), EdgeSet(2), p, f));
}

TEST(BalancedFlow, StarMarket) {
  auto mk = fx::star3();
  const Vec p = fx::vec({2, 1, 1});
  auto f = balanced_flow(mk, EdgeSet(3), p);
  EXPECT_EQ(surplus(p, f).c, fx::vec({0, 0, 0}));
  EXPECT_TRUE(check_balanced(mk, EdgeSet(3), p, f));
}

TEST(BalancedFlow, StarMarketSplitsScarceGood) {
  auto mk = fx::star3();
  const Vec p = fx::vec({1, 1, 1});
  auto f = balanced_flow(mk, EdgeSet(3), p);
  EXPECT_EQ(surplus(p, f).c, fx::vec({0, q(1, 2), q(1, 2)}));
  EXPECT_TRUE(check_balanced(mk, EdgeSet(3), p, f));
  // Same value, uneven split.
  auto g = fx::flow(3, {{1, 2, q(1, 2)}, {1, 3, q(1, 2)}, {2, 1, 1}});
  EXPECT_FALSE(check_balanced(mk, EdgeSet(3), p, g));
}

TEST(BalancedFlow, RandomAllocationsAreBalanced) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    auto mk = generate_market({n, q(1, 2), 5, seed, true});
    Rng rng(seed * 7);
    Vec p(n);
    for (auto& v : p) v = q(rng.range(1, 9), rng.range(1, 4));
    auto mb = mbb(mk, p).edges;
    EdgeSet F(n);
    for (const auto& e : mb.list())
      if (rng.below(3) == 0) F.insert(e.first, e.second);
    auto f = balanced_flow(mk, F, p);
    EXPECT_TRUE(is_f_allocation(mk, F, p, f).empty()) << seed;
    EXPECT_TRUE(check_balanced(mk, F, p, f)) << seed;
    auto value = max_flow(build_network(mk, F, p)).value;
    EXPECT_EQ(norm1(surplus(p, f).s), sum(p) - value) << seed;
  }
}

TEST(FinalFlow, Examples) {
  auto f = final_flow(fx::sym2(), fx::vec({1, 1}));
  EXPECT_EQ(f(0, 1), 1);
  EXPECT_EQ(f(1, 0), 1);
  f = final_flow(fx::asym2(), fx::vec({1, 1}));
  EXPECT_EQ(f(0, 1), 1);
  EXPECT_EQ(f(0, 0), 0);
  EXPECT_EQ(f(1, 0), 1);
  try {
    final_flow(fx::asym2(), fx::vec({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotSaturated);
  }
}

TEST(FinalFlow, PlantedEquilibria) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto pm = planted_market(5, seed);
    auto f = final_flow(pm.mk, pm.p);
    EXPECT_TRUE(check_equilibrium(pm.mk, pm.p, f).empty()) << seed;
  }
}
