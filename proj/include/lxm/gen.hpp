#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "market.hpp"

namespace lxm {

// Draws are taken straight from mt19937_64 so output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  std::uint64_t below(std::uint64_t k) { return g_() % k; }
  long range(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool chance(const Rational& prob) {
    // Exact Bernoulli on a 2^32 grid.
    Rational r = Rational(static_cast<long>(below(1ULL << 32))) / Rational(Integer(1) << 32);
    return r < prob;
  }
  std::vector<int> permutation(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    for (int k = n - 1; k > 0; --k) std::swap(v[k], v[below(k + 1)]);
    return v;
  }

 private:
  std::mt19937_64 g_;
};

struct GenOptions {
  int n = 4;
  Rational density = Rational(1, 2);
  long max_u = 5;
  std::uint64_t seed = 1;
  bool strongly_connected = false;
};

inline Market generate_market(const GenOptions& o) {
  if (o.n < 1) throw Error(Errc::InvalidInput, "n must be >= 1");
  if (o.max_u < 1) throw Error(Errc::InvalidInput, "max-u must be >= 1");
  Rng rng(o.seed);
  const int n = o.n;
  Market mk(n);
  auto put = [&](int i, int j) {
    if (!mk.has_edge(i, j)) mk.set_utility(i, j, Rational(rng.range(1, o.max_u)));
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rng.chance(o.density)) put(i, j);
  if (o.strongly_connected) {
    auto perm = rng.permutation(n);
    for (int k = 0; k < n; ++k) put(perm[k], perm[(k + 1) % n]);
  }
  std::vector<char> agent(n, 0), good(n, 0);
  for (const auto& [i, j] : mk.edges()) agent[i] = good[j] = 1;
  for (int i = 0; i < n; ++i)
    if (!agent[i]) {
      int j = static_cast<int>(rng.below(n));
      put(i, j);
      good[j] = 1;
    }
  for (int j = 0; j < n; ++j)
    if (!good[j]) put(static_cast<int>(rng.below(n)), j);
  return mk;
}

// A market together with an equilibrium it was built around.
struct PlantedMarket {
  Market mk;
  Vec p;
  Flow f;
};

// Money circulates along random cycles of the desire graph, which fixes
// prices; utilities are then chosen so the carrying edges are exactly MBB and
// every extra edge is strictly worse.
inline PlantedMarket planted_market(int n, std::uint64_t seed, int extra_edges = 2) {
  Rng rng(seed);
  Flow f(n);
  auto perm = rng.permutation(n);
  const long w0 = rng.range(1, 4);
  for (int k = 0; k < n; ++k) f(perm[k], perm[(k + 1) % n]) += w0;
  const int extra_cycles = static_cast<int>(rng.below(3));
  for (int c = 0; c < extra_cycles; ++c) {
    int len = static_cast<int>(rng.range(1, n));
    auto q = rng.permutation(n);
    long w = rng.range(1, 4);
    for (int k = 0; k < len; ++k) f(q[k], q[(k + 1) % len]) += w;
  }
  Vec p(n);
  for (int i = 0; i < n; ++i) p[i] = f.spent(i);
  Vec alpha(n);
  for (int i = 0; i < n; ++i) alpha[i] = Rational(rng.range(1, 3)) / Rational(rng.range(1, 3));
  Market mk(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (f(i, j) != 0) mk.set_utility(i, j, alpha[i] * p[j]);
  for (int e = 0; e < extra_edges; ++e) {
    int i = static_cast<int>(rng.below(n)), j = static_cast<int>(rng.below(n));
    if (mk.has_edge(i, j)) continue;
    mk.set_utility(i, j, alpha[i] * p[j] * Rational(rng.range(1, 3)) / 4);
  }
  return {mk, p, f};
}

}  // namespace lxm
