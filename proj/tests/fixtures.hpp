#pragma once

#include <lxm/market.hpp>

#include <initializer_list>
#include <tuple>

namespace fx {

using lxm::EdgeSet;
using lxm::Flow;
using lxm::Market;
using lxm::Rational;
using lxm::Vec;

// 1-based (agent, good, utility) triples.
inline Market market(int n, std::initializer_list<std::tuple<int, int, Rational>> us) {
  Market mk(n);
  for (const auto& [i, j, u] : us) mk.set_utility(i - 1, j - 1, u);
  return mk;
}

inline EdgeSet edges(int n, std::initializer_list<std::pair<int, int>> es) {
  EdgeSet F(n);
  for (const auto& [i, j] : es) F.insert(i - 1, j - 1);
  return F;
}

inline Flow flow(int n, std::initializer_list<std::tuple<int, int, Rational>> fs) {
  Flow f(n);
  for (const auto& [i, j, v] : fs) f(i - 1, j - 1) = v;
  return f;
}

inline Vec vec(std::initializer_list<Rational> v) { return Vec(v); }

inline Rational q(long a, long b = 1) { return Rational(a) / Rational(b); }

inline Market sym2() { return market(2, {{1, 2, 1}, {2, 1, 1}}); }

inline Market asym2() { return market(2, {{1, 1, 1}, {1, 2, 2}, {2, 1, 1}}); }

inline Market nonexist3() { return market(3, {{1, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 3, 1}}); }

// Agents 2 and 3 only want g1; agent 1 wants g2 and g3 equally.
inline Market star3() { return market(3, {{1, 2, 1}, {1, 3, 1}, {2, 1, 1}, {3, 1, 1}}); }

// The ten-agent example with its fifteen solid edges plus (6, g8).
inline Market figure1() {
  return market(10, {{2, 1, 1}, {3, 1, 1}, {3, 6, 1}, {1, 2, 1}, {1, 7, 2}, {9, 7, 1}, {9, 8, 1}, {6, 3, 1},
                     {6, 9, 1}, {7, 9, 1}, {7, 10, 1}, {8, 4, 1}, {10, 4, 1}, {5, 4, 1}, {4, 5, 1}, {6, 8, 3}});
}

inline EdgeSet figure1_F() {
  return edges(10, {{2, 1}, {3, 1}, {3, 6}, {1, 2}, {1, 7}, {9, 7}, {9, 8}, {6, 3}, {6, 9}, {7, 9}, {7, 10},
                    {8, 4}, {10, 4}, {5, 4}, {4, 5}});
}

}  // namespace fx
