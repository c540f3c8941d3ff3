#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "market.hpp"

namespace lxm {

// Node layout: agent i -> i, good j -> n + j, source -> 2n, sink -> 2n + 1.
struct FlowArc {
  int from;
  int to;
  Rational cap;
  bool infinite = false;
};

struct FlowNetwork {
  int n = 0;
  std::vector<FlowArc> arcs;
  Rational inf_cap;  // stands in for +infinity: sum of finite capacities + 1

  int source() const { return 2 * n; }
  int sink() const { return 2 * n + 1; }
  int nodes() const { return 2 * n + 2; }
  int agent(int i) const { return i; }
  int good(int j) const { return n + j; }
};

struct MaxFlowResult {
  Rational value;
  Vec arc_flow;                    // parallel to FlowNetwork::arcs
  std::vector<char> reaches_sink;  // residual reachability of t, per node
};

namespace detail {

// Edmonds-Karp on exact capacities; arcs are scanned in insertion order so
// the result is reproducible.
class Residual {
 public:
  explicit Residual(int nodes) : g_(nodes) {}

  std::pair<int, int> add(int u, int v, const Rational& cap) {
    g_[u].push_back({v, cap, static_cast<int>(g_[v].size())});
    g_[v].push_back({u, Rational(0), static_cast<int>(g_[u].size()) - 1});
    return {u, static_cast<int>(g_[u].size()) - 1};
  }

  Rational run(int s, int t) {
    Rational total = 0;
    const int N = static_cast<int>(g_.size());
    while (true) {
      std::vector<std::pair<int, int>> pred(N, {-1, -1});
      std::deque<int> q{s};
      pred[s] = {s, -1};
      while (!q.empty() && pred[t].first < 0) {
        int u = q.front();
        q.pop_front();
        for (int k = 0; k < static_cast<int>(g_[u].size()); ++k) {
          const auto& e = g_[u][k];
          if (e.cap > 0 && pred[e.to].first < 0) {
            pred[e.to] = {u, k};
            q.push_back(e.to);
          }
        }
      }
      if (pred[t].first < 0) break;
      Rational push = -1;
      for (int v = t; v != s; v = pred[v].first) {
        const auto& e = g_[pred[v].first][pred[v].second];
        if (push < 0 || e.cap < push) push = e.cap;
      }
      for (int v = t; v != s; v = pred[v].first) {
        auto& e = g_[pred[v].first][pred[v].second];
        e.cap -= push;
        g_[v][e.rev].cap += push;
      }
      total += push;
    }
    return total;
  }

  const Rational& residual(std::pair<int, int> h) const { return g_[h.first][h.second].cap; }

  // Nodes from which t is reachable in the residual graph.
  std::vector<char> reaching(int t) const {
    const int N = static_cast<int>(g_.size());
    std::vector<char> mark(N, 0);
    std::deque<int> q{t};
    mark[t] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      // u -> v residual iff the paired entry stored at v has positive cap on u's side.
      for (const auto& back : g_[v]) {
        const auto& fwd = g_[back.to][back.rev];
        if (fwd.cap > 0 && !mark[back.to]) {
          mark[back.to] = 1;
          q.push_back(back.to);
        }
      }
    }
    return mark;
  }

 private:
  struct E {
    int to;
    Rational cap;
    int rev;
  };
  std::vector<std::vector<E>> g_;
};

inline void check_f_in_mbb(const EdgeSet& F, const EdgeSet& mb) {
  for (const auto& [i, j] : F.list())
    if (!mb.contains(i, j))
      throw Error(Errc::NotInMbb, "edge (" + std::to_string(i + 1) + ",g" + std::to_string(j + 1) + ") not MBB");
}

inline FlowNetwork make_network(int n, const Vec& p, const EdgeSet& mb, const EdgeSet* F,
                                const std::vector<char>& agents, const std::vector<char>& goods,
                                const Vec* source_caps) {
  FlowNetwork net;
  net.n = n;
  Rational finite = 0;
  for (int i = 0; i < n; ++i)
    if (agents[i]) {
      const Rational& c = source_caps ? (*source_caps)[i] : p[i];
      net.arcs.push_back({net.source(), net.agent(i), c, false});
      finite += c;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (agents[i] && goods[j] && mb.contains(i, j)) net.arcs.push_back({net.agent(i), net.good(j), 0, true});
  if (F)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (agents[i] && goods[j] && F->contains(i, j)) net.arcs.push_back({net.good(j), net.agent(i), 0, true});
  for (int j = 0; j < n; ++j)
    if (goods[j]) {
      net.arcs.push_back({net.good(j), net.sink(), p[j], false});
      finite += p[j];
    }
  net.inf_cap = finite + 1;
  for (auto& a : net.arcs)
    if (a.infinite) a.cap = net.inf_cap;
  return net;
}

}  // namespace detail

inline FlowNetwork build_network(const Market& mk, const EdgeSet& F, const Vec& p) {
  auto mb = mbb(mk, p);
  detail::check_f_in_mbb(F, mb.edges);
  std::vector<char> all(mk.n(), 1);
  return detail::make_network(mk.n(), p, mb.edges, &F, all, all, nullptr);
}

inline MaxFlowResult max_flow(const FlowNetwork& net) {
  detail::Residual r(net.nodes());
  std::vector<std::pair<int, int>> handle;
  handle.reserve(net.arcs.size());
  for (const auto& a : net.arcs) handle.push_back(r.add(a.from, a.to, a.cap));
  MaxFlowResult out;
  out.value = r.run(net.source(), net.sink());
  out.arc_flow.resize(net.arcs.size());
  for (std::size_t k = 0; k < net.arcs.size(); ++k) out.arc_flow[k] = net.arcs[k].cap - r.residual(handle[k]);
  out.reaches_sink = r.reaching(net.sink());
  return out;
}

// Net money flow: forward arcs add, reverse (F) arcs subtract.
inline void accumulate_flow(const FlowNetwork& net, const MaxFlowResult& res, Flow& f) {
  const int n = net.n;
  for (std::size_t k = 0; k < net.arcs.size(); ++k) {
    const auto& a = net.arcs[k];
    if (a.from < n && a.to >= n && a.to < 2 * n) f(a.from, a.to - n) += res.arc_flow[k];
    if (a.from >= n && a.from < 2 * n && a.to < n) f(a.to, a.from - n) -= res.arc_flow[k];
  }
}

namespace detail {

inline Vec source_flows(const FlowNetwork& net, const MaxFlowResult& res) {
  Vec out(net.n, Rational(0));
  for (std::size_t k = 0; k < net.arcs.size(); ++k)
    if (net.arcs[k].from == net.source()) out[net.arcs[k].to] = res.arc_flow[k];
  return out;
}

// Smallest level L with sum_i min(p_i, L) = total, over the given agents.
inline Rational water_level(const Vec& p, const std::vector<int>& agents, const Rational& total) {
  std::vector<Rational> caps;
  for (int i : agents) caps.push_back(p[i]);
  std::sort(caps.begin(), caps.end());
  Rational below = 0;
  const std::size_t k = caps.size();
  for (std::size_t r = 0; r < k; ++r) {
    // Level lies in [caps[r-1], caps[r]] if below + (k - r) * caps[r] >= total.
    Rational reach = below + Rational(static_cast<long>(k - r)) * caps[r];
    if (reach >= total) return (total - below) / Rational(static_cast<long>(k - r));
    below += caps[r];
  }
  return caps.empty() ? Rational(0) : caps.back();
}

inline void balanced_rec(int n, const Vec& p, const EdgeSet& mb, const EdgeSet& F, std::vector<char> agents,
                         std::vector<char> goods, Flow& out) {
  std::vector<int> alist;
  for (int i = 0; i < n; ++i)
    if (agents[i]) alist.push_back(i);
  bool any_good = std::any_of(goods.begin(), goods.end(), [](char c) { return c != 0; });
  if (alist.empty() || !any_good) return;

  auto net = make_network(n, p, mb, &F, agents, goods, nullptr);
  auto res = max_flow(net);
  Vec spend = source_flows(net, res);
  Rational total = 0;
  for (int i : alist) total += p[i] - spend[i];
  if (total == 0) {
    accumulate_flow(net, res, out);
    return;
  }

  // Target surplus min(p_i, L) for every agent, so source capacity max(0, p_i - L).
  Rational level = water_level(p, alist, total);
  Vec caps(n, Rational(0));
  for (int i : alist) caps[i] = p[i] > level ? Rational(p[i] - level) : Rational(0);
  auto net2 = make_network(n, p, mb, &F, agents, goods, &caps);
  auto res2 = max_flow(net2);
  Vec spend2 = source_flows(net2, res2);
  bool saturated = true;
  for (int i : alist)
    if (spend2[i] != caps[i]) saturated = false;
  if (saturated) {
    accumulate_flow(net2, res2, out);
    return;
  }

  // Maximal min-cut: the source side is every node that cannot reach t.
  std::vector<char> a_hi(n, 0), g_hi(n, 0), a_lo(n, 0), g_lo(n, 0);
  for (int i = 0; i < n; ++i) {
    if (agents[i]) (res2.reaches_sink[net2.agent(i)] ? a_lo : a_hi)[i] = 1;
    if (goods[i]) (res2.reaches_sink[net2.good(i)] ? g_lo : g_hi)[i] = 1;
  }
  if (a_hi == agents && g_hi == goods) throw Error(Errc::InvariantBreach, "balanced flow split made no progress");
  balanced_rec(n, p, mb, F, std::move(a_hi), std::move(g_hi), out);
  balanced_rec(n, p, mb, F, std::move(a_lo), std::move(g_lo), out);
}

}  // namespace detail

// Max-flow in N(p, F) that, among max-flows, minimizes the 2-norm of the
// agent surpluses. Divide and conquer over maximal min-cuts.
inline Flow balanced_flow(const Market& mk, const EdgeSet& F, const Vec& p) {
  auto mb = mbb(mk, p);
  detail::check_f_in_mbb(F, mb.edges);
  const int n = mk.n();
  Flow f(n);
  detail::balanced_rec(n, p, mb.edges, F, std::vector<char>(n, 1), std::vector<char>(n, 1), f);
  return f;
}

// Max-flow on forward MBB arcs only; succeeds iff every source arc saturates.
inline Flow final_flow(const Market& mk, const Vec& p) {
  auto mb = mbb(mk, p);
  const int n = mk.n();
  std::vector<char> all(n, 1);
  auto net = detail::make_network(n, p, mb.edges, nullptr, all, all, nullptr);
  auto res = max_flow(net);
  if (res.value != sum(p)) throw Error(Errc::NotSaturated, "max-flow " + to_string(res.value) + " < " + to_string(sum(p)));
  Flow f(n);
  accumulate_flow(net, res, f);
  return f;
}

}  // namespace lxm
