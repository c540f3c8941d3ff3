#pragma once

#include <deque>
#include <vector>

#include "lpbuild.hpp"
#include "m2vpi.hpp"
#include "market.hpp"
#include "zplus.hpp"

namespace lxm {

// Flow supported on F whose surpluses are spread evenly over a component's
// goods (excess >= 0) or over its agents in proportion to budget (excess < 0).
inline Flow component_flow(const Market& mk, const EdgeSet& F, const Decomposition& dec, const Vec& p) {
  const int n = mk.n();
  Flow f(n);
  Vec spend(n, Rational(0)), sell(n);
  for (int j = 0; j < n; ++j) sell[j] = p[j];
  std::vector<std::vector<int>> agent_goods(n), good_agents(n);
  for (const auto& [i, j] : F.list()) {
    agent_goods[i].push_back(j);
    good_agents[j].push_back(i);
  }

  for (int c = 0; c < dec.t; ++c) {
    Rational goods_total = 0, budget = 0;
    for (int l : dec.goods[c]) goods_total += p[l];
    for (int k : dec.agents[c]) budget += p[k];
    Rational excess = goods_total - budget;
    if (excess >= 0) {
      Rational each = excess / dec.gamma[c];
      for (int l : dec.goods[c]) sell[l] = p[l] - each;
      for (int k : dec.agents[c]) spend[k] = p[k];
    } else {
      for (int k : dec.agents[c]) spend[k] = p[k] + excess * p[k] / budget;
    }

    // BFS spanning tree from the representative good. Node v < n is an
    // agent, v >= n is good v - n.
    std::vector<int> order, parent(2 * n, -1);
    std::vector<char> seen(2 * n, 0);
    std::deque<int> q{n + dec.rep[c]};
    seen[n + dec.rep[c]] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      order.push_back(v);
      const auto& nb = v < n ? agent_goods[v] : good_agents[v - n];
      for (int w : nb) {
        int node = v < n ? n + w : w;
        if (!seen[node]) {
          seen[node] = 1;
          parent[node] = v;
          q.push_back(node);
        }
      }
    }
    // Leaf elimination: each node's residual balance goes on its parent edge.
    Vec residual(2 * n, Rational(0));
    for (int v : order) residual[v] = v < n ? spend[v] : sell[v - n];
    for (std::size_t r = order.size(); r-- > 1;) {
      int v = order[r], u = parent[v];
      int agent = v < n ? v : u, good = v < n ? u - n : v - n;
      f(agent, good) = residual[v];
      residual[u] -= residual[v];
    }
    if (residual[order[0]] != 0) throw Error(Errc::InvariantBreach, "component flow does not balance");
  }
  return f;
}

struct BoostResult {
  enum class Tag { Approx, FEquilibrium } tag = Tag::Approx;
  Vec p;
  Flow f;
  Vec pbar;  // component prices behind p
  Decomposition dec;
  PFSystem pf;
  ApproxSystem approx;
  TwoVarSystem qf;
  M2VPIOutcome solved;
};

inline TwoVarSystem assemble_qf(const PFSystem& pf, const ApproxSystem& ap) {
  TwoVarSystem sys(pf.t);
  for (const auto& r : pf.mbb_rows) {
    if (r.pos == r.neg) sys.add({{r.pos, r.cpos}}, 0);
    else sys.add({{r.pos, r.cpos}, {r.neg, -r.cneg}}, 0);
  }
  for (const auto& r : ap.t1_rows) {
    std::vector<std::pair<int, Rational>> terms;
    for (int c = 0; c < pf.t; ++c)
      if (r.a[c] != 0) terms.emplace_back(c, r.a[c]);
    sys.add(terms, r.rhs);
  }
  for (const auto& r : ap.kappa_rows) sys.add({{r.i, Rational(1)}}, r.kappa);
  for (const auto& r : ap.v_rows) {
    std::vector<std::pair<int, Rational>> terms;
    for (int c = 0; c < pf.t; ++c)
      if (r.v[c] != 0) terms.emplace_back(c, -r.v[c]);
    sys.add(terms, -r.delta);
  }
  return sys;
}

inline BoostResult boost(const Market& mk, const EdgeSet& F) {
  BoostResult br;
  br.dec = decompose(mk, F);
  br.pf = build_pf(mk, F, br.dec);
  br.approx = approx(br.pf.M, br.pf.gamma, br.pf.lambda);
  br.qf = assemble_qf(br.pf, br.approx);
  br.solved = solve_max(br.qf);
  const int n = mk.n();
  switch (br.solved.tag) {
    case M2VPIOutcome::Tag::Infeasible:
      throw Error(Errc::InvariantBreach, "Q_F is infeasible although 0 satisfies it");
    case M2VPIOutcome::Tag::Unbounded: {
      auto ray = solve_ray(homogenize(br.qf));
      if (!ray) throw Error(Errc::InvariantBreach, "unbounded Q_F without a ray");
      br.tag = BoostResult::Tag::FEquilibrium;
      br.pbar = *ray;
      break;
    }
    case M2VPIOutcome::Tag::PointwiseMax: {
      br.tag = BoostResult::Tag::Approx;
      Rational scale = Rational(1) / (n * n);
      br.pbar = br.solved.x;
      for (auto& v : br.pbar) v *= scale;
      break;
    }
  }
  br.p = extend(br.dec, br.pbar);
  require_positive(br.p);
  br.f = component_flow(mk, F, br.dec, br.p);
  if (br.tag == BoostResult::Tag::FEquilibrium && norm1(surplus(br.p, br.f).s) != 0)
    throw Error(Errc::InvariantBreach, "boost ray does not clear the market");
  return br;
}

}  // namespace lxm
