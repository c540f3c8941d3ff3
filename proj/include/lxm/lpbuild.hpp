#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "market.hpp"

namespace lxm {

// Components of (agents + goods, F) that contain at least one good, ordered
// by their smallest good, which is also the representative.
struct Decomposition {
  int n = 0;
  int t = 0;
  std::vector<int> rep;                  // representative good per component
  std::vector<std::vector<int>> goods;   // per component, ascending
  std::vector<std::vector<int>> agents;  // per component, ascending
  std::vector<int> comp_of_good;         // rho
  std::vector<int> comp_of_agent;        // -1 for agents with no F-edge
  Vec theta;                             // per good: p_l = theta_l * pbar_{rho(l)}
  Vec Theta;                             // per component: sum of theta over its goods
  Vec gamma;                             // per component: number of goods
};

inline Decomposition decompose(const Market& mk, const EdgeSet& F) {
  const int n = mk.n();
  for (const auto& [i, j] : F.list())
    if (!mk.has_edge(i, j)) throw Error(Errc::InvalidInput, "F is not a subset of E");

  std::vector<std::vector<int>> agent_goods(n), good_agents(n);
  for (const auto& [i, j] : F.list()) {
    agent_goods[i].push_back(j);
    good_agents[j].push_back(i);
  }

  Decomposition d;
  d.n = n;
  d.comp_of_good.assign(n, -1);
  d.comp_of_agent.assign(n, -1);
  d.theta.assign(n, Rational(0));
  for (int r = 0; r < n; ++r) {
    if (d.comp_of_good[r] >= 0) continue;
    const int c = d.t++;
    d.rep.push_back(r);
    d.goods.emplace_back();
    d.agents.emplace_back();
    d.comp_of_good[r] = c;
    d.theta[r] = 1;
    // BFS over goods; agents relay the price ratio u_kl' / u_kl.
    std::deque<int> q{r};
    while (!q.empty()) {
      int l = q.front();
      q.pop_front();
      d.goods[c].push_back(l);
      for (int k : good_agents[l]) {
        if (d.comp_of_agent[k] < 0) {
          d.comp_of_agent[k] = c;
          d.agents[c].push_back(k);
        }
        for (int l2 : agent_goods[k]) {
          Rational want = d.theta[l] * mk.u(k, l2) / mk.u(k, l);
          if (d.comp_of_good[l2] < 0) {
            d.comp_of_good[l2] = c;
            d.theta[l2] = want;
            q.push_back(l2);
          } else if (d.theta[l2] != want) {
            throw Error(Errc::InconsistentComponent,
                        "good " + std::to_string(l2 + 1) + " gets two different price ratios");
          }
        }
      }
    }
    std::sort(d.goods[c].begin(), d.goods[c].end());
    std::sort(d.agents[c].begin(), d.agents[c].end());
  }
  d.Theta.assign(d.t, Rational(0));
  d.gamma.assign(d.t, Rational(0));
  for (int c = 0; c < d.t; ++c) {
    for (int l : d.goods[c]) d.Theta[c] += d.theta[l];
    d.gamma[c] = static_cast<long>(d.goods[c].size());
  }
  return d;
}

// cpos * pbar[pos] - cneg * pbar[neg] <= 0. When pos == neg the row has
// been merged into (cpos - cneg) * pbar[pos] <= 0.
struct MbbRow {
  int agent;
  int good_out;  // (agent, good_out) in E \ F
  int good_in;   // (agent, good_in) in F
  int pos;
  Rational cpos;
  int neg;
  Rational cneg;
};

struct PFSystem {
  int t = 0;
  std::vector<MbbRow> mbb_rows;
  std::vector<Vec> M;
  Vec gamma;
  Vec lambda;
  Rational B;
};

inline PFSystem build_pf(const Market& mk, const EdgeSet& F, const Decomposition& d) {
  PFSystem pf;
  pf.t = d.t;
  const int n = mk.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (!mk.has_edge(k, j) || F.contains(k, j)) continue;
      for (int jp = 0; jp < n; ++jp) {
        if (!F.contains(k, jp)) continue;
        MbbRow row{k, j, jp, d.comp_of_good[jp], mk.u(k, j) * d.theta[jp], d.comp_of_good[j],
                   mk.u(k, jp) * d.theta[j]};
        if (row.pos == row.neg) {
          // Ratio is fixed by theta: either always true or forces pbar = 0.
          if (row.cpos <= row.cneg) continue;
          row.cpos -= row.cneg;
          row.cneg = 0;
        }
        bool dup = std::any_of(pf.mbb_rows.begin(), pf.mbb_rows.end(), [&](const MbbRow& o) {
          return o.pos == row.pos && o.neg == row.neg && o.cneg * row.cpos == row.cneg * o.cpos;
        });
        if (!dup) pf.mbb_rows.push_back(row);
      }
    }

  const int t = d.t;
  pf.M.assign(t, Vec(t, Rational(0)));
  for (int i = 0; i < t; ++i) {
    pf.M[i][i] = d.Theta[i];
    for (int k : d.agents[i]) pf.M[i][d.comp_of_good[k]] -= d.theta[k];
  }
  pf.gamma = d.gamma;
  Rational total = sum(d.gamma);
  Rational mn = *std::min_element(d.gamma.begin(), d.gamma.end());
  pf.lambda.resize(t);
  for (int i = 0; i < t; ++i) pf.lambda[i] = total - d.gamma[i];
  pf.B = total / mn;
  return pf;
}

// p_l = theta_l * pbar_{rho(l)}.
inline Vec extend(const Decomposition& d, const Vec& pbar) {
  Vec p(d.n);
  for (int l = 0; l < d.n; ++l) p[l] = d.theta[l] * pbar[d.comp_of_good[l]];
  return p;
}

}  // namespace lxm
