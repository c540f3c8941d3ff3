#pragma once

#include <deque>
#include <vector>

#include "flow.hpp"
#include "lpbuild.hpp"
#include "market.hpp"
#include "simplex.hpp"

namespace lxm {

// Goods first, then budgets, negative flow, and MBB support.
inline std::vector<Violation> check_equilibrium(const Market& mk, const Vec& p, const Flow& f) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  const int n = mk.n();
  for (int j = 0; j < n; ++j)
    if (f.sold(j) != p[j]) out.push_back({K::GoodNotCleared, j});
  for (int i = 0; i < n; ++i)
    if (f.spent(i) != p[i]) out.push_back({K::BudgetViolated, i});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (f(i, j) < 0) out.push_back({K::NegativeFlow, i, j});
  bool positive = true;
  for (int j = 0; j < n; ++j)
    if (p[j] <= 0) {
      out.push_back({K::NonpositivePrice, j});
      positive = false;
    }
  if (positive) {
    auto mb = mbb(mk, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (f(i, j) != 0 && !mb.edges.contains(i, j)) out.push_back({K::NonMBB, i, j});
  }
  return out;
}

// Residual graph of N(p, F) with respect to f. Returns false if some agent
// can push money to a lower-surplus agent that spends, or if f is not a max
// flow. The source is never an interior node of such a path.
inline bool check_balanced(const Market& mk, const EdgeSet& F, const Vec& p, const Flow& f) {
  const int n = mk.n();
  const int T = 2 * n;  // sink; agents 0..n-1, goods n..2n-1
  auto mb = mbb(mk, p);
  auto sp = surplus(p, f);
  std::vector<std::vector<int>> adj(2 * n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (mb.edges.contains(i, j)) adj[i].push_back(n + j);
      if (f(i, j) > 0 || F.contains(i, j)) adj[n + j].push_back(i);
    }
  for (int j = 0; j < n; ++j) {
    if (sp.s[j] > 0) adj[n + j].push_back(T);
    if (f.sold(j) > 0) adj[T].push_back(n + j);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<char> seen(2 * n + 1, 0);
    std::deque<int> q{i};
    seen[i] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
    }
    if (sp.c[i] > 0)
      for (int j = 0; j < n; ++j)
        if (seen[n + j] && sp.s[j] > 0) return false;
    for (int k = 0; k < n; ++k)
      if (k != i && seen[k] && sp.c[i] > sp.c[k] && f.spent(k) > 0) return false;
  }
  return true;
}

struct PsiResult {
  bool zero = false;  // the LP is unbounded, so an F-equilibrium exists
  Rational value;     // Psi(F)^n when !zero
  Vec pbar;           // pointwise-max solution when !zero
};

inline LPProblem pf_lp(const PFSystem& pf) {
  LPProblem lp;
  lp.nvars = pf.t;
  lp.objective.assign(pf.t, Rational(1));
  for (const auto& r : pf.mbb_rows) {
    Vec a(pf.t, Rational(0));
    a[r.pos] += r.cpos;
    a[r.neg] -= r.cneg;
    lp.rows.push_back({a, Sense::Le, Rational(0)});
  }
  for (int i = 0; i < pf.t; ++i) lp.rows.push_back({pf.M[i], Sense::Le, pf.gamma[i]});
  return lp;
}

// Psi(F)^n from the LP optimum of max sum pbar. At a price vector extending
// pbar, the least achievable max good surplus with flow on F is
// max_i max(0, (M pbar)_i) / gamma_i.
inline PsiResult psi_exact(const Market& mk, const EdgeSet& F) {
  auto dec = decompose(mk, F);
  auto pf = build_pf(mk, F, dec);
  auto lp = pf_lp(pf);
  auto res = lp_solve(lp);
  PsiResult out;
  if (res.status == LPResult::Status::Unbounded) {
    out.zero = true;
    return out;
  }
  if (res.status != LPResult::Status::Optimal) throw Error(Errc::InvariantBreach, "(P_F) infeasible");
  for (int c = 0; c < pf.t; ++c) {
    LPProblem one = lp;
    one.objective.assign(pf.t, Rational(0));
    one.objective[c] = 1;
    auto r = lp_solve(one);
    if (r.status != LPResult::Status::Optimal || r.value != res.x[c])
      throw Error(Errc::InvariantBreach, "LP optimum is not the pointwise maximum");
  }
  out.pbar = res.x;
  Rational smax = 0;
  for (int i = 0; i < pf.t; ++i) {
    Rational e = 0;
    for (int c = 0; c < pf.t; ++c) e += pf.M[i][c] * res.x[c];
    Rational per = e > 0 ? Rational(e / pf.gamma[i]) : Rational(0);
    if (per > smax) smax = per;
  }
  Vec p = extend(dec, res.x);
  require_positive(p);
  out.value = pow(smax, static_cast<unsigned long>(mk.n())) / product(p);
  return out;
}

}  // namespace lxm
