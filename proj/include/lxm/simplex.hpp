#pragma once

#include <vector>

#include "market.hpp"

namespace lxm {

enum class Sense { Le, Ge, Eq };

struct LPRow {
  Vec a;
  Sense sense = Sense::Le;
  Rational rhs;
};

// maximize objective . x  subject to rows, x >= lower (lower defaults to 0).
struct LPProblem {
  int nvars = 0;
  Vec objective;
  std::vector<LPRow> rows;
  Vec lower;
};

struct LPResult {
  enum class Status { Optimal, Infeasible, Unbounded } status = Status::Infeasible;
  Vec x;
  Rational value;
};

inline constexpr int kLpMaxVars = 40;
inline constexpr int kLpMaxRows = 200;

namespace detail {

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_(rows, Vec(cols + 1, Rational(0))), basis_(rows, -1) {}

  Rational& at(int r, int c) { return t_[r][c]; }
  Rational& rhs(int r) { return t_[r][n_]; }
  int& basis(int r) { return basis_[r]; }
  int rows() const { return m_; }

  void pivot(int pr, int pc) {
    Rational inv = 1 / t_[pr][pc];
    for (auto& v : t_[pr]) v *= inv;
    for (int r = 0; r < m_; ++r) {
      if (r == pr || t_[r][pc] == 0) continue;
      Rational k = t_[r][pc];
      for (int c = 0; c <= n_; ++c)
        if (t_[pr][c] != 0) t_[r][c] -= k * t_[pr][c];
    }
    basis_[pr] = pc;
  }

  void drop_row(int r) {
    t_.erase(t_.begin() + r);
    basis_.erase(basis_.begin() + r);
    --m_;
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving basic
  // variable among ratio ties. Columns with allowed[c] == 0 never enter.
  // Returns false if unbounded.
  bool optimize(const Vec& cost, const std::vector<char>& allowed) {
    while (true) {
      int enter = -1;
      for (int c = 0; c < n_ && enter < 0; ++c) {
        if (!allowed[c]) continue;
        Rational d = cost[c];
        for (int r = 0; r < m_; ++r)
          if (t_[r][c] != 0) d -= cost[basis_[r]] * t_[r][c];
        if (d > 0) enter = c;
      }
      if (enter < 0) return true;
      int leave = -1;
      Rational best;
      for (int r = 0; r < m_; ++r) {
        if (t_[r][enter] <= 0) continue;
        Rational ratio = t_[r][n_] / t_[r][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

 private:
  int m_, n_;
  std::vector<Vec> t_;
  std::vector<int> basis_;
};

}  // namespace detail

// Exact two-phase tableau simplex.
inline LPResult lp_solve(const LPProblem& lp) {
  const int nv = lp.nvars;
  const int nr = static_cast<int>(lp.rows.size());
  if (nv > kLpMaxVars || nr > kLpMaxRows) throw Error(Errc::CapExceeded, "LP too large for the oracle");
  Vec lower = lp.lower.empty() ? Vec(nv, Rational(0)) : lp.lower;

  // Shift to y = x - lower >= 0 and make every right-hand side nonnegative.
  struct Norm {
    Vec a;
    Sense sense;
    Rational rhs;
  };
  std::vector<Norm> rows;
  int n_slack = 0, n_art = 0;
  for (const auto& row : lp.rows) {
    Norm r{row.a, row.sense, row.rhs};
    r.a.resize(nv, Rational(0));
    for (int k = 0; k < nv; ++k) r.rhs -= r.a[k] * lower[k];
    if (r.rhs < 0) {
      for (auto& v : r.a) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == Sense::Le) r.sense = Sense::Ge;
      else if (r.sense == Sense::Ge) r.sense = Sense::Le;
    }
    if (r.sense != Sense::Eq) ++n_slack;
    if (r.sense != Sense::Le) ++n_art;
    rows.push_back(std::move(r));
  }

  const int cols = nv + n_slack + n_art;
  detail::Tableau tab(nr, cols);
  int next_slack = nv, next_art = nv + n_slack;
  for (int r = 0; r < nr; ++r) {
    for (int k = 0; k < nv; ++k) tab.at(r, k) = rows[r].a[k];
    tab.rhs(r) = rows[r].rhs;
    if (rows[r].sense == Sense::Le) {
      tab.at(r, next_slack) = 1;
      tab.basis(r) = next_slack++;
    } else {
      if (rows[r].sense == Sense::Ge) tab.at(r, next_slack++) = -1;
      tab.at(r, next_art) = 1;
      tab.basis(r) = next_art++;
    }
  }

  LPResult out;
  std::vector<char> allowed(cols, 1);
  if (n_art > 0) {
    Vec cost(cols, Rational(0));
    for (int c = nv + n_slack; c < cols; ++c) cost[c] = -1;
    tab.optimize(cost, allowed);
    Rational infeas = 0;
    for (int r = 0; r < tab.rows(); ++r)
      if (tab.basis(r) >= nv + n_slack) infeas += tab.rhs(r);
    if (infeas > 0) {
      out.status = LPResult::Status::Infeasible;
      return out;
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    for (int r = 0; r < tab.rows();) {
      if (tab.basis(r) < nv + n_slack) {
        ++r;
        continue;
      }
      int pc = -1;
      for (int c = 0; c < nv + n_slack && pc < 0; ++c)
        if (tab.at(r, c) != 0) pc = c;
      if (pc >= 0) {
        tab.pivot(r, pc);
        ++r;
      } else {
        tab.drop_row(r);
      }
    }
    for (int c = nv + n_slack; c < cols; ++c) allowed[c] = 0;
  }

  Vec cost(cols, Rational(0));
  for (int k = 0; k < nv && k < static_cast<int>(lp.objective.size()); ++k) cost[k] = lp.objective[k];
  if (!tab.optimize(cost, allowed)) {
    out.status = LPResult::Status::Unbounded;
    return out;
  }
  out.status = LPResult::Status::Optimal;
  out.x = lower;
  for (int r = 0; r < tab.rows(); ++r)
    if (tab.basis(r) < nv) out.x[tab.basis(r)] += tab.rhs(r);
  out.value = 0;
  for (int k = 0; k < nv && k < static_cast<int>(lp.objective.size()); ++k) out.value += lp.objective[k] * out.x[k];
  return out;
}

}  // namespace lxm
