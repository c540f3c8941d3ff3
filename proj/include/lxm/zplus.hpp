#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <vector>

#include "market.hpp"

namespace lxm {

using Matrix = std::vector<Vec>;

inline int cols_of(const Matrix& T) { return T.empty() ? 0 : static_cast<int>(T[0].size()); }

// Off-diagonal entries nonpositive and column sums nonnegative.
inline bool is_zplus(const Matrix& T) {
  const int k = static_cast<int>(T.size()), t = cols_of(T);
  for (int j = 0; j < t; ++j) {
    Rational col = 0;
    for (int i = 0; i < k; ++i) {
      if (i != j && T[i][j] > 0) return false;
      col += T[i][j];
    }
    if (col < 0) return false;
  }
  return true;
}

struct EliminationResult {
  Matrix Tprime;
  Matrix Y;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::InvariantBreach, std::string("elimination: ") + what);
}

}  // namespace detail

// Row-by-row elimination without pivoting. On a Z+ matrix every multiplier
// is nonnegative, so Y >= 0 and Tprime = Y * T.
inline EliminationResult gauss(const Matrix& T) {
  if (!is_zplus(T)) throw Error(Errc::NotZPlus, "gauss: input is not a Z+ matrix");
  const int l = static_cast<int>(T.size()), t = cols_of(T);
  EliminationResult r;
  r.Tprime = T;
  r.Y.assign(l, Vec(l, Rational(0)));
  for (int i = 0; i < l; ++i) r.Y[i][i] = 1;
  Matrix& A = r.Tprime;
  Matrix& Y = r.Y;

  for (int k = 0; k < std::min(l, t); ++k) {
    bool below_negative = false;
    for (int i = k + 1; i < l; ++i)
      if (T[i][k] < 0) below_negative = true;
    if (A[k][k] > 0) {
      Rational inv = 1 / A[k][k];
      for (auto& v : A[k]) v *= inv;
      for (auto& v : Y[k]) v *= inv;
      for (int i = k + 1; i < l; ++i) {
        if (A[i][k] == 0) continue;
        Rational mult = -A[i][k];
        for (int c = 0; c < t; ++c) A[i][c] += mult * A[k][c];
        for (int c = 0; c < l; ++c) Y[i][c] += mult * Y[k][c];
      }
    } else {
      detail::require(A[k][k] == 0, "negative pivot");
      for (int i = k + 1; i < l; ++i) detail::require(A[i][k] == 0, "nonzero below a zero pivot");
    }
    detail::require(!below_negative || A[k][k] == 1, "pivot below a negative entry is not 1");

    for (int i = 0; i < l; ++i)
      for (int c = 0; c < l; ++c) detail::require(Y[i][c] >= 0, "negative multiplier");
    for (int i = 0; i < l; ++i)
      for (int c = 0; c < t; ++c)
        if (i != c) detail::require(A[i][c] <= 0, "positive off-diagonal");
    for (int c = k + 1; c < t; ++c) {
      Rational part = 0;
      for (int i = k + 1; i < l; ++i) part += A[i][c];
      if (c < l) detail::require(part >= 0, "negative partial column sum");
      if (c < l) detail::require(A[c][c] >= 0, "negative diagonal");
    }
  }

  for (int i = 0; i < l; ++i)
    for (int c = 0; c < std::min(i, t); ++c) detail::require(A[i][c] == 0, "not upper triangular");
  for (int i = 0; i < std::min(l, t); ++i) detail::require(A[i][i] == 0 || A[i][i] == 1, "diagonal not 0 or 1");
  for (int i = 0; i < l; ++i)
    for (int c = 0; c < t; ++c) {
      Rational v = 0;
      for (int s = 0; s < l; ++s) v += Y[i][s] * T[s][c];
      detail::require(v == A[i][c], "Tprime != Y * T");
    }
  return r;
}

inline int rank(Matrix A) {
  const int rows = static_cast<int>(A.size()), cols = cols_of(A);
  int rk = 0;
  for (int c = 0; c < cols && rk < rows; ++c) {
    int piv = -1;
    for (int r = rk; r < rows && piv < 0; ++r)
      if (A[r][c] != 0) piv = r;
    if (piv < 0) continue;
    std::swap(A[rk], A[piv]);
    for (int r = rk + 1; r < rows; ++r) {
      if (A[r][c] == 0) continue;
      Rational k = A[r][c] / A[rk][c];
      for (int cc = c; cc < cols; ++cc) A[r][cc] -= k * A[rk][cc];
    }
    ++rk;
  }
  return rk;
}

struct Classification {
  int t = 0;
  std::vector<std::vector<int>> out;    // H adjacency, ascending
  std::vector<std::vector<int>> reach;  // D_i, ascending
  std::vector<int> group;               // 1, 2 or 3
};

inline Classification classify(const Matrix& M) {
  Classification cl;
  const int t = static_cast<int>(M.size());
  cl.t = t;
  cl.out.resize(t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      if (i != j && M[i][j] < 0) cl.out[i].push_back(j);
  cl.reach.resize(t);
  cl.group.resize(t);
  for (int i = 0; i < t; ++i) {
    std::vector<char> seen(t, 0);
    std::deque<int> q{i};
    seen[i] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : cl.out[u])
        if (!seen[v]) {
          seen[v] = 1;
          q.push_back(v);
        }
    }
    for (int v = 0; v < t; ++v)
      if (seen[v]) cl.reach[i].push_back(v);
    if (cl.out[i].size() <= 1) {
      cl.group[i] = 1;
      continue;
    }
    Matrix sub;
    for (int h : cl.reach[i]) sub.push_back(M[h]);
    cl.group[i] = rank(sub) == static_cast<int>(cl.reach[i].size()) ? 2 : 3;
  }
  return cl;
}

// order[pos] = element. i sits at position d-1 and j at d-2 (0-based); the
// rest of D_i is placed downward in BFS order from i, so every element of
// D_i other than i has an in-arc from a later position below d.
inline std::vector<int> build_sigma(int i, int j, const std::vector<int>& D, const std::vector<std::vector<int>>& out,
                                    int t) {
  const int d = static_cast<int>(D.size());
  std::vector<char> inD(t, 0), placed(t, 0);
  for (int v : D) inD[v] = 1;
  if (!inD[j] || std::find(out[i].begin(), out[i].end(), j) == out[i].end())
    throw Error(Errc::ConstructionFailed, "build_sigma: arc not in H");
  std::vector<int> order(t, -1);
  std::vector<int> pos(t, -1);
  int next = d - 1;
  auto place = [&](int v) {
    order[next] = v;
    pos[v] = next--;
    placed[v] = 1;
  };
  place(i);
  place(j);
  std::deque<int> q{i, j};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : out[u])
      if (inD[v] && !placed[v]) {
        place(v);
        q.push_back(v);
      }
  }
  if (next != -1) throw Error(Errc::ConstructionFailed, "build_sigma: D_i not reachable");
  int tail = d;
  for (int v = 0; v < t; ++v)
    if (!inD[v]) order[tail++] = v;

  for (int v : D) {
    if (v == i) continue;
    bool ok = false;
    for (int w : D)
      if (std::find(out[w].begin(), out[w].end(), v) != out[w].end() && pos[v] < pos[w]) ok = true;
    if (!ok) throw Error(Errc::ConstructionFailed, "build_sigma: in-arc condition fails");
  }
  return order;
}

struct ArcSynthesis {
  int i = -1, j = -1;
  std::vector<int> order;
  Matrix Msub;  // d x t, rows and columns permuted
  EliminationResult elim;
  Vec v;        // original coordinates
  Rational delta;
  Rational kappa;  // Y_d . gamma; meaningful for T2
  Rational last_diag;
};

inline ArcSynthesis synthesize_arc(const Matrix& M, const Vec& gamma, const Vec& lambda, int i, int j,
                                   const Classification& cl) {
  const int t = static_cast<int>(M.size());
  const auto& D = cl.reach[i];
  const int d = static_cast<int>(D.size());
  ArcSynthesis a;
  a.i = i;
  a.j = j;
  a.order = build_sigma(i, j, D, cl.out, t);
  a.Msub.assign(d, Vec(t));
  Vec g(d), lam(d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < t; ++c) a.Msub[r][c] = M[a.order[r]][a.order[c]];
    g[r] = gamma[a.order[r]];
    lam[r] = lambda[a.order[r]];
  }
  a.elim = gauss(a.Msub);
  const Vec& row = a.elim.Tprime[d - 2];
  a.v.assign(t, Rational(0));
  for (int c = 0; c < t; ++c) a.v[a.order[c]] = row[c];
  a.delta = 0;
  a.kappa = 0;
  for (int s = 0; s < d; ++s) {
    a.delta -= a.elim.Y[d - 2][s] * lam[s];
    a.kappa += a.elim.Y[d - 1][s] * g[s];
  }
  a.last_diag = a.elim.Tprime[d - 1][d - 1];

  for (int c = 0; c < t; ++c) {
    if (c == j) detail::require(a.v[c] == 1, "v_j != 1");
    else if (c == i) detail::require(a.v[c] <= 0, "v_i > 0");
    else detail::require(a.v[c] == 0, "v has extra support");
  }
  for (int k = 0; k + 1 < d; ++k) detail::require(a.elim.Tprime[k][k] == 1, "leading diagonal not 1");
  if (cl.group[i] != 1)
    detail::require(a.last_diag == (cl.group[i] == 2 ? 1 : 0), "last diagonal disagrees with rank class");
  return a;
}

struct T1Row {
  int i;
  Vec a;
  Rational rhs;
};
struct KappaRow {
  int i;
  Rational kappa;
};
struct VRow {
  int i, j;
  Vec v;
  Rational delta;
};

// All indices in original coordinates. Rows/columns with a zero diagonal are
// dropped before synthesis and listed in `removed`.
struct ApproxSystem {
  int t = 0;
  std::vector<T1Row> t1_rows;
  std::vector<KappaRow> kappa_rows;
  std::vector<VRow> v_rows;
  std::vector<int> group;  // 0 for removed indices
  std::vector<int> removed;
};

inline ApproxSystem approx(const Matrix& M, const Vec& gamma, const Vec& lambda) {
  if (!is_zplus(M)) throw Error(Errc::NotZPlus, "approx: input is not a Z+ matrix");
  const int t = static_cast<int>(M.size());
  ApproxSystem out;
  out.t = t;
  out.group.assign(t, 0);
  std::vector<int> keep;
  for (int i = 0; i < t; ++i) (M[i][i] > 0 ? keep : out.removed).push_back(i);
  const int r = static_cast<int>(keep.size());
  Matrix Mr(r, Vec(r));
  Vec gr(r), lr(r);
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) Mr[a][b] = M[keep[a]][keep[b]];
    gr[a] = gamma[keep[a]];
    lr[a] = lambda[keep[a]];
  }
  auto lift = [&](const Vec& v) {
    Vec full(t, Rational(0));
    for (int a = 0; a < r; ++a) full[keep[a]] = v[a];
    return full;
  };

  Classification cl = classify(Mr);
  for (int a = 0; a < r; ++a) {
    const int i = keep[a];
    out.group[i] = cl.group[a];
    if (cl.group[a] == 1) {
      out.t1_rows.push_back({i, M[i], gamma[i]});
      continue;
    }
    bool have_kappa = false;
    Rational kappa;
    for (int b : cl.out[a]) {
      ArcSynthesis s = synthesize_arc(Mr, gr, lr, a, b, cl);
      out.v_rows.push_back({i, keep[b], lift(s.v), s.delta});
      if (cl.group[a] == 2) {
        if (have_kappa) detail::require(s.kappa == kappa, "kappa depends on the arc");
        kappa = s.kappa;
        have_kappa = true;
      }
    }
    if (have_kappa) out.kappa_rows.push_back({i, kappa});
  }
  return out;
}

}  // namespace lxm
