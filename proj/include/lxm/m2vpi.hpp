#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "market.hpp"

namespace lxm {

// alpha * x[pos] + beta * x[neg] <= c with alpha > 0 > beta. A missing side
// has index -1 and a zero coefficient.
struct TwoVarRow {
  int pos = -1;
  Rational alpha;
  int neg = -1;
  Rational beta;
  Rational c;
};

struct TwoVarSystem {
  int nvars = 0;
  std::vector<TwoVarRow> rows;

  explicit TwoVarSystem(int n = 0) : nvars(n) {}

  // Sum of coef * x[var] <= rhs; repeated variables are merged.
  void add(const std::vector<std::pair<int, Rational>>& terms, const Rational& rhs) {
    std::map<int, Rational> merged;
    for (const auto& [v, a] : terms) {
      if (v < 0 || v >= nvars) throw Error(Errc::MalformedRow, "variable out of range");
      merged[v] += a;
    }
    TwoVarRow row;
    row.c = rhs;
    for (const auto& [v, a] : merged) {
      if (a > 0) {
        if (row.pos >= 0) throw Error(Errc::MalformedRow, "two positive coefficients");
        row.pos = v;
        row.alpha = a;
      } else if (a < 0) {
        if (row.neg >= 0) throw Error(Errc::MalformedRow, "two negative coefficients");
        row.neg = v;
        row.beta = a;
      }
    }
    rows.push_back(row);
  }

  bool homogeneous() const {
    return std::all_of(rows.begin(), rows.end(), [](const TwoVarRow& r) { return r.c == 0; });
  }
};

struct M2VPIOutcome {
  enum class Tag { PointwiseMax, Infeasible, Unbounded } tag = Tag::Infeasible;
  Vec x;
  std::vector<int> witness;  // row indices
  Vec ray;
};

namespace detail {

// k * K + c for a symbolic, arbitrarily large K.
struct ExtVal {
  Rational k, c;
  bool operator<(const ExtVal& o) const { return k < o.k || (k == o.k && c < o.c); }
  bool operator==(const ExtVal& o) const { return k == o.k && c == o.c; }
};

// x[var] <= slope * x[dep] + offset; dep = -1 or slope = 0 means constant.
struct Bound {
  int var;
  Rational slope;
  int dep;
  Rational offset;
  int row;
};

struct GfpOut {
  bool infeasible = false;
  std::vector<int> witness;
  std::vector<ExtVal> val;
  std::vector<int> choice;  // bound index, -1 for the symbolic box x <= K
};

// Greatest fixed point of x <= min(K, bounds) by policy iteration, one
// switch at a time. A switch that closes a cycle of gain >= 1 while strictly
// improving proves infeasibility.
class PolicyIteration {
 public:
  PolicyIteration(int n, std::vector<Bound> bounds) : n_(n), b_(std::move(bounds)) {
    by_var_.resize(n);
    for (int k = 0; k < static_cast<int>(b_.size()); ++k) by_var_[b_[k].var].push_back(k);
  }

  GfpOut run() {
    GfpOut out;
    out.choice.assign(n_, -1);
    while (true) {
      out.val = evaluate(out.choice);
      int p = -1, best = -1;
      ExtVal best_val;
      for (int v = 0; v < n_ && p < 0; ++v) {
        for (int k : by_var_[v]) {
          ExtVal cand = value_of(k, out.val);
          if (cand < out.val[v] && (best < 0 || cand < best_val)) {
            best = k;
            best_val = cand;
          }
        }
        if (best >= 0) p = v;
      }
      if (p < 0) return out;
      if (closes_bad_cycle(out.choice, p, best, out.witness)) {
        out.infeasible = true;
        return out;
      }
      out.choice[p] = best;
    }
  }

 private:
  int succ(const std::vector<int>& choice, int v) const {
    int k = choice[v];
    if (k < 0 || b_[k].dep < 0 || b_[k].slope == 0) return -1;
    return b_[k].dep;
  }

  ExtVal value_of(int k, const std::vector<ExtVal>& val) const {
    const Bound& b = b_[k];
    if (b.dep < 0 || b.slope == 0) return {Rational(0), b.offset};
    return {b.slope * val[b.dep].k, b.slope * val[b.dep].c + b.offset};
  }

  std::vector<ExtVal> evaluate(const std::vector<int>& choice) const {
    std::vector<ExtVal> val(n_);
    std::vector<char> state(n_, 0);  // 0 new, 1 on path, 2 done
    for (int s = 0; s < n_; ++s) {
      if (state[s]) continue;
      std::vector<int> path;
      int v = s;
      while (v >= 0 && state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = succ(choice, v);
      }
      std::size_t stop = path.size();
      if (v >= 0 && state[v] == 1) {
        // Cycle starting at v: x_v = G x_v + B.
        std::size_t start = std::find(path.begin(), path.end(), v) - path.begin();
        Rational G = 1, B = 0;
        for (std::size_t r = path.size(); r-- > start;) {
          const Bound& b = b_[choice[path[r]]];
          B = b.slope * B + b.offset;
          G = b.slope * G;
        }
        if (G >= 1) throw Error(Errc::InvariantBreach, "policy holds a cycle of gain >= 1");
        val[v] = {Rational(0), B / (1 - G)};
        state[v] = 2;
        for (std::size_t r = path.size(); r-- > start + 1;) {
          val[path[r]] = value_of(choice[path[r]], val);
          state[path[r]] = 2;
        }
        stop = start;
      }
      for (std::size_t r = stop; r-- > 0;) {
        int u = path[r];
        if (state[u] == 2) continue;
        val[u] = choice[u] < 0 ? ExtVal{Rational(1), Rational(0)} : value_of(choice[u], val);
        state[u] = 2;
      }
    }
    return val;
  }

  bool closes_bad_cycle(const std::vector<int>& choice, int p, int k, std::vector<int>& witness) const {
    const Bound& nb = b_[k];
    if (nb.dep < 0 || nb.slope == 0) return false;
    std::vector<int> chain;
    std::vector<char> seen(n_, 0);
    int v = nb.dep;
    while (v >= 0 && v != p && !seen[v]) {
      seen[v] = 1;
      chain.push_back(v);
      v = succ(choice, v);
    }
    if (v != p) return false;
    Rational G = nb.slope;
    for (int u : chain) G *= b_[choice[u]].slope;
    if (G < 1) return false;
    witness = {nb.row};
    for (int u : chain) witness.push_back(b_[choice[u]].row);
    std::sort(witness.begin(), witness.end());
    witness.erase(std::unique(witness.begin(), witness.end()), witness.end());
    return true;
  }

  int n_;
  std::vector<Bound> b_;
  std::vector<std::vector<int>> by_var_;
};

inline std::vector<int> policy_rows(const std::vector<Bound>& bounds, const GfpOut& g, int from) {
  std::vector<int> rows;
  std::vector<char> seen(g.choice.size(), 0);
  for (int v = from; v >= 0 && !seen[v];) {
    seen[v] = 1;
    int k = g.choice[v];
    if (k < 0) break;
    if (bounds[k].row >= 0) rows.push_back(bounds[k].row);
    v = bounds[k].slope == 0 ? -1 : bounds[k].dep;
  }
  return rows;
}

inline std::vector<Bound> upper_bounds(const TwoVarSystem& sys) {
  std::vector<Bound> out;
  for (int r = 0; r < static_cast<int>(sys.rows.size()); ++r) {
    const auto& row = sys.rows[r];
    if (row.pos < 0) continue;
    out.push_back({row.pos, row.neg < 0 ? Rational(0) : Rational(-row.beta / row.alpha), row.neg,
                   row.c / row.alpha, r});
  }
  return out;
}

}  // namespace detail

// Pointwise max of a homogeneous system inside the box x <= 1, or empty.
inline std::optional<Vec> solve_ray(const TwoVarSystem& sys) {
  if (!sys.homogeneous()) throw Error(Errc::MalformedRow, "solve_ray needs a homogeneous system");
  auto bounds = detail::upper_bounds(sys);
  for (int v = 0; v < sys.nvars; ++v) bounds.push_back({v, Rational(0), -1, Rational(1), -1});
  auto g = detail::PolicyIteration(sys.nvars, bounds).run();
  if (g.infeasible) throw Error(Errc::InvariantBreach, "homogeneous system reported infeasible");
  Vec x(sys.nvars);
  bool nonzero = false;
  for (int v = 0; v < sys.nvars; ++v) {
    x[v] = g.val[v].c;
    if (x[v] != 0) nonzero = true;
  }
  if (!nonzero) return std::nullopt;
  return x;
}

inline TwoVarSystem homogenize(const TwoVarSystem& sys) {
  TwoVarSystem h = sys;
  for (auto& r : h.rows) r.c = 0;
  return h;
}

// Greatest feasible point of the system with x >= 0.
inline M2VPIOutcome solve_max(const TwoVarSystem& sys) {
  using Tag = M2VPIOutcome::Tag;
  M2VPIOutcome out;
  const int n = sys.nvars;
  for (int r = 0; r < static_cast<int>(sys.rows.size()); ++r) {
    const auto& row = sys.rows[r];
    if (row.pos >= 0 && row.alpha <= 0) throw Error(Errc::MalformedRow, "positive side needs alpha > 0");
    if (row.neg >= 0 && row.beta >= 0) throw Error(Errc::MalformedRow, "negative side needs beta < 0");
    if (row.pos >= 0 && row.pos == row.neg) throw Error(Errc::MalformedRow, "same variable on both sides");
    if (row.pos < 0 && row.neg < 0 && row.c < 0) {
      out.witness = {r};
      return out;
    }
  }

  auto ub = detail::upper_bounds(sys);
  auto up = detail::PolicyIteration(n, ub).run();
  if (up.infeasible) {
    out.witness = up.witness;
    return out;
  }

  // Least point of the lower-bound side, computed as the greatest point of
  // the mirrored system in y = -x with y <= 0.
  std::vector<detail::Bound> lb;
  for (int r = 0; r < static_cast<int>(sys.rows.size()); ++r) {
    const auto& row = sys.rows[r];
    if (row.neg < 0) continue;
    Rational b = -row.beta;
    lb.push_back({row.neg, row.pos < 0 ? Rational(0) : Rational(row.alpha / b), row.pos, row.c / b, r});
  }
  for (int v = 0; v < n; ++v) lb.push_back({v, Rational(0), -1, Rational(0), -1});
  auto lo = detail::PolicyIteration(n, lb).run();
  if (lo.infeasible) {
    out.witness = lo.witness;
    return out;
  }

  bool bounded = true;
  for (int v = 0; v < n; ++v) {
    Rational least = -lo.val[v].c;
    if (up.val[v].k > 0) {
      bounded = false;
      continue;
    }
    if (least > up.val[v].c) {
      auto a = detail::policy_rows(ub, up, v);
      auto b = detail::policy_rows(lb, lo, v);
      a.insert(a.end(), b.begin(), b.end());
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      out.witness = a;
      return out;
    }
  }
  if (!bounded) {
    auto ray = solve_ray(homogenize(sys));
    if (!ray) throw Error(Errc::InvariantBreach, "unbounded system without a ray");
    out.tag = Tag::Unbounded;
    out.ray = *ray;
    return out;
  }
  out.tag = Tag::PointwiseMax;
  out.x.resize(n);
  for (int v = 0; v < n; ++v) out.x[v] = up.val[v].c;
  return out;
}

}  // namespace lxm
