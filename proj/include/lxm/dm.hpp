#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "flow.hpp"
#include "market.hpp"

namespace lxm {

inline constexpr long kCRat = 414;

// 1 + 1/(C n^3): the per-phase cap on the price multiplier.
inline Rational price_rise_threshold(int n) { return Rational(1) + Rational(1) / (kCRat * n * n * n); }

inline long dm_phase_cap(int n) {
  const double ln = std::log(static_cast<double>(n));
  const double c = static_cast<double>(kCRat);
  return static_cast<long>(std::ceil(4.0 * 81.0 * c * c * std::pow(n, 6) * ln * ln)) + n;
}

// c sorted nonincreasing. Smallest l (1-based) with c_l / c_{l+1} > 1 + 1/n,
// a zero after a positive entry counting as an infinite ratio; n if none.
inline int select_set_s(const Vec& c) {
  const int n = static_cast<int>(c.size());
  Rational bound = Rational(1) + Rational(1) / n;
  for (int l = 1; l < n; ++l) {
    if (c[l] == 0) {
      if (c[l - 1] > 0) return l;
      continue;
    }
    if (c[l - 1] / c[l] > bound) return l;
  }
  return n;
}

enum class DMEvent { E1Absorbed, E1Break, E2, E3 };

inline const char* dm_event_name(DMEvent e) {
  switch (e) {
    case DMEvent::E1Absorbed: return "E1Absorbed";
    case DMEvent::E1Break: return "E1Break";
    case DMEvent::E2: return "E2";
    case DMEvent::E3: return "E3";
  }
  return "?";
}

struct EventChoice {
  Rational x;
  int kind = 3;  // 1, 2 or 3
  int a = -1, b = -1;
};

namespace detail {

// Surplus of agent i as A_i + B_i x while prices on Gamma and flows S x Gamma
// are multiplied by x.
inline void surplus_lines(const Vec& p, const Flow& f, const std::vector<char>& inS, const std::vector<char>& inG,
                          Vec& A, Vec& B) {
  const int n = f.n();
  A.assign(n, Rational(0));
  B.assign(n, Rational(0));
  for (int i = 0; i < n; ++i) {
    Rational own_fixed = inG[i] ? Rational(0) : p[i];
    Rational own_scaled = inG[i] ? p[i] : Rational(0);
    Rational spent = f.spent(i);
    if (inS[i]) {
      A[i] = own_fixed;
      B[i] = own_scaled - spent;
    } else {
      A[i] = own_fixed - spent;
      B[i] = own_scaled;
    }
  }
}

// Events 1 and 2 only; kind 0 with x unset when neither can ever fire.
inline EventChoice next_event(const Market& mk, const Vec& p, const Flow& f, const std::vector<char>& inS,
                              const std::vector<char>& inG, const std::optional<Rational>& e3) {
  const int n = mk.n();
  EventChoice best;
  best.kind = 0;
  if (e3) {
    best.x = *e3;
    best.kind = 3;
  }

  Vec A, B;
  surplus_lines(p, f, inS, inG, A, B);
  auto consider = [&](const Rational& x, int kind, int a, int b) {
    if (best.kind == 0 || x < best.x || (x == best.x && kind > best.kind)) best = {x, kind, a, b};
  };
  for (int i = 0; i < n; ++i) {
    if (!inS[i]) continue;
    for (int k = -1; k < n; ++k) {
      if (k >= 0 && inS[k]) continue;
      Rational Ak = k < 0 ? Rational(0) : A[k];
      Rational Bk = k < 0 ? Rational(0) : B[k];
      Rational slope = B[i] - Bk;
      if (slope >= 0) continue;
      consider(Rational((A[i] - Ak) / (-slope)), 2, -1, -1);
    }
  }

  std::optional<EventChoice> e1;
  for (int a = 0; a < n; ++a) {
    if (!inS[a]) continue;
    Rational rg = 0, ro = 0;
    bool has_g = false, has_o = false;
    for (int j = 0; j < n; ++j) {
      if (!mk.has_edge(a, j)) continue;
      Rational r = mk.u(a, j) / p[j];
      if (inG[j]) {
        if (!has_g || r > rg) rg = r;
        has_g = true;
      } else {
        if (!has_o || r > ro) ro = r;
        has_o = true;
      }
    }
    if (!has_o) continue;
    Rational x = has_g && rg > ro ? Rational(rg / ro) : Rational(1);
    for (int b = 0; b < n; ++b) {
      if (inG[b] || !mk.has_edge(a, b) || mk.u(a, b) / p[b] != ro) continue;
      if (!e1 || x < e1->x) e1 = EventChoice{x, 1, a, b};
      break;
    }
  }
  if (e1 && (best.kind == 0 || e1->x < best.x)) best = *e1;
  return best;
}

}  // namespace detail

// Smallest multiplier x >= 1 for prices on Gamma and flows S x Gamma at which
// an event fires. At equal x, Event 3 beats Event 2 beats Event 1.
inline EventChoice min_event_x(const Market& mk, const Vec& p, const Flow& f, const std::vector<char>& inS,
                               const std::vector<char>& inG, const Rational& gamma) {
  return detail::next_event(mk, p, f, inS, inG, Rational(price_rise_threshold(mk.n()) / gamma));
}

struct DMStep {
  Rational x;
  DMEvent event;
  int a = -1, b = -1;
  Rational s1_after;
};

struct PhaseTrace {
  enum class Kind { PriceRise, Balancing } kind = Kind::Balancing;
  long index = 0;
  std::vector<int> S;
  std::vector<int> gamma_goods;
  Rational x;  // multiplier of the terminating iteration
  DMEvent event = DMEvent::E2;
  int a = -1, b = -1;
  Vec p_before, p_after;
  Rational prod_before, prod_after;
  Rational c2_before, c2_after;  // on the balanced flows at the phase boundaries
  Rational s1_before, s1_after;
  std::vector<DMStep> steps;
  std::size_t max_bits = 0;  // largest price numerator/denominator after the phase
  long repeat = 1;           // > 1: this many identical single-step price-rise phases
  EdgeSet F;                 // revealed edges during the run
  Flow f_after;              // balanced flow at the end of the phase
};

struct DMOutcome {
  enum class Result { FEquilibrium, Revealed } result = Result::FEquilibrium;
  Vec p;
  Flow f;
  Edge revealed{-1, -1};
  long phases = 0;
  std::vector<PhaseTrace> traces;
};

struct DMOptions {
  std::function<void(const PhaseTrace&)> sink;
  bool keep_traces = true;
  long phase_cap = -1;  // -1: use dm_phase_cap(n)
  bool fast_forward = true;
};

inline std::optional<Edge> revealed_edge(const Market& mk, const EdgeSet& F, const Flow& f, const Rational& s1) {
  const int n = mk.n();
  auto label = f_components(F);
  for (const auto& [i, j] : mk.edges())
    if (!F.contains(i, j) && f(i, j) > s1 && label[i] != label[n + j]) return Edge{i, j};
  return std::nullopt;
}

namespace detail {

// Largest k >= 0 with x^k < b (strict) or x^k <= b, for x > 1; -1 if none.
template <class Pow>
long max_power_below(const Rational& x, const Rational& b, bool strict, Pow&& pw) {
  auto ok = [&](long k) {
    int c = cmp(pw(k), b);
    return strict ? c < 0 : c <= 0;
  };
  if (b <= 0) return -1;
  auto ln = [](const Rational& r) {
    long en, ed;
    double mn = mpz_get_d_2exp(&en, r.get_num_mpz_t());
    double md = mpz_get_d_2exp(&ed, r.get_den_mpz_t());
    return std::log(mn / md) + static_cast<double>(en - ed) * std::log(2.0);
  };
  const double lx = std::log1p(Rational(x - 1).get_d());
  long k = std::max(0L, static_cast<long>(std::floor(ln(b) / lx)));
  while (k > 0 && !ok(k)) --k;
  if (!ok(k)) return -1;
  while (ok(k + 1)) ++k;
  return k;
}

inline long max_power_below(const Rational& x, const Rational& b, bool strict) {
  return max_power_below(x, b, strict, [&](long k) { return Rational(pow(x, static_cast<unsigned long>(k))); });
}

// Rational with the smallest denominator strictly inside (lo, hi), 0 <= lo < hi.
inline Rational simplest_between(const Rational& lo, const Rational& hi) {
  Integer a;
  mpz_fdiv_q(a.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
  if (Rational(a + 1) < hi) return Rational(a + 1);
  Rational fl = lo - Rational(a);
  Rational fh = hi - Rational(a);
  if (fl == 0) {
    Integer q;
    Rational inv = Rational(1) / fh;
    mpz_fdiv_q(q.get_mpz_t(), inv.get_num_mpz_t(), inv.get_den_mpz_t());
    return Rational(a) + Rational(1) / Rational(q + 1);
  }
  return Rational(a) + Rational(1) / simplest_between(Rational(1) / fh, Rational(1) / fl);
}

// a + b X
struct Affine {
  Rational a, b;
  Rational at(const Rational& X) const { return a + b * X; }
  Affine operator-(const Affine& o) const { return {a - o.a, b - o.b}; }
  Affine operator+(const Affine& o) const { return {a + o.a, b + o.b}; }
  Affine operator*(const Rational& k) const { return {a * k, b * k}; }
};

struct SteadyRun {
  long k = 0;
  Flow f;  // balanced flow at the first phase start after the run
};

// Consecutive single-step price-rise phases from a phase start (p, f, S,
// Gamma) are determined by the balanced flow along the ray X -> p(X), Gamma
// prices times X, sampled at X = x_max^m. That flow is piecewise affine in X.
// Each piece is rebuilt from two balanced flows at simple rationals inside it
// and accepted on the open interval where no flow, surplus, surplus
// comparison, S-selection ratio or MBB tie changes sign: valid at the anchor
// with a fixed sign pattern means balanced, with the same S and Gamma,
// throughout. Phase starts then only need the Event 1/2 and termination
// inequalities, which are affine in X on each piece.
class SteadyProbe {
 public:
  SteadyProbe(const Market& mk, const EdgeSet& F, const Vec& p, const std::vector<char>& inS,
              const std::vector<char>& inG)
      : mk_(mk), F_(F), p_(p), inS_(inS), inG_(inG), n_(mk.n()), xm_(price_rise_threshold(mk.n())) {
    label_ = f_components(F);
  }

  SteadyRun run(const Flow& f0) {
    const int n = n_;
    EventChoice ev = next_event(mk_, p_, f0, inS_, inG_, std::nullopt);
    if (ev.kind == 0) throw Error(Errc::InvariantBreach, "price rise with no terminating event");
    if (ev.x < xm_ * xm_) return {};

    long m = 1;  // next phase start to cover
    long k = 0;
    Rational Xm = xm_;
    Rational Y = xm_;
    std::vector<Affine> line;
    for (int piece = 0;; ++piece) {
      if (piece > 4 * n * n + 16) break;
      Rational Y2 = simplest_between(Y, Rational(Y + (xm_ - 1) / 2));
      auto fy = flow_at(Y);
      if (!fy) break;
      auto fy2 = flow_at(Y2);
      if (!fy2) break;
      std::vector<Affine> cand(n * n);
      const Rational dY = Y2 - Y;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Rational d = ((*fy2)(i, j) - (*fy)(i, j)) / dY;
          cand[i * n + j] = Affine{(*fy)(i, j) - d * Y, d};
        }
      std::optional<Rational> lo, hi;
      if (!window(cand, Y, lo, hi)) break;
      if (lo && Xm <= *lo) break;
      if (hi && Xm >= *hi) break;
      line = std::move(cand);
      const long last = hi ? power_below(*hi, true) : std::numeric_limits<long>::max();
      long stop = first_failure(line, m, last);
      if (stop <= last) {
        k = stop;
        break;
      }
      if (last == std::numeric_limits<long>::max()) throw Error(Errc::InvariantBreach, "price rise never ends");
      k = last;
      m = last + 1;
      Xm = X(m);
      Y = simplest_between(*hi, Xm);
    }
    // Phase starts 1 .. k are balanced and phases 0 .. k-1 are single
    // Event-3 steps; phase k goes to the normal loop.
    if (k < 2 || line.empty()) return {};
    const Rational Xk = X(k);
    SteadyRun out{k, Flow(n)};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.f(i, j) = line[i * n + j].at(Xk);
    return out;
  }

 private:
  const Rational& X(long j) {
    auto it = pw_.find(j);
    if (it == pw_.end()) it = pw_.emplace(j, Rational(pow(xm_, static_cast<unsigned long>(j)))).first;
    return it->second;
  }
  long power_below(const Rational& b, bool strict) {
    return max_power_below(xm_, b, strict, [&](long j) -> const Rational& { return X(j); });
  }
  // log_{x_max} b, rounded down, from doubles; off by at most one.
  long estimate(const Rational& b) const {
    long en, ed;
    double mn = mpz_get_d_2exp(&en, b.get_num_mpz_t());
    double md = mpz_get_d_2exp(&ed, b.get_den_mpz_t());
    double lb = std::log(mn / md) + static_cast<double>(en - ed) * std::log(2.0);
    return static_cast<long>(std::floor(lb / std::log1p(Rational(xm_ - 1).get_d())));
  }

  Vec prices(const Rational& X) const {
    Vec q = p_;
    for (int j = 0; j < n_; ++j)
      if (inG_[j]) q[j] *= X;
    return q;
  }

  // Balanced flow at p(X) if it keeps S and Gamma.
  std::optional<Flow> flow_at(const Rational& X) const {
    const int n = n_;
    Vec q = prices(X);
    Flow g = balanced_flow(mk_, F_, q);
    Vec c = surplus(q, g).c;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return c[x] > c[y]; });
    Vec sorted(n);
    for (int r = 0; r < n; ++r) sorted[r] = c[order[r]];
    const int l = select_set_s(sorted);
    for (int r = 0; r < n; ++r)
      if ((r < l) != static_cast<bool>(inS_[order[r]])) return std::nullopt;
    std::vector<char> G(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (inS_[i] && g(i, j) != 0) G[j] = 1;
        if (!inS_[i] && inG_[j] && g(i, j) != 0) return std::nullopt;
      }
    if (G != inG_) return std::nullopt;
    return g;
  }

  Affine price(int j) const { return inG_[j] ? Affine{0, p_[j]} : Affine{p_[j], 0}; }

  struct Lines {
    std::vector<Affine> spent, sold, c, s;
    Affine s1{0, 0};
  };
  Lines lines(const std::vector<Affine>& fl) const {
    const int n = n_;
    Lines L;
    L.spent.assign(n, Affine{0, 0});
    L.sold.assign(n, Affine{0, 0});
    L.c.resize(n);
    L.s.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        L.spent[i] = L.spent[i] + fl[i * n + j];
        L.sold[j] = L.sold[j] + fl[i * n + j];
      }
    for (int k = 0; k < n; ++k) {
      L.c[k] = price(k) - L.spent[k];
      L.s[k] = price(k) - L.sold[k];
      L.s1 = L.s1 + L.s[k];
    }
    return L;
  }

  // Open interval around Y on which every sign in the pattern is constant.
  bool window(const std::vector<Affine>& fl, const Rational& Y, std::optional<Rational>& lo,
              std::optional<Rational>& hi) const {
    const int n = n_;
    bool ok = true;
    auto constant = [&](const Affine& g) {
      if (g.at(Y) == 0) {
        if (g.a != 0 || g.b != 0) ok = false;
        return;
      }
      if (g.b == 0) return;
      Rational r = -g.a / g.b;
      if (r > Y && (!hi || r < *hi)) hi = r;
      if (r < Y && (!lo || r > *lo)) lo = r;
    };
    Lines L = lines(fl);
    for (const auto& g : fl) constant(g);
    std::vector<Rational> cY(n);
    for (int i = 0; i < n; ++i) {
      constant(L.c[i]);
      constant(L.s[i]);
      constant(L.spent[i]);
      constant(L.sold[i]);
      for (int k = i + 1; k < n; ++k) constant(L.c[i] - L.c[k]);
      cY[i] = L.c[i].at(Y);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return cY[x] > cY[y]; });
    const Rational bound = Rational(1) + Rational(1) / n;
    for (int r = 0; r + 1 < n; ++r) constant(L.c[order[r]] - L.c[order[r + 1]] * bound);
    for (int a = 0; a < n; ++a) {
      auto [rg, ro] = best_ratios(a);
      if (rg && ro) constant(Affine{*rg, -*ro});
    }
    return ok;
  }

  std::pair<std::optional<Rational>, std::optional<Rational>> best_ratios(int a) const {
    std::optional<Rational> rg, ro;
    for (int j = 0; j < n_; ++j) {
      if (!mk_.has_edge(a, j)) continue;
      Rational r = mk_.u(a, j) / p_[j];
      auto& slot = inG_[j] ? rg : ro;
      if (!slot || r > *slot) slot = r;
    }
    return {rg, ro};
  }

  // First index j in [m, last] whose phase start fails to be a non-terminal
  // start of a single Event-3 step; last + 1 if none.
  long first_failure(const std::vector<Affine>& fl, long m, long last) {
    const int n = n_;
    long first = last == std::numeric_limits<long>::max() ? last : last + 1;
    const Rational Xm = X(m);
    // g(X_j) >= 0 (or > 0) required for every j >= m.
    auto need = [&](const Affine& g, bool strict) {
      Rational v = g.at(Xm);
      if (strict ? v <= 0 : v < 0) {
        first = m;
        return;
      }
      if (g.b >= 0) return;
      Rational r = -g.a / g.b;
      if (first != std::numeric_limits<long>::max() && estimate(r) > first + 1) return;
      long j = power_below(r, strict) + 1;
      if (j < first) first = j;
    };
    Lines L = lines(fl);
    need(L.s1, true);
    for (const auto& [i, j] : mk_.edges())
      if (!F_.contains(i, j) && label_[i] != label_[n + j]) need(L.s1 - fl[i * n + j], false);
    // Event 2 within the phase: surplus lines A + B x evaluated at x = x_max.
    std::vector<Affine> A(n), B(n);
    for (int i = 0; i < n; ++i) {
      Affine fixed = inG_[i] ? Affine{0, 0} : Affine{p_[i], 0};
      Affine scaled = inG_[i] ? Affine{0, p_[i]} : Affine{0, 0};
      if (inS_[i]) {
        A[i] = fixed;
        B[i] = scaled - L.spent[i];
      } else {
        A[i] = fixed - L.spent[i];
        B[i] = scaled;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!inS_[i]) continue;
      need(A[i] + B[i] * xm_, false);
      for (int k = 0; k < n; ++k)
        if (!inS_[k]) need((A[i] - A[k]) + (B[i] - B[k]) * xm_, false);
      // Event 1: best outside ratio stays below the scaled Gamma ratio.
      auto [rg, ro] = best_ratios(i);
      if (rg && ro) need(Affine{*rg, -(*ro * xm_)}, false);
    }
    return first;
  }

  const Market& mk_;
  const EdgeSet& F_;
  const Vec& p_;
  const std::vector<char>& inS_;
  const std::vector<char>& inG_;
  const int n_;
  const Rational xm_;
  std::vector<int> label_;
  std::map<long, Rational> pw_;
};

}  // namespace detail

inline DMOutcome dm_run(const Market& mk, const EdgeSet& F, const Vec& p_hat, const DMOptions& opt = {}) {
  const int n = mk.n();
  const long cap = opt.phase_cap >= 0 ? opt.phase_cap : dm_phase_cap(n);
  DMOutcome out;
  Vec p = p_hat;
  Flow f = balanced_flow(mk, F, p);
  auto finish_trace = [&](PhaseTrace& tr, const std::vector<char>& inS, const std::vector<char>& inG) {
    for (int i = 0; i < n; ++i)
      if (inS[i]) tr.S.push_back(i);
    for (int j = 0; j < n; ++j)
      if (inG[j]) tr.gamma_goods.push_back(j);
    auto sp2 = surplus(p, f);
    tr.p_after = p;
    tr.F = F;
    tr.f_after = f;
    tr.prod_after = product(p);
    tr.c2_after = norm2_sq(sp2.c);
    tr.s1_after = norm1(sp2.s);
    for (const auto& v : p) tr.max_bits = std::max({tr.max_bits, bit_length(v)});
    if (opt.sink) opt.sink(tr);
    if (opt.keep_traces) out.traces.push_back(std::move(tr));
  };

  while (true) {
    auto sp = surplus(p, f);
    Rational s1 = norm1(sp.s);
    if (s1 == 0) {
      out.result = DMOutcome::Result::FEquilibrium;
      break;
    }
    if (auto e = revealed_edge(mk, F, f, s1)) {
      out.result = DMOutcome::Result::Revealed;
      out.revealed = *e;
      break;
    }
    if (out.phases >= cap) throw Error(Errc::PhaseCapExceeded, "DM exceeded " + std::to_string(cap) + " phases");

    PhaseTrace tr;
    tr.index = out.phases;
    tr.p_before = p;
    tr.prod_before = product(p);
    tr.c2_before = norm2_sq(sp.c);
    tr.s1_before = s1;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return sp.c[x] > sp.c[y]; });
    Vec sorted(n);
    for (int r = 0; r < n; ++r) sorted[r] = sp.c[order[r]];
    const int l = select_set_s(sorted);
    std::vector<char> inS(n, 0), inG(n, 0);
    for (int r = 0; r < l; ++r) inS[order[r]] = 1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (inS[i] && f(i, j) != 0) inG[j] = 1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!inS[i] && inG[j] && f(i, j) != 0)
          throw Error(Errc::InvariantBreach, "balanced flow sends money from outside S into Gamma(S)");

    if (opt.fast_forward) {
      auto run = detail::SteadyProbe(mk, F, p, inS, inG).run(f);
      if (const long k = run.k; k > 0) {
        if (out.phases + k > cap) throw Error(Errc::PhaseCapExceeded, "DM exceeded " + std::to_string(cap) + " phases");
        const Rational xm = price_rise_threshold(n);
        const Rational X = pow(xm, static_cast<unsigned long>(k));
        f = std::move(run.f);
        for (int j = 0; j < n; ++j)
          if (inG[j]) p[j] *= X;
        tr.repeat = k;
        tr.kind = PhaseTrace::Kind::PriceRise;
        tr.x = xm;
        tr.event = DMEvent::E3;
        tr.steps.push_back({xm, DMEvent::E3, -1, -1, norm1(surplus(p, f).s)});
        out.phases += k;
        finish_trace(tr, inS, inG);
        continue;
      }
    }

    Rational gamma = 1;
    for (int iter = 1;; ++iter) {
      if (iter > n) throw Error(Errc::InvariantBreach, "more than n iterations in a DM phase");
      EventChoice ev = min_event_x(mk, p, f, inS, inG, gamma);
      const Rational& x = ev.x;
      for (int j = 0; j < n; ++j) {
        if (!inG[j]) continue;
        p[j] *= x;
        for (int i = 0; i < n; ++i)
          if (inS[i]) f(i, j) *= x;
      }
      DMStep step{x, DMEvent::E2, ev.a, ev.b, Rational(0)};
      bool stop = true;
      if (ev.kind == 1) {
        auto c = surplus(p, f).c;
        const int a = ev.a, b = ev.b;
        Vec ct = c;
        ct[a] = c[a] - p[b];
        bool to_outside_f = false;
        for (int i = 0; i < n; ++i)
          if (!inS[i]) {
            ct[i] = c[i] + f(i, b);
            if (F.contains(i, b)) to_outside_f = true;
          }
        std::optional<Rational> min_in, max_out;
        for (int i = 0; i < n; ++i) {
          if (inS[i] && (!min_in || ct[i] < *min_in)) min_in = ct[i];
          if (!inS[i] && (!max_out || ct[i] > *max_out)) max_out = ct[i];
        }
        Rational floor = max_out && *max_out > 0 ? *max_out : Rational(0);
        if (to_outside_f || *min_in <= floor) {
          step.event = DMEvent::E1Break;
        } else {
          for (int i = 0; i < n; ++i) f(i, b) = 0;
          f(a, b) = p[b];
          inG[b] = 1;
          gamma *= x;
          step.event = DMEvent::E1Absorbed;
          stop = false;
        }
      } else {
        step.event = ev.kind == 2 ? DMEvent::E2 : DMEvent::E3;
      }
      step.s1_after = norm1(surplus(p, f).s);
      tr.steps.push_back(step);
      if (stop) {
        tr.x = x;
        tr.event = step.event;
        tr.a = ev.a;
        tr.b = ev.b;
        tr.kind = step.event == DMEvent::E3 ? PhaseTrace::Kind::PriceRise : PhaseTrace::Kind::Balancing;
        break;
      }
    }

    f = balanced_flow(mk, F, p);
    ++out.phases;
    finish_trace(tr, inS, inG);
  }
  out.p = p;
  out.f = f;
  return out;
}

}  // namespace lxm
