#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace lxm {

enum class Errc {
  InvalidInput,
  NonpositivePrice,
  NotInMbb,
  NotSaturated,
  PhaseCapExceeded,
  InconsistentComponent,
  ConstructionFailed,
  NotZPlus,
  MalformedRow,
  CapExceeded,
  InvariantBreach,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::NonpositivePrice: return "NonpositivePrice";
    case Errc::NotInMbb: return "NotInMbb";
    case Errc::NotSaturated: return "NotSaturated";
    case Errc::PhaseCapExceeded: return "PhaseCapExceeded";
    case Errc::InconsistentComponent: return "InconsistentComponent";
    case Errc::ConstructionFailed: return "ConstructionFailed";
    case Errc::NotZPlus: return "NotZPlus";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::InvariantBreach: return "InvariantBreach";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// (agent, good), both 0-based. Good j is owned by agent j.
using Edge = std::pair<int, int>;

class Market {
 public:
  Market() = default;
  explicit Market(int n) : n_(n), u_(static_cast<std::size_t>(n) * n) {
    if (n < 1) throw Error(Errc::InvalidInput, "market needs n >= 1");
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }

  void set_utility(int i, int j, const Rational& u) {
    check(i, j);
    if (u <= 0) throw Error(Errc::InvalidInput, "utility must be positive");
    auto& slot = u_[idx(i, j)];
    if (slot == 0) edges_.insert(std::lower_bound(edges_.begin(), edges_.end(), Edge{i, j}), Edge{i, j});
    slot = u;
  }

  const Rational& u(int i, int j) const { return u_[idx(i, j)]; }
  bool has_edge(int i, int j) const { return u_[idx(i, j)] != 0; }
  // Sorted lexicographically by (agent, good).
  const std::vector<Edge>& edges() const { return edges_; }

  bool operator==(const Market& o) const { return n_ == o.n_ && u_ == o.u_; }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  void check(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw Error(Errc::InvalidInput, "index out of range");
  }

  int n_ = 0;
  std::vector<Rational> u_;
  std::vector<Edge> edges_;
};

class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(int n) : n_(n), mask_(static_cast<std::size_t>(n) * n, 0) {}
  EdgeSet(int n, const std::vector<Edge>& es) : EdgeSet(n) {
    for (const auto& e : es) insert(e.first, e.second);
  }

  int n() const { return n_; }
  bool contains(int i, int j) const { return mask_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  bool insert(int i, int j) {
    auto& b = mask_[static_cast<std::size_t>(i) * n_ + j];
    if (b) return false;
    b = 1;
    ++size_;
    return true;
  }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }

  std::vector<Edge> list() const {
    std::vector<Edge> out;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (contains(i, j)) out.emplace_back(i, j);
    return out;
  }

  bool subset_of(const EdgeSet& o) const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (contains(i, j) && !o.contains(i, j)) return false;
    return true;
  }

  bool operator==(const EdgeSet& o) const { return n_ == o.n_ && mask_ == o.mask_; }

 private:
  int n_ = 0;
  std::vector<char> mask_;
  int size_ = 0;
};

inline EdgeSet edge_set_of(const Market& mk) { return EdgeSet(mk.n(), mk.edges()); }

// Dense money flow; entry (i, j) is the money agent i spends on good j.
class Flow {
 public:
  Flow() = default;
  explicit Flow(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  int n() const { return n_; }
  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  Rational spent(int i) const {
    Rational s = 0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j);
    return s;
  }
  Rational sold(int j) const {
    Rational s = 0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, j);
    return s;
  }

  bool operator==(const Flow& o) const { return n_ == o.n_ && a_ == o.a_; }

 private:
  int n_ = 0;
  std::vector<Rational> a_;
};

struct Violation {
  enum class Kind {
    AgentWithoutEdge,
    GoodWithoutEdge,
    NonpositivePrice,
    NegativeFlowOutsideF,
    FlowOffMbb,
    FEdgeNotMbb,
    AgentOverspent,
    GoodOversold,
    GoodNotCleared,
    BudgetViolated,
    NegativeFlow,
    NonMBB,
  };
  Kind kind;
  int i = -1;  // agent or good index, 0-based
  int j = -1;

  bool operator==(const Violation& o) const { return kind == o.kind && i == o.i && j == o.j; }

  // Human readable, 1-based like the file formats.
  std::string str() const {
    auto a = [](int v) { return std::to_string(v + 1); };
    auto g = [](int v) { return "g" + std::to_string(v + 1); };
    switch (kind) {
      case Kind::AgentWithoutEdge: return "AgentWithoutEdge(" + a(i) + ")";
      case Kind::GoodWithoutEdge: return "GoodWithoutEdge(" + g(i) + ")";
      case Kind::NonpositivePrice: return "NonpositivePrice(" + g(i) + ")";
      case Kind::NegativeFlowOutsideF: return "NegativeFlowOutsideF(" + a(i) + "," + g(j) + ")";
      case Kind::FlowOffMbb: return "FlowOffMbb(" + a(i) + "," + g(j) + ")";
      case Kind::FEdgeNotMbb: return "FEdgeNotMbb(" + a(i) + "," + g(j) + ")";
      case Kind::AgentOverspent: return "AgentOverspent(" + a(i) + ")";
      case Kind::GoodOversold: return "GoodOversold(" + g(i) + ")";
      case Kind::GoodNotCleared: return "GoodNotCleared(" + g(i) + ")";
      case Kind::BudgetViolated: return "BudgetViolated(" + a(i) + ")";
      case Kind::NegativeFlow: return "NegativeFlow(" + a(i) + "," + g(j) + ")";
      case Kind::NonMBB: return "NonMBB(" + a(i) + "," + g(j) + ")";
    }
    return "?";
  }
};

inline std::vector<Violation> validate(const Market& mk) {
  std::vector<Violation> out;
  const int n = mk.n();
  std::vector<char> agent(n, 0), good(n, 0);
  for (const auto& [i, j] : mk.edges()) agent[i] = good[j] = 1;
  for (int i = 0; i < n; ++i)
    if (!agent[i]) out.push_back({Violation::Kind::AgentWithoutEdge, i});
  for (int j = 0; j < n; ++j)
    if (!good[j]) out.push_back({Violation::Kind::GoodWithoutEdge, j});
  return out;
}

struct ExistenceReport {
  bool exists = true;
  std::vector<int> witness;  // offending singleton SCC when !exists
  bool strongly_connected = false;
  std::vector<std::vector<int>> sccs;  // in topological order of the condensation (sources first)
};

// Tarjan on the desire digraph i -> j iff u_ij > 0.
inline std::vector<std::vector<int>> agent_sccs(const Market& mk) {
  const int n = mk.n();
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : mk.edges()) adj[i].push_back(j);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on(n, 0);
  std::vector<std::vector<int>> comps;
  int counter = 0;
  std::function<void(int)> dfs = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) dfs(v);
  std::reverse(comps.begin(), comps.end());
  return comps;
}

inline ExistenceReport existence_check(const Market& mk) {
  ExistenceReport r;
  r.sccs = agent_sccs(mk);
  r.strongly_connected = r.sccs.size() == 1;
  std::vector<int> bad;
  for (const auto& c : r.sccs)
    if (c.size() == 1 && !mk.has_edge(c[0], c[0])) bad.push_back(c[0]);
  if (!bad.empty()) {
    r.exists = false;
    r.witness = {*std::min_element(bad.begin(), bad.end())};
  }
  return r;
}

inline void require_positive(const Vec& p) {
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] <= 0) throw Error(Errc::NonpositivePrice, "price of good " + std::to_string(j + 1));
}

struct MbbResult {
  Vec alpha;
  EdgeSet edges;
};

inline MbbResult mbb(const Market& mk, const Vec& p) {
  require_positive(p);
  const int n = mk.n();
  MbbResult r{Vec(n, Rational(0)), EdgeSet(n)};
  std::vector<char> seen(n, 0);
  for (const auto& [i, j] : mk.edges()) {
    Rational q = mk.u(i, j) / p[j];
    if (!seen[i] || q > r.alpha[i]) r.alpha[i] = q;
    seen[i] = 1;
  }
  for (const auto& [i, j] : mk.edges())
    if (mk.u(i, j) / p[j] == r.alpha[i]) r.edges.insert(i, j);
  return r;
}

struct Surplus {
  Vec c;  // agents
  Vec s;  // goods
};

inline Surplus surplus(const Vec& p, const Flow& f) {
  const int n = f.n();
  Surplus r{Vec(n), Vec(n)};
  for (int i = 0; i < n; ++i) r.c[i] = p[i] - f.spent(i);
  for (int j = 0; j < n; ++j) r.s[j] = p[j] - f.sold(j);
  return r;
}

inline Rational norm1(const Vec& v) {
  Rational s = 0;
  for (const auto& x : v) s += abs(x);
  return s;
}

inline Rational norm_inf(const Vec& v) {
  Rational s = 0;
  for (const auto& x : v)
    if (abs(x) > s) s = abs(x);
  return s;
}

inline Rational norm2_sq(const Vec& v) {
  Rational s = 0;
  for (const auto& x : v) s += x * x;
  return s;
}

inline std::vector<Violation> is_f_allocation(const Market& mk, const EdgeSet& F, const Vec& p, const Flow& f) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  const int n = mk.n();
  bool positive = true;
  for (int j = 0; j < n; ++j)
    if (p[j] <= 0) {
      out.push_back({K::NonpositivePrice, j});
      positive = false;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (f(i, j) < 0 && !F.contains(i, j)) out.push_back({K::NegativeFlowOutsideF, i, j});
  if (positive) {
    auto mb = mbb(mk, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (f(i, j) != 0 && !mb.edges.contains(i, j)) out.push_back({K::FlowOffMbb, i, j});
        if (F.contains(i, j) && !mb.edges.contains(i, j)) out.push_back({K::FEdgeNotMbb, i, j});
      }
  }
  auto sp = surplus(p, f);
  for (int i = 0; i < n; ++i)
    if (sp.c[i] < 0) out.push_back({K::AgentOverspent, i});
  for (int j = 0; j < n; ++j)
    if (sp.s[j] < 0) out.push_back({K::GoodOversold, j});
  return out;
}

// ||s||_inf^n / prod p: the n-th power of the scale-free potential.
inline Rational phi_pow_n(const Vec& p, const Flow& f) {
  require_positive(p);
  auto sp = surplus(p, f);
  return pow(norm_inf(sp.s), static_cast<unsigned long>(p.size())) / product(p);
}

// Undirected components of the bipartite graph (agents + goods, F).
// Node k < n is agent k, node n + j is good j. Returns a label per node.
inline std::vector<int> f_components(const EdgeSet& F) {
  const int n = F.n();
  std::vector<int> parent(2 * n);
  for (int v = 0; v < 2 * n; ++v) parent[v] = v;
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (const auto& [i, j] : F.list()) {
    int a = find(i), b = find(n + j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> label(2 * n);
  for (int v = 0; v < 2 * n; ++v) label[v] = find(v);
  return label;
}

inline int f_component_count(const EdgeSet& F) {
  auto label = f_components(F);
  int c = 0;
  for (std::size_t v = 0; v < label.size(); ++v)
    if (label[v] == static_cast<int>(v)) ++c;
  return c;
}

}  // namespace lxm
