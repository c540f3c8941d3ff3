#pragma once

#include <optional>
#include <vector>

#include "dm.hpp"
#include "flow.hpp"
#include "market.hpp"
#include "oracle.hpp"
#include "price_boost.hpp"

namespace lxm {

struct CycleRecord {
  int block = 0;
  int f_size = 0;
  int components = 0;  // of F at the start of the cycle
  BoostResult::Tag boost = BoostResult::Tag::Approx;
  long dm_phases = 0;
  bool dm_ran = false;
  std::vector<Edge> added;  // original agent/good indices
};

struct SolveReport {
  enum class Status { Equilibrium, NoEquilibrium } status = Status::Equilibrium;
  std::vector<int> witness;  // offending singleton SCC when no equilibrium exists
  Vec p;
  Flow f;
  EdgeSet F;  // every revealed edge, original indices
  std::vector<CycleRecord> cycles;
  std::vector<std::vector<int>> blocks;  // strongly connected blocks solved separately
  std::vector<PhaseTrace> traces;
};

struct SolveOptions {
  std::function<void(const PhaseTrace&)> sink;
  bool keep_traces = false;
  std::optional<Vec> seed_prices;  // replaces the first boost output as DM start
};

namespace detail {

struct BlockResult {
  Vec p;
  Flow f;
  EdgeSet F;
  std::vector<CycleRecord> cycles;
};

// The revealed-edge loop on a strongly connected market.
inline BlockResult solve_block(const Market& mk, const SolveOptions& opt, std::vector<PhaseTrace>& traces,
                               const std::optional<Vec>& seed) {
  const int n = mk.n();
  BlockResult r;
  r.F = EdgeSet(n);
  Vec p;
  for (int cycle = 0;; ++cycle) {
    if (cycle > 2 * n) throw Error(Errc::InvariantBreach, "revealed-edge loop did not terminate");
    CycleRecord rec;
    rec.f_size = r.F.size();
    rec.components = f_component_count(r.F);
    Vec p_hat;
    if (cycle == 0 && seed) {
      p_hat = *seed;
      rec.boost = BoostResult::Tag::Approx;
    } else {
      auto br = boost(mk, r.F);
      rec.boost = br.tag;
      if (br.tag == BoostResult::Tag::FEquilibrium) {
        p = br.p;
        r.cycles.push_back(rec);
        break;
      }
      p_hat = br.p;
    }
    DMOptions dopt;
    dopt.sink = opt.sink;
    dopt.keep_traces = opt.keep_traces;
    auto dm = dm_run(mk, r.F, p_hat, dopt);
    rec.dm_ran = true;
    rec.dm_phases = dm.phases;
    for (auto& t : dm.traces) traces.push_back(std::move(t));
    p = dm.p;
    Rational s1 = norm1(surplus(p, dm.f).s);
    auto label = f_components(r.F);
    bool joins = false;
    for (const auto& [i, j] : mk.edges())
      if (!r.F.contains(i, j) && dm.f(i, j) > s1) {
        if (label[i] != label[n + j]) joins = true;
        rec.added.emplace_back(i, j);
      }
    for (const auto& [i, j] : rec.added) r.F.insert(i, j);
    r.cycles.push_back(rec);
    if (s1 == 0) break;
    if (!joins) throw Error(Errc::InvariantBreach, "DM returned without an edge joining two components");
  }
  r.p = p;
  r.f = final_flow(mk, p);
  return r;
}

}  // namespace detail

inline SolveReport solve(const Market& mk, const SolveOptions& opt = {}) {
  auto bad = validate(mk);
  if (!bad.empty()) throw Error(Errc::InvalidInput, "invalid market: " + bad[0].str());
  SolveReport rep;
  const int n = mk.n();
  rep.F = EdgeSet(n);
  auto ex = existence_check(mk);
  if (!ex.exists) {
    rep.status = SolveReport::Status::NoEquilibrium;
    rep.witness = ex.witness;
    return rep;
  }
  rep.blocks = ex.sccs;
  rep.p.assign(n, Rational(0));
  rep.f = Flow(n);

  // Blocks in topological order; cross-block edges only point to later
  // blocks, whose prices are scaled up until those edges are no better than
  // the buyer's current bang per buck.
  Vec alpha(n, Rational(0));
  std::vector<char> done(n, 0);
  for (std::size_t bi = 0; bi < ex.sccs.size(); ++bi) {
    const auto& block = ex.sccs[bi];
    const int k = static_cast<int>(block.size());
    std::vector<int> local(n, -1);
    for (int a = 0; a < k; ++a) local[block[a]] = a;
    Market sub(k);
    for (const auto& [i, j] : mk.edges())
      if (local[i] >= 0 && local[j] >= 0) sub.set_utility(local[i], local[j], mk.u(i, j));
    std::optional<Vec> seed;
    if (opt.seed_prices && ex.sccs.size() == 1) seed = opt.seed_prices;
    auto br = detail::solve_block(sub, opt, rep.traces, seed);

    Rational scale = 1;
    for (const auto& [i, j] : mk.edges())
      if (done[i] && local[j] >= 0) {
        Rational need = mk.u(i, j) / alpha[i] / br.p[local[j]];
        if (need > scale) scale = need;
      }
    for (int a = 0; a < k; ++a) {
      rep.p[block[a]] = br.p[a] * scale;
      for (int b = 0; b < k; ++b) rep.f(block[a], block[b]) = br.f(a, b) * scale;
    }
    auto mb = mbb(sub, br.p);
    for (int a = 0; a < k; ++a) {
      alpha[block[a]] = mb.alpha[a] / scale;
      done[block[a]] = 1;
    }
    for (const auto& [a, b] : br.F.list()) rep.F.insert(block[a], block[b]);
    for (auto c : br.cycles) {
      c.block = static_cast<int>(bi);
      for (auto& [a, b] : c.added) {
        a = block[a];
        b = block[b];
      }
      rep.cycles.push_back(c);
    }
  }

  Rational mn = *std::min_element(rep.p.begin(), rep.p.end());
  for (auto& v : rep.p) v /= mn;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep.f(i, j) /= mn;

  auto v = check_equilibrium(mk, rep.p, rep.f);
  if (!v.empty()) throw Error(Errc::InvariantBreach, "final allocation fails the checker: " + v[0].str());
  auto mb = mbb(mk, rep.p);
  for (const auto& [i, j] : rep.F.list())
    if (!mb.edges.contains(i, j)) throw Error(Errc::InvariantBreach, "revealed edge is not MBB at the equilibrium");
  return rep;
}

}  // namespace lxm
