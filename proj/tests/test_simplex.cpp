#include <gtest/gtest.h>

#include <lxm/gen.hpp>
#include <lxm/m2vpi.hpp>
#include <lxm/price_boost.hpp>
#include <lxm/simplex.hpp>

#include "fixtures.hpp"

using namespace lxm;
using fx::q;

namespace {

LPRow row(std::initializer_list<Rational> a, Sense s, Rational rhs) { return {Vec(a), s, rhs}; }

bool satisfies(const LPRow& r, const Vec& x) {
  Rational v = 0;
  for (std::size_t k = 0; k < x.size(); ++k) v += r.a[k] * x[k];
  switch (r.sense) {
    case Sense::Le: return v <= r.rhs;
    case Sense::Ge: return v >= r.rhs;
    case Sense::Eq: return v == r.rhs;
  }
  return false;
}

// Best vertex of a bounded two-variable LP with x >= 0: every pair of tight
// constraints (rows or axes) is intersected and feasible points are scored.
std::optional<Rational> vertex_optimum(const LPProblem& lp) {
  std::vector<LPRow> lines = lp.rows;
  lines.push_back(row({1, 0}, Sense::Ge, 0));
  lines.push_back(row({0, 1}, Sense::Ge, 0));
  std::optional<Rational> best;
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const Vec &u = lines[a].a, &v = lines[b].a;
      Rational det = u[0] * v[1] - u[1] * v[0];
      if (det == 0) continue;
      Vec x{(lines[a].rhs * v[1] - u[1] * lines[b].rhs) / det, (u[0] * lines[b].rhs - lines[a].rhs * v[0]) / det};
      bool ok = true;
      for (const auto& r : lines) ok = ok && satisfies(r, x);
      if (!ok) continue;
      Rational val = lp.objective[0] * x[0] + lp.objective[1] * x[1];
      if (!best || val > *best) best = val;
    }
  return best;
}

}  // namespace

TEST(LpSolve, SingleBound) {
  LPProblem lp{1, fx::vec({1}), {row({1}, Sense::Le, 5)}, {}};
  auto r = lp_solve(lp);
  ASSERT_EQ(r.status, LPResult::Status::Optimal);
  EXPECT_EQ(r.value, 5);
  EXPECT_EQ(r.x, fx::vec({5}));
}

TEST(LpSolve, Infeasible) {
  LPProblem lp{1, fx::vec({1}), {row({-1}, Sense::Le, -1), row({1}, Sense::Le, 0)}, {}};
  EXPECT_EQ(lp_solve(lp).status, LPResult::Status::Infeasible);
}

TEST(LpSolve, Unbounded) {
  LPProblem lp{2, fx::vec({1, 1}), {row({1, -1}, Sense::Le, 1)}, {}};
  EXPECT_EQ(lp_solve(lp).status, LPResult::Status::Unbounded);
}

TEST(LpSolve, EqualityAndLowerBounds) {
  // max x + 2y, x + y = 4, x >= 1, y >= -1, y <= 2.
  LPProblem lp{2, fx::vec({1, 2}), {row({1, 1}, Sense::Eq, 4), row({0, 1}, Sense::Le, 2)}, fx::vec({1, -1})};
  auto r = lp_solve(lp);
  ASSERT_EQ(r.status, LPResult::Status::Optimal);
  EXPECT_EQ(r.x, fx::vec({2, 2}));
  EXPECT_EQ(r.value, 6);
}

TEST(LpSolve, DegenerateVertexTerminates) {
  // Several constraints tight at the optimum (1, 1).
  LPProblem lp{2, fx::vec({1, 1}),
               {row({1, 0}, Sense::Le, 1), row({0, 1}, Sense::Le, 1), row({1, 1}, Sense::Le, 2),
                row({2, 1}, Sense::Le, 3), row({1, 2}, Sense::Le, 3)},
               {}};
  auto r = lp_solve(lp);
  ASSERT_EQ(r.status, LPResult::Status::Optimal);
  EXPECT_EQ(r.value, 2);
}

TEST(LpSolve, RejectsOversizedProblems) {
  LPProblem lp;
  lp.nvars = kLpMaxVars + 1;
  lp.objective.assign(lp.nvars, Rational(0));
  try {
    lp_solve(lp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CapExceeded);
  }
}

TEST(LpSolve, RandomTwoVariableLpsMatchVertexEnumeration) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    LPProblem lp;
    lp.nvars = 2;
    lp.objective = {Rational(rng.range(-3, 3)), Rational(rng.range(-3, 3))};
    lp.rows.push_back(row({1, 1}, Sense::Le, rng.range(1, 10)));
    const int extra = static_cast<int>(rng.range(1, 4));
    for (int k = 0; k < extra; ++k) {
      Sense s = rng.below(4) == 0 ? Sense::Ge : Sense::Le;
      lp.rows.push_back(row({Rational(rng.range(-4, 4)), Rational(rng.range(-4, 4))}, s, rng.range(-3, 6)));
    }
    auto r = lp_solve(lp);
    auto best = vertex_optimum(lp);
    if (!best) {
      EXPECT_EQ(r.status, LPResult::Status::Infeasible) << seed;
      continue;
    }
    ASSERT_EQ(r.status, LPResult::Status::Optimal) << seed;
    EXPECT_EQ(r.value, *best) << seed;
    for (const auto& rw : lp.rows) EXPECT_TRUE(satisfies(rw, r.x)) << seed;
  }
}

TEST(LpSolve, AgreesWithPointwiseMaxOnFigure1System) {
  auto mk = fx::figure1();
  auto F = fx::figure1_F();
  auto pf = build_pf(mk, F, decompose(mk, F));
  auto sys = assemble_qf(pf, approx(pf.M, pf.gamma, pf.lambda));
  // Components 4 and 5 only trade with each other; cap one of them.
  sys.add({{3, Rational(1)}}, 10);
  auto mx = solve_max(sys);
  ASSERT_EQ(mx.tag, M2VPIOutcome::Tag::PointwiseMax);
  LPProblem lp;
  lp.nvars = sys.nvars;
  lp.objective.assign(sys.nvars, Rational(1));
  for (const auto& r : sys.rows) {
    Vec a(sys.nvars, Rational(0));
    if (r.pos >= 0) a[r.pos] += r.alpha;
    if (r.neg >= 0) a[r.neg] += r.beta;
    lp.rows.push_back({a, Sense::Le, r.c});
  }
  auto res = lp_solve(lp);
  ASSERT_EQ(res.status, LPResult::Status::Optimal);
  EXPECT_EQ(res.x, mx.x);
  EXPECT_EQ(res.value, sum(mx.x));
}
