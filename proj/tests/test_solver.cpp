#include <doctest.h>

#include "toric/solver.hpp"

#include <cmath>

using namespace toric;

namespace {

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values)
    if (!std::isnan(v)) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> bump_state(const DiscreteAbreu& p, double amp) {
  std::vector<double> q(p.unknowns());
  for (int u = 0; u < p.unknowns(); ++u)
    q[u] = amp * std::exp(-(p.points()[u] - Vec2(0.5, 0.5)).squaredNorm() / (2 * 0.15 * 0.15));
  return q;
}

NodeFunction constant(double c) {
  return [c](const Vec2&) { return c; };
}

}  // namespace

TEST_CASE("residual at the Guillemin potential") {
  const Polytope sq = standard_polytope("square"), tri = standard_polytope("simplex");
  const auto zs = std::make_shared<SmoothPart>(SmoothPart::zeros(polytope_grid(sq, 32)));
  const auto zt = std::make_shared<SmoothPart>(SmoothPart::zeros(polytope_grid(tri, 32)));
  const double clamp = 3.0 / 32;
  CHECK(max_abs(residual(sq, zs, constant(4), clamp, AbreuRoute::Jet)) < 1e-9);
  CHECK(max_abs(residual(tri, zt, constant(6), clamp, AbreuRoute::Jet)) < 1e-9);
  const ScalarField r = residual(sq, zs, constant(5), clamp, AbreuRoute::Jet);
  int n = 0;
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    const Vec2 p = r.grid.node(static_cast<int>(k) / r.grid.ny, static_cast<int>(k) % r.grid.ny);
    if (sq.min_facet_value(p) >= clamp) {
      CHECK(r.values[k] == doctest::Approx(-1.0).epsilon(1e-9));
      ++n;
    } else {
      CHECK(std::isnan(r.values[k]));
    }
  }
  CHECK(n > 600);
}

TEST_CASE("residual reports non-convex nodes") {
  const Polytope sq = standard_polytope("square");
  const auto psi = std::make_shared<SmoothPart>(
      SmoothPart::sample(polytope_grid(sq, 16), [](const Vec2& x) { return -10.0 * (x - Vec2(0.5, 0.5)).squaredNorm(); }));
  CHECK_THROWS_WITH_AS(residual(sq, psi, constant(4), 0.2), doctest::Contains("not positive definite"), DomainError);
}

TEST_CASE("discrete functional: psi = 0 is nearly critical for S(v) and serial equals parallel") {
  const Polytope P = standard_polytope("hirzebruch");
  const auto v = guillemin(P);
  const NodeFunction Sv = [&](const Vec2& p) { return abreu_scalar(*v, p, {AbreuRoute::Jet, 0.0}); };
  // band nodes are exact; deep nodes carry the discretization error of the
  // operator, second order on a fixed interior region
  double prev_deep = 0.0, prev_core = 0.0;
  for (int cells : {24, 48}) {
    DiscreteAbreu d(P, cells);
    d.set_target(Sv, false);
    const std::vector<double> g = d.gradient(std::vector<double>(d.unknowns(), 0.0));
    double deep = 0.0, band = 0.0, core = 0.0;
    for (int u = 0; u < d.unknowns(); ++u) {
      const double r = std::abs(g[u]) / d.weight();
      if (!d.deep()[u]) band = std::max(band, r);
      else deep = std::max(deep, r);
      if (P.min_facet_value(d.points()[u]) >= 0.25) core = std::max(core, r);
    }
    CHECK(band < 1e-9);
    CHECK(deep < 5e-3);
    if (prev_deep > 0.0) {
      CHECK(deep < prev_deep);
      CHECK(core < prev_core / 3.0);
    }
    prev_deep = deep;
    prev_core = core;
  }
  DiscreteAbreu d(P, 24);
  d.set_target(Sv, false);
  const std::vector<double> q = bump_state(d, 1e-2);
  CHECK(d.F(q, Exec::Serial) == d.F(q, Exec::Parallel));
  CHECK(d.gradient(q, Exec::Serial) == d.gradient(q, Exec::Parallel));
}

TEST_CASE("gradient and Hessian match differences of F") {
  const Polytope sq = standard_polytope("square");
  DiscreteAbreu d(sq, 16);
  d.set_target(constant(4.5), false);
  const std::vector<double> q = bump_state(d, 1e-2);
  const std::vector<double> g = d.gradient(q);
  const Eigen::SparseMatrix<double> H = d.hessian(q);
  const double eps = 1e-5;
  for (int u : {d.reference(), d.unknowns() / 3, 5}) {
    std::vector<double> qp = q, qm = q;
    qp[u] += eps;
    qm[u] -= eps;
    CHECK((d.F(qp) - d.F(qm)) / (2 * eps) == doctest::Approx(g[u]).epsilon(1e-5));
    const std::vector<double> gp = d.gradient(qp), gm = d.gradient(qm);
    for (int w : {u, d.unknowns() / 2})
      CHECK((gp[w] - gm[w]) / (2 * eps) == doctest::Approx(H.coeff(w, u)).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("descent from a bump strictly reduces the residual") {
  const Polytope sq = standard_polytope("square");
  SolverConfig c;
  c.cells = 32;
  c.max_iter = 10;
  Solver s(sq, c);
  s.set_target(constant(4), true);
  SolverState st = s.run(s.start(bump_state(s.problem(), 1e-2)));
  REQUIRE(st.history.size() == 11);
  for (std::size_t k = 1; k < st.history.size(); ++k) {
    CHECK(st.history[k].residual < st.history[k - 1].residual);
    CHECK(st.history[k].F < st.history[k - 1].F);
    CHECK(st.history[k].convexity_margin > 0.0);
  }
  CHECK(st.sign == -1);
}

TEST_CASE("first variation matches the residual pairing") {
  const Polytope sq = standard_polytope("square");
  SolverConfig c;
  c.cells = 32;
  Solver s(sq, c);
  s.set_target(constant(4), true);
  const FirstVariationReport r = first_variation_check(s, bump_state(s.problem(), 1e-2));
  CHECK(r.pass);
  CHECK(r.relative_error < 0.05);
  CHECK(std::abs(r.predicted) > 1e-3);
}

TEST_CASE("convexity guard halves oversized steps") {
  const Polytope sq = standard_polytope("square");
  SolverConfig c;
  c.cells = 16;
  c.max_iter = 1;
  c.initial_step = 1e3;
  Solver s(sq, c);
  s.set_target(constant(4), true);
  const std::vector<double> q = bump_state(s.problem(), 5e-2);
  SolverState st = s.start(q);
  // the full step leaves the convex cone
  std::vector<double> g = s.problem().gradient(q), big = q;
  for (std::size_t k = 0; k < q.size(); ++k) big[k] += st.sign * 1e3 * g[k] / s.problem().weight();
  CHECK(std::isinf(s.problem().F(big)));
  st = s.descent_step(st);
  CHECK(st.iteration == 1);
  CHECK(st.step < 1e3);
  CHECK(st.convexity_margin > 0.0);
}

TEST_CASE("solve: exact solution, balanced bump and violated balance") {
  const Polytope sq = standard_polytope("square");
  SolverConfig c;
  c.cells = 32;
  const SolveReport a = solve(sq, TargetFunction::constant(4), c);
  CHECK(a.state.converged);
  CHECK(a.state.iteration == 0);

  SolverConfig n;
  n.cells = 64;
  n.newton = true;
  n.max_iter = 30;
  const TargetFunction K = affine_balance(sq, TargetFunction::parse("4 + 0.05*bump(0.5, 0.5, 0.15)"));
  const SolveReport b = solve(sq, K, n);
  CHECK(b.probe.balanced);
  CHECK(b.state.converged);
  CHECK(b.state.residual < 1e-4);
  for (std::size_t k = 1; k < b.state.history.size(); ++k) CHECK(b.state.history[k].F < b.state.history[k - 1].F);
  CHECK(b.state.oscillation > 0.0);

  SolverConfig u = n;
  u.cells = 32;
  u.max_iter = 20;
  const SolveReport d = solve(sq, TargetFunction::parse("4 + (xi1 - 0.5)"), u);
  CHECK_FALSE(d.probe.balanced);
  CHECK_FALSE(d.state.converged);
  CHECK(d.state.diagnosis.find("affine balance") != std::string::npos);
  REQUIRE_FALSE(d.warnings.empty());
}

TEST_CASE("continuity: trivial path on the square") {
  SolverConfig c;
  c.cells = 24;
  const ContinuityPath p = continuity_solve(standard_polytope("square"), TargetFunction::constant(4),
                                            TargetFunction::constant(4), 4, c);
  CHECK(p.completed);
  for (const auto& s : p.steps) CHECK(s.iterations == 0);
}

TEST_CASE("continuity: Hirzebruch warm starts beat cold starts") {
  const Polytope P = standard_polytope("hirzebruch");
  SolverConfig c;
  c.cells = 32;
  c.newton = true;
  const ContinuityPath p = continuity_solve(P, std::nullopt, extremal_affine(P).target(), 5, c);
  CHECK(p.completed);
  for (const auto& s : p.steps) {
    CHECK(s.converged);
    CHECK(s.initial_residual <= s.cold_initial_residual * (1 + 1e-12));
    CHECK(s.F_strictly_decreasing);
  }
}

TEST_CASE("continuity warns about vanishing edges") {
  SolverConfig c;
  c.cells = 16;
  c.max_iter = 2;
  const ContinuityPath p =
      continuity_solve(standard_polytope("square"), std::nullopt, TargetFunction::affine(0, 1, 0), 1, c);
  REQUIRE_FALSE(p.warnings.empty());
  CHECK(p.warnings.front().find("vanishes") != std::string::npos);
}

TEST_CASE("history CSV") {
  const std::string s = history_csv({{0, 1.5, -2.0, 0.0, 1.0, 3.0}});
  CHECK(s == "iteration,residual,F,step,oscillation,convexity_margin\n0,1.5,-2,0,1,3\n");
}
