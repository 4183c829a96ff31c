#pragma once

#include "toric/geometry2d.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"
#include "toric/target.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toric {

struct AffineFunction {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;

  double operator()(const Vec2& xi) const { return a0 + a1 * xi.x() + a2 * xi.y(); }
  TargetFunction target() const { return TargetFunction::affine(a0, a1, a2); }
  std::string str() const;
};

// max of finitely many affine pieces.
struct PLFunction {
  std::vector<AffineFunction> pieces;
  double operator()(const Vec2& xi) const;
};

// int_{dDelta} p dsigma for affine p (exact).
double boundary_integral(const Polytope& poly, const AffineFunction& p);
// int_Delta K p dmu; exact moments when K is polynomial.
double weighted_integral(const Polytope& poly, const TargetFunction& K, const AffineFunction& p);

// int_P K q dmu over a convex polygon; exact moments when K is polynomial.
double integrate_product(const Polygon& P, const TargetFunction& K, const Poly2& q);

// L_K(p) for affine p.
double lk_affine(const Polytope& poly, const TargetFunction& K, const AffineFunction& p);

// L_K(u) for a potential, with the boundary term taken from the closure values.
RefinedIntegral lk_functional(const Polytope& poly, const TargetFunction& K, const Potential& u,
                              const QuadratureOptions& opt = {});

// Exact L_K for PL u = max of pieces, by decomposition into linearity cells.
struct PLIntegrals {
  double lk = 0.0;
  double boundary = 0.0;  // int u dsigma
  double interior = 0.0;  // int K u dmu
  int cells = 0;          // cells of positive area
  bool affine = false;    // a single piece is active on all of Delta
};
PLIntegrals lk_functional(const Polytope& poly, const TargetFunction& K, const PLFunction& u);

struct FkResult {
  double value = 0.0;
  double logdet = 0.0;  // int log det Hess u dmu
  double lk = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

// F_K(u) = -int log det Hess u dmu + L_K(u).
FkResult fk_functional(const Polytope& poly, const TargetFunction& K, const Potential& u,
                       const QuadratureOptions& opt = {});

AffineFunction extremal_affine(const Polytope& poly);

// K plus the affine function that makes L_K vanish on affine functions.
TargetFunction affine_balance(const Polytope& poly, const TargetFunction& K);

struct AffineProbe {
  double L1 = 0.0, Lx = 0.0, Ly = 0.0;  // L_K(1), L_K(xi1), L_K(xi2)
  double max_abs = 0.0;
  double tolerance = 0.0;
  bool balanced = false;
};

AffineProbe affine_probe(const Polytope& poly, const TargetFunction& K, double tol = 1e-10);

struct EdgeNonvanishing {
  bool ok = true;
  std::vector<std::optional<Vec2>> witness;  // per edge
  std::vector<int> vanishing_edges;
};

EdgeNonvanishing edge_nonvanishing(const TargetFunction& K, const Polytope& poly, int samples = 64,
                                   double tol = 1e-12);

}  // namespace toric
