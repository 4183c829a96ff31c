#include "toric/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace toric {

namespace {

Polygon polygon_of(const Polytope& poly) { return Polygon(poly.vertices().begin(), poly.vertices().end()); }

Poly2 poly_of(const AffineFunction& p) { return Poly2::affine(p.a0, p.a1, p.a2); }

constexpr int kSmoothOrder = 24;

}  // namespace

std::string AffineFunction::str() const {
  char b[160];
  std::snprintf(b, sizeof b, "%.17g %c %.17g*xi1 %c %.17g*xi2", a0, std::signbit(a1) ? '-' : '+', std::abs(a1),
                std::signbit(a2) ? '-' : '+', std::abs(a2));
  return b;
}

double PLFunction::operator()(const Vec2& xi) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) m = std::max(m, p(xi));
  return m;
}

double integrate_product(const Polygon& P, const TargetFunction& K, const Poly2& q) {
  if (P.size() < 3) return 0.0;
  if (K.is_polynomial()) {
    const Poly2 prod = K.polynomial() * q;
    double s = 0.0;
    for (const auto& [e, c] : prod.coeff)
      if (c != 0.0) s += c * polygon_moment(P, e.first, e.second);
    return s;
  }
  return integrate_polygon(P, [&](const Vec2& xi) { return K(xi) * q(xi); }, kSmoothOrder);
}

double boundary_integral(const Polytope& poly, const AffineFunction& p) {
  double s = 0.0;
  for (const Edge& e : poly.edges()) s += e.density * e.length * p(0.5 * (e.a + e.b));
  return s;
}

double weighted_integral(const Polytope& poly, const TargetFunction& K, const AffineFunction& p) {
  return integrate_product(polygon_of(poly), K, poly_of(p));
}

double lk_affine(const Polytope& poly, const TargetFunction& K, const AffineFunction& p) {
  return boundary_integral(poly, p) - weighted_integral(poly, K, p);
}

RefinedIntegral lk_functional(const Polytope& poly, const TargetFunction& K, const Potential& u,
                              const QuadratureOptions& opt) {
  const RefinedIntegral b =
      integrate_boundary_refined(poly, [&](int, const Vec2& xi) { return u.closure_value(xi); }, opt);
  const RefinedIntegral i =
      integrate_interior_refined(poly, [&](const Vec2& xi) { return K(xi) * u.closure_value(xi); }, opt);
  RefinedIntegral r;
  r.value = b.value - i.value;
  r.error_estimate = b.error_estimate + i.error_estimate;
  r.depth = std::max(b.depth, i.depth);
  r.converged = b.converged && i.converged;
  return r;
}

PLIntegrals lk_functional(const Polytope& poly, const TargetFunction& K, const PLFunction& u) {
  if (u.pieces.empty()) throw DomainError("PL function has no affine pieces");
  std::vector<AffineFunction> pieces;
  for (const auto& p : u.pieces) {
    if (!std::isfinite(p.a0) || !std::isfinite(p.a1) || !std::isfinite(p.a2))
      throw DomainError("PL function has a non-finite coefficient");
    const bool dup = std::any_of(pieces.begin(), pieces.end(), [&](const AffineFunction& q) {
      return q.a0 == p.a0 && q.a1 == p.a1 && q.a2 == p.a2;
    });
    if (!dup) pieces.push_back(p);
  }
  PLIntegrals r;
  const Polygon base = polygon_of(poly);
  const double area_tol = 1e-14 * poly.area();
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    Polygon cell = base;
    for (std::size_t j = 0; j < pieces.size() && cell.size() >= 3; ++j) {
      if (j == k) continue;
      const Vec2 a(pieces[k].a1 - pieces[j].a1, pieces[k].a2 - pieces[j].a2);
      cell = clip_halfplane(cell, a, pieces[j].a0 - pieces[k].a0);
    }
    if (cell.size() < 3 || polygon_area(cell) <= area_tol) continue;
    ++r.cells;
    r.interior += integrate_product(cell, K, poly_of(pieces[k]));
  }
  r.affine = r.cells == 1;
  // along an edge u is PL with breaks where two pieces cross
  for (const Edge& e : poly.edges()) {
    const Vec2 d = e.b - e.a;
    std::vector<double> ts{0.0, 1.0};
    for (std::size_t j = 0; j < pieces.size(); ++j)
      for (std::size_t k = j + 1; k < pieces.size(); ++k) {
        const double f0 = pieces[j](e.a) - pieces[k](e.a);
        const double f1 = pieces[j](e.b) - pieces[k](e.b);
        if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) ts.push_back(f0 / (f0 - f1));
      }
    std::sort(ts.begin(), ts.end());
    for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
      const double dt = ts[m + 1] - ts[m];
      if (dt <= 0.0) continue;
      r.boundary += e.density * e.length * dt * u(e.a + 0.5 * (ts[m] + ts[m + 1]) * d);
    }
  }
  r.lk = r.boundary - r.interior;
  return r;
}

FkResult fk_functional(const Polytope& poly, const TargetFunction& K, const Potential& u,
                       const QuadratureOptions& opt) {
  const RefinedIntegral ld = integrate_interior_refined(
      poly,
      [&](const Vec2& xi) {
        const double det = u.hessian(xi, 0.0).determinant();
        if (!(det > 0.0)) throw DomainError("Hessian not positive definite in F_K");
        return std::log(det);
      },
      opt);
  const RefinedIntegral lk = lk_functional(poly, K, u, opt);
  FkResult r;
  r.logdet = ld.value;
  r.lk = lk.value;
  r.value = -ld.value + lk.value;
  r.error_estimate = ld.error_estimate + lk.error_estimate;
  r.converged = ld.converged && lk.converged;
  return r;
}

namespace {

Eigen::Matrix3d gram(const Polygon& P) {
  Eigen::Matrix3d M;
  M << polygon_moment(P, 0, 0), polygon_moment(P, 1, 0), polygon_moment(P, 0, 1),  //
      polygon_moment(P, 1, 0), polygon_moment(P, 2, 0), polygon_moment(P, 1, 1),   //
      polygon_moment(P, 0, 1), polygon_moment(P, 1, 1), polygon_moment(P, 0, 2);
  return M;
}

const AffineFunction kBasis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

Eigen::Vector3d solve_gram(const Polytope& poly, const Eigen::Vector3d& rhs) {
  if (!(poly.area() > 0.0)) throw DomainError("degenerate polytope: zero area");
  return gram(polygon_of(poly)).ldlt().solve(rhs);
}

}  // namespace

AffineFunction extremal_affine(const Polytope& poly) {
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) rhs[i] = boundary_integral(poly, kBasis[i]);
  const Eigen::Vector3d a = solve_gram(poly, rhs);
  return {a[0], a[1], a[2]};
}

TargetFunction affine_balance(const Polytope& poly, const TargetFunction& K) {
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) rhs[i] = lk_affine(poly, K, kBasis[i]);
  const Eigen::Vector3d a = solve_gram(poly, rhs);
  return K + TargetFunction::affine(a[0], a[1], a[2]);
}

AffineProbe affine_probe(const Polytope& poly, const TargetFunction& K, double tol) {
  AffineProbe p;
  p.L1 = lk_affine(poly, K, kBasis[0]);
  p.Lx = lk_affine(poly, K, kBasis[1]);
  p.Ly = lk_affine(poly, K, kBasis[2]);
  p.max_abs = std::max({std::abs(p.L1), std::abs(p.Lx), std::abs(p.Ly)});
  double scale = 1.0;
  for (const auto& b : kBasis) scale = std::max(scale, std::abs(boundary_integral(poly, b)));
  p.tolerance = tol * scale;
  p.balanced = p.max_abs <= p.tolerance;
  return p;
}

EdgeNonvanishing edge_nonvanishing(const TargetFunction& K, const Polytope& poly, int samples, double tol) {
  EdgeNonvanishing r;
  const int n = std::max(samples, 2);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Edge& e = poly.edges()[k];
    std::optional<Vec2> best;
    double best_val = tol;
    for (int s = 0; s < n; ++s) {
      const Vec2 p = e.a + (double(s) / (n - 1)) * (e.b - e.a);
      const double v = std::abs(K(p));
      if (v > best_val) {
        best_val = v;
        best = p;
      }
    }
    r.witness.push_back(best);
    if (!best) {
      r.ok = false;
      r.vanishing_edges.push_back(static_cast<int>(k));
    }
  }
  return r;
}

}  // namespace toric
