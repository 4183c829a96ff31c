#include "toric/quadrature.hpp"

#include "toric/geometry2d.hpp"

#include <cmath>
#include <string>

namespace toric {

namespace {

// Evaluates f at every point (in parallel) and sums in index order, so the
// result does not depend on the thread count.
double weighted_sum(const std::vector<QuadPoint>& pts, const std::function<double(const Vec2&)>& f) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> vals(n, 0.0);
  std::string error;
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    try {
      vals[k] = pts[k].w * f(pts[k].xi);
    } catch (const std::exception& e) {
#pragma omp critical(toric_quad_error)
      if (!failed) {
        failed = true;
        error = e.what();
      }
    }
  }
  if (failed) throw DomainError("quadrature: " + error);
  double s = 0.0;
  for (double v : vals) s += v;
  return s;
}

// Breakpoints on [0,1]: halving toward 1 only, or toward both ends.
std::vector<double> graded(int depth, bool both_ends) {
  std::vector<double> b{0.0};
  if (!both_ends) {
    for (int k = 1; k <= depth; ++k) b.push_back(1.0 - std::ldexp(1.0, -k));
  } else {
    for (int k = depth; k >= 2; --k) b.push_back(std::ldexp(1.0, -k));
    b.push_back(0.5);
    for (int k = 2; k <= depth; ++k) b.push_back(1.0 - std::ldexp(1.0, -k));
  }
  b.push_back(1.0);
  return b;
}

void fan_points(const Polytope& poly, const std::vector<double>& sb, const std::vector<double>& tb, int order,
                std::vector<QuadPoint>& out) {
  const GaussRule& g = gauss_legendre(order);
  const Vec2 c = poly.centroid();
  for (const Edge& e : poly.edges()) {
    const Vec2 a = e.a - c, d = e.b - e.a;
    const double jac = std::abs(a.x() * d.y() - a.y() * d.x());
    for (std::size_t is = 0; is + 1 < sb.size(); ++is)
      for (std::size_t it = 0; it + 1 < tb.size(); ++it) {
        const double s0 = sb[is], ds = sb[is + 1] - s0, t0 = tb[it], dt = tb[it + 1] - t0;
        for (std::size_t p = 0; p < g.x.size(); ++p)
          for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double s = s0 + ds * g.x[p], t = t0 + dt * g.x[q];
            out.push_back({c + s * (a + t * d), g.w[p] * g.w[q] * ds * dt * s * jac});
          }
      }
  }
}

void edge_points(const Polytope& poly, const std::vector<double>& tb, int order,
                 std::vector<std::vector<QuadPoint>>& out) {
  const GaussRule& g = gauss_legendre(order);
  out.assign(poly.size(), {});
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Edge& e = poly.edges()[k];
    const double scale = e.length * e.density;
    for (std::size_t it = 0; it + 1 < tb.size(); ++it) {
      const double t0 = tb[it], dt = tb[it + 1] - t0;
      for (std::size_t q = 0; q < g.x.size(); ++q) {
        const double t = t0 + dt * g.x[q];
        out[k].push_back({e.a + t * (e.b - e.a), g.w[q] * dt * scale});
      }
    }
  }
}

// The error of the panel holding an endpoint singularity halves with every
// level, so successive levels are combined as 2 I_d - I_{d-1}.
bool step(RefinedIntegral& r, double raw, int d, double& raw_prev, double& extr_prev, double tol) {
  r.depth = d;
  if (d == 1) {
    r.value = raw;
  } else {
    const double extr = 2.0 * raw - raw_prev;
    r.value = extr;
    if (d > 2) {
      r.error_estimate = std::abs(extr - extr_prev);
      r.converged = r.error_estimate < tol;
    }
    extr_prev = extr;
  }
  raw_prev = raw;
  return r.converged;
}

}  // namespace

QuadratureScheme QuadratureScheme::build(const Polytope& poly, const QuadratureOptions& opt) {
  QuadratureScheme s;
  fan_points(poly, {0.0, 1.0}, {0.0, 1.0}, opt.order, s.interior);
  edge_points(poly, {0.0, 1.0}, opt.boundary_order, s.boundary);
  return s;
}

double QuadratureScheme::integrate(const std::function<double(const Vec2&)>& f) const {
  return weighted_sum(interior, f);
}

double QuadratureScheme::integrate_boundary(const std::function<double(int, const Vec2&)>& f) const {
  double s = 0.0;
  for (std::size_t k = 0; k < boundary.size(); ++k)
    s += weighted_sum(boundary[k], [&](const Vec2& xi) { return f(static_cast<int>(k), xi); });
  return s;
}

RefinedIntegral integrate_interior_refined(const Polytope& poly, const std::function<double(const Vec2&)>& f,
                                           const QuadratureOptions& opt) {
  RefinedIntegral r;
  double raw_prev = 0.0, extr_prev = 0.0;
  for (int d = 1; d <= opt.refine_depth; ++d) {
    std::vector<QuadPoint> pts;
    fan_points(poly, graded(d, false), graded(d, true), opt.order, pts);
    if (step(r, weighted_sum(pts, f), d, raw_prev, extr_prev, opt.tol)) break;
  }
  return r;
}

RefinedIntegral integrate_boundary_refined(const Polytope& poly, const std::function<double(int, const Vec2&)>& f,
                                           const QuadratureOptions& opt) {
  RefinedIntegral r;
  double raw_prev = 0.0, extr_prev = 0.0;
  for (int d = 1; d <= opt.refine_depth; ++d) {
    std::vector<std::vector<QuadPoint>> pts;
    edge_points(poly, graded(d, true), opt.boundary_order, pts);
    double v = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k)
      v += weighted_sum(pts[k], [&](const Vec2& xi) { return f(static_cast<int>(k), xi); });
    if (step(r, v, d, raw_prev, extr_prev, opt.tol)) break;
  }
  return r;
}

}  // namespace toric
