#pragma once

#include "toric/polytope.hpp"

#include <functional>
#include <vector>

namespace toric {

struct QuadratureOptions {
  int order = 8;           // Gauss points per direction per panel
  int boundary_order = 16;
  int refine_depth = 12;   // geometric levels toward edges and vertices
  double tol = 1e-9;       // stop refining once the level increment drops below this
};

struct QuadPoint {
  Vec2 xi;
  double w = 0.0;
};

// Fixed-order rules: a fan of triangles from the centroid for dmu, and Gauss
// points on each edge weighted by the dsigma density.
struct QuadratureScheme {
  std::vector<QuadPoint> interior;
  std::vector<std::vector<QuadPoint>> boundary;

  static QuadratureScheme build(const Polytope& poly, const QuadratureOptions& opt = {});
  double integrate(const std::function<double(const Vec2&)>& f) const;
  double integrate_boundary(const std::function<double(int edge, const Vec2&)>& f) const;
};

struct RefinedIntegral {
  double value = 0.0;
  double error_estimate = 0.0;  // magnitude of the last refinement increment
  int depth = 0;
  bool converged = false;
};

// Integrals of functions with integrable singularities on the boundary, such as
// log l. Panels are graded by halving toward every edge and toward its endpoints.
RefinedIntegral integrate_interior_refined(const Polytope& poly, const std::function<double(const Vec2&)>& f,
                                           const QuadratureOptions& opt = {});
RefinedIntegral integrate_boundary_refined(const Polytope& poly,
                                           const std::function<double(int edge, const Vec2&)>& f,
                                           const QuadratureOptions& opt = {});

}  // namespace toric
