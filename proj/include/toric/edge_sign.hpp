#pragma once

#include "toric/polytope.hpp"
#include "toric/potential.hpp"

#include <vector>

namespace toric {

// Lattice coordinates adapted to an edge: s1 = l(xi) vanishes on the edge,
// s2 = <w, xi - q> runs along it, and (v, w) is a unimodular basis.
struct EdgeFrame {
  int edge = 0;
  Vec2 v, w, q;
  double s1(const Vec2& xi, const Polytope& poly) const { return poly.facets()[edge].eval(xi); }
  double s2(const Vec2& xi) const { return w.dot(xi - q); }
  // point with the given adapted coordinates
  Vec2 point(double s1, double s2, const Polytope& poly) const;
};

EdgeFrame edge_frame(const Polytope& poly, int edge, const Vec2& q);

struct EdgeSignSpec {
  std::vector<int> signs;            // +1 or -1 per edge
  double delta = 0.08;
  double eps = 1e-3;
  double a_magnitude = 1.0;
  double c = 2.0;
  double q_fraction = 0.3;           // q on each edge at this fraction from its first vertex
};

struct EdgeSignPiece {
  EdgeFrame frame;
  double a = 0.0, c = 0.0;
  bool c_raised = false;
};

// u = sum over edges of alpha(s1) + beta(s2) plus eps |xi|^2. alpha is s log s
// blended to affine on [delta, 2 delta]; beta'' is 1/(a s^2 + c) blended to 0 on
// the same band in |s2|.
class EdgeSignPotential : public Potential {
 public:
  EdgeSignPotential(const Polytope& poly, const EdgeSignSpec& spec);
  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override;
  double interior_margin(const Vec2& xi) const override { return poly_.min_facet_value(xi); }
  Vec2 reference_point() const override { return poly_.centroid(); }

  const std::vector<EdgeSignPiece>& pieces() const { return pieces_; }
  const EdgeSignSpec& spec() const { return spec_; }
  const Polytope& polytope() const { return poly_; }

  // one-variable profiles, derivative orders 0..4
  double alpha(double s, int d) const;
  double beta(const EdgeSignPiece& p, double r, int d) const;

 private:
  Polytope poly_;
  EdgeSignSpec spec_;
  std::vector<EdgeSignPiece> pieces_;
};

struct EdgeSignWindowReport {
  int edge = 0;
  int requested_sign = 0;
  Vec2 q;
  double a = 0.0, c = 0.0;
  bool c_raised = false;
  double S_at_q = 0.0;       // at s1 = probe depth on the normal through q
  double S_min = 0.0, S_max = 0.0;  // over the window samples
  int samples = 0;
  bool sign_ok = false;
};

struct EdgeSignResult {
  std::shared_ptr<const EdgeSignPotential> potential;
  std::vector<EdgeSignWindowReport> windows;
  bool all_signs_ok = false;
};

// Builds the potential and evaluates S on each window {s1 <= delta, |s2| <= delta/2}.
EdgeSignResult prescribe_edge_sign(const Polytope& poly, const EdgeSignSpec& spec, int window_samples = 9);

}  // namespace toric
