#pragma once

#include "toric/operators.hpp"

#include <string>
#include <vector>

namespace toric {

enum class Verdict { Pass, Fail, Trend, OutOfHypotheses };

std::string verdict_name(Verdict v);

struct SampleValue {
  Vec2 xi = Vec2::Zero();
  double value = 0.0;
};

struct ValidationReport {
  std::string name;
  std::string layout;       // sampling layout, recorded for reproducibility
  int samples = 0;
  double observed = 0.0;    // extremal observed value
  double bound = 0.0;       // bound side, NaN for trend checks
  double margin = 0.0;      // bound/observed or observed/bound, > 1 is slack
  Verdict verdict = Verdict::Trend;
  std::vector<std::string> notes;
  std::vector<SampleValue> values;
};

std::string report_text(const ValidationReport& r);
std::string report_csv(const ValidationReport& r);

// Interior points of an n x n lattice over the bounding box with min l >= margin.
std::vector<Vec2> interior_samples(const Polytope& poly, int n, double margin);

// det Hess u >= (2 K_o diam^2)^(-2), after checking |S(u)| <= K_o on the samples.
ValidationReport det_lower_bound_check(const Potential& u, const Polytope& poly, double K_o,
                                       const std::vector<Vec2>& samples, const AbreuOptions& abreu = {});

// inf of det Hess u * d(xi, F) over inward rays from the facet, level by level
// toward the facet; trend report.
ValidationReport facet_det_check(const Potential& u, const Polytope& poly, int facet, int rays = 9, int levels = 10);

// v^T (Hess u)^{-1} v / l along the inward normal from each edge midpoint.
ValidationReport boundary_slope_check(const Potential& u, const Polytope& poly, double s1 = 1e-3, double tol = 0.02);

// max H against (2 + max|S(f)|/(2 Kdot))^2 exp(2 Kdot (max phi - min phi)) on a shared x-grid.
ValidationReport h_upper_bound_check(const Potential& f, const Potential& g, const GridSpec& xgrid);

// x-grid of n x n nodes on [-half, half]^2 around grad g at the centroid.
GridSpec default_xgrid(const Potential& g, const Polytope& poly, int n = 33, double half = 3.0);

}  // namespace toric
