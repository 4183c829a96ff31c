#pragma once

#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/smooth_part.hpp"

#include <functional>
#include <string>
#include <vector>

namespace toric {

enum class AbreuRoute {
  Jet,          // analytic derivatives up to order 4
  CompositeFD,  // centred differences of the inverse Hessian and of w
};

struct AbreuOptions {
  AbreuRoute route = AbreuRoute::Jet;
  double clamp = kThirdClamp;
  Vec2 step = Vec2(1e-3, 1e-3);  // CompositeFD only
};

struct CurvatureBundle {
  Mat2 hess = Mat2::Zero();
  Mat2 cofactor = Mat2::Zero();
  double w = 0.0;        // 1 / det Hess u
  double S = 0.0;        // -U^{ij} d_ij w
  double S_alt = 0.0;    // -d_ij u^{ij}
};

CurvatureBundle curvature_bundle(const Potential& u, const Vec2& xi, const AbreuOptions& opt = {});
double abreu_scalar(const Potential& u, const Vec2& xi, const AbreuOptions& opt = {});

struct AffineInvariants {
  double rho = 0.0, Phi = 0.0, J = 0.0, Theta = 0.0;
};

AffineInvariants affine_invariants(const Potential& u, const Vec2& xi, double clamp = kThirdClamp);

// u*(xi) = lambda u(A^{-1}(xi - b))
PotentialPtr affine_rescale(const PotentialPtr& u, const Mat2& A, double lambda, const Vec2& b = Vec2::Zero());

// Ricci form in log-affine coordinates at x = grad u(xi), from the jets of u.
struct RicciData {
  Mat2 ric = Mat2::Zero();
  double norm = 0.0;  // |Ric|_f with f-metric raises
  double S = 0.0;     // f^{ij} R_ij
};

RicciData ricci_at(const Potential& u, const Vec2& xi, double clamp = kThirdClamp);

// Samples of the Legendre dual on a regular x-grid; invalid nodes are outside grad u's reach.
struct DualGrid {
  GridSpec grid;
  std::vector<Vec2> xi;
  std::vector<double> f;
  std::vector<double> logW;  // log det Hess f
  std::vector<Mat2> finv;    // (Hess f)^{-1} = Hess u
  std::vector<char> valid;
};

DualGrid legendre_grid(const Potential& u, const GridSpec& xgrid);

// Ricci by second differences of log det Hess f on the x-grid.
struct RicciGrid {
  GridSpec grid;
  std::vector<Mat2> ric;
  std::vector<double> norm, S;
  std::vector<char> valid;     // needs all 8 neighbours valid
  double step_change = 0.0;    // max |R(h) - R(2h)| where both exist
  double max_abs_ric = 0.0;
  bool coarse = false;         // step_change above 1% of max |R|
};

RicciGrid ricci_logaffine(const DualGrid& dual);

struct MetricDiagnostics {
  GridSpec grid;
  std::vector<double> W, Psi, ricci_norm, H;  // NaN where unavailable
  double max_H = 0.0, min_H = 0.0;
};

// f is the working potential, g the reference; both given on the polytope side.
MetricDiagnostics metric_diagnostics(const Potential& f, const Potential& g, const GridSpec& xgrid);

struct DistanceOptions {
  int cells = 64;
  bool sixteen_neighbours = false;
  bool estimate_error = true;  // rerun at half resolution
};

struct DistanceResult {
  double distance = 0.0;
  double error_estimate = 0.0;
  int nodes = 0;
};

DistanceResult calabi_distance(const Potential& u, const Polytope& poly, const Vec2& p, const Vec2& target,
                               const DistanceOptions& opt = {});
DistanceResult calabi_distance_to_boundary(const Potential& u, const Polytope& poly, const Vec2& p,
                                           const DistanceOptions& opt = {});

struct InteriorEstimateSample {
  Vec2 p;
  double Theta = 0.0, S = 0.0, ricci_norm = 0.0, distance = 0.0, product = 0.0;
};

struct InteriorEstimateReport {
  std::vector<InteriorEstimateSample> samples;
  double sup = 0.0;
  std::string note = "curvature term truncated to |Ric|_f";
};

InteriorEstimateReport interior_estimate_monitor(const Potential& u, const Polytope& poly,
                                                 const std::vector<Vec2>& samples, const DistanceOptions& opt = {});

// Scalar field on grid nodes; NaN marks clamped or outside nodes.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
};

enum class Exec { Serial, Parallel };

// Evaluates f at nodes with interior margin >= clamp; f may throw DomainError,
// which is recorded as NaN.
ScalarField sample_field(const Polytope& poly, const GridSpec& grid, double clamp,
                         const std::function<double(const Vec2&)>& f, Exec exec = Exec::Parallel);

std::string field_csv(const ScalarField& field);
void write_field_csv(const ScalarField& field, const std::string& path);

}  // namespace toric
