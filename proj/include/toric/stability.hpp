#pragma once

#include "toric/functionals.hpp"
#include "toric/operators.hpp"

#include <string>
#include <vector>

namespace toric {

// u = max(h, 0) with h(xi) = <a, xi> - c.
struct Crease {
  Vec2 a = Vec2(1.0, 0.0);
  double c = 0.0;
  double h(const Vec2& xi) const { return a.dot(xi) - c; }
  static Crease from_angle(double theta, double c) { return {Vec2(std::cos(theta), std::sin(theta)), c}; }
};

struct CreaseValue {
  double lk = 0.0;
  double boundary = 0.0;  // int u dsigma
  double ratio = 0.0;
  double area_plus = 0.0;
};

// Exact for polynomial K; throws when P+ is empty, covers Delta, or meets the
// boundary in a null set.
CreaseValue crease_lk(const Polytope& poly, const TargetFunction& K, const Crease& crease);

struct ScanOptions {
  int angles = 180;
  int offsets = 128;
  int refine_rounds = 3;
  int keep = 4;               // local minima refined per round
  bool keep_surface = false;  // record every coarse sample for CSV export
  Exec exec = Exec::Parallel;
};

struct ScanSample {
  double theta = 0.0, c = 0.0;  // crease parameters before normalization
  Vec2 a = Vec2::Zero();        // normalized crease direction
  double offset = 0.0;          // normalized crease offset
  double lk = 0.0, boundary = 0.0, ratio = 0.0;
};

struct StabilityReport {
  double lambda_est = 0.0;
  std::string lambda_label = "upper bound on lambda from crease family";
  ScanSample worst;
  int evaluated = 0;
  int negative_count = 0;
  std::vector<ScanSample> witnesses;  // most negative L_K first, at most 16
  AffineProbe probe;
  bool affine_unstable = false;       // some L_K(+-p) < 0 on an affine pair
  std::vector<double> lambda_by_round;
  std::vector<ScanSample> surface;
};

StabilityReport scan_uniform_stability(const Polytope& poly, const TargetFunction& K, const ScanOptions& opt = {});

std::string scan_csv(const StabilityReport& report);

struct PolystabilityResult {
  std::vector<PLIntegrals> values;
  std::vector<std::string> flags;  // per function: "negative", "zero on non-affine", "positive", "affine"
  std::string verdict;             // "not polystable", "boundary case", "no destabilizer among probes"
};

PolystabilityResult polystability_probe(const Polytope& poly, const TargetFunction& K,
                                        const std::vector<PLFunction>& functions, double tol = 1e-10);

}  // namespace toric
