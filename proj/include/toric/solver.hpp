#pragma once

#include "toric/functionals.hpp"
#include "toric/operators.hpp"
#include "toric/smooth_part.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace toric {

using NodeFunction = std::function<double(const Vec2&)>;

struct SolverConfig {
  int cells = 64;
  double tol = 1e-4;            // on max |S - K| over nodes with min l >= clamp
  int max_iter = 200;
  double initial_step = 0.0;    // first-order mode; 0 selects 1 / lambda_max(Hessian / w)
  double backtrack = 0.5;
  double min_step = 1e-12;      // relative to the initial step
  double clamp_factor = 3.0;    // clamp = clamp_factor * max(h)
  bool newton = false;
  int fit_points = 12;
  bool absolute_F = true;       // shift F so that F(psi = 0) equals F_K(v) by quadrature
  QuadratureOptions quadrature;
  Exec exec = Exec::Parallel;
};

struct HistoryEntry {
  int iteration = 0;
  double residual = 0.0;
  double F = 0.0;
  double step = 0.0;
  double oscillation = 0.0;       // max u - min u after normalizing at the reference node
  double convexity_margin = 0.0;  // min eigenvalue of the nodal Hessians
};

struct SolverState {
  std::vector<double> q;  // psi at interior nodes
  double F = 0.0;         // discrete functional, unshifted
  double residual = 0.0;
  double convexity_margin = 0.0;
  double oscillation = 0.0;
  double step = 0.0;
  int iteration = 0;
  int sign = -1;
  bool converged = false;
  bool stalled = false;
  std::string diagnosis;
  std::vector<HistoryEntry> history;
};

// Discrete F_K over psi at interior grid nodes:
//   F_h(q) = -w sum log det(Hess v + D^2 psi) - g0.q - w sum src.q
// Off-interior nodes are least-squares extrapolated from the boundary band. The
// linear terms make psi = 0 exactly critical when K = S(v), and on nodes at
// least clamp from the boundary the gradient is w (S_h(v + psi) - K).
class DiscreteAbreu {
 public:
  DiscreteAbreu(const Polytope& poly, int cells, int fit_points = 12, double clamp_factor = 3.0);

  // balanced: K is known to satisfy L_K(affine) = 0, so the band correction
  // that restores the discrete balance is applied.
  void set_target(const NodeFunction& K, bool balanced);

  const Polytope& polytope() const { return poly_; }
  const GridSpec& grid() const { return grid_; }
  int unknowns() const { return static_cast<int>(nodes_.size()); }
  double weight() const { return w_; }
  double clamp() const { return clamp_; }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<char>& deep() const { return deep_; }
  const std::vector<int>& pins() const { return pins_; }
  int reference() const { return pins_[0]; }
  bool balance_applied() const { return balance_applied_; }
  const std::array<double, 3>& discrete_imbalance() const { return imbalance_; }

  std::vector<double> extend(const std::vector<double>& q) const;
  std::shared_ptr<SmoothPart> smooth_part(const std::vector<double>& q) const;
  // Values at interior nodes of a grid function (for warm starts from files).
  std::vector<double> restrict_to_nodes(const SmoothPart& psi) const;

  double logdet_part(const std::vector<double>& q, Exec exec = Exec::Parallel) const;  // +inf if not PD
  double F(const std::vector<double>& q, Exec exec = Exec::Parallel) const;
  std::vector<double> gradient(const std::vector<double>& q, Exec exec = Exec::Parallel) const;
  Eigen::SparseMatrix<double> hessian(const std::vector<double>& q) const;
  double convexity_margin(const std::vector<double>& q) const;
  double oscillation(const std::vector<double>& q) const;
  // max over deep nodes of |gradient| / w
  double residual_norm(const std::vector<double>& g) const;

 private:
  void node_hessians(const std::vector<double>& full, std::vector<Mat2>& H, Exec exec) const;
  std::vector<double> logdet_gradient_full(const std::vector<Mat2>& H, Exec exec) const;

  Polytope poly_;
  GridSpec grid_;
  double w_ = 0.0, clamp_ = 0.0;
  std::vector<int> nodes_;        // grid index of each unknown
  std::vector<int> unknown_of_;   // grid index -> unknown or -1
  std::vector<Vec2> points_;
  std::vector<Mat2> hv_;          // Hess v at unknowns
  std::vector<double> sv_;        // S(v) analytic at unknowns
  std::vector<char> deep_;
  std::vector<int> pins_;
  std::array<Mat2, 9> stencil_;
  std::array<int, 9> offset_;     // grid index offsets
  Eigen::SparseMatrix<double, Eigen::RowMajor> E_, Et_;
  std::vector<double> g0_;        // gradient of the log-det part at psi = 0
  std::vector<double> src_;       // K - S_h(v), balanced on the band
  bool balance_applied_ = false;
  std::array<double, 3> imbalance_{0.0, 0.0, 0.0};
};

class Solver {
 public:
  Solver(const Polytope& poly, const SolverConfig& config);

  void set_target(const NodeFunction& K, bool balanced);
  const DiscreteAbreu& problem() const { return prob_; }
  const SolverConfig& config() const { return cfg_; }
  const NodeFunction& target() const { return K_; }

  SolverState start(const std::vector<double>& q0);
  SolverState descent_step(const SolverState& s) const;
  SolverState run(SolverState s) const;
  double step_cap() const { return t0_; }
  double F_shift() const { return shift_; }

 private:
  double reported_F(double Fh) const { return Fh + shift_; }
  void record(SolverState& s) const;

  Polytope poly_;
  SolverConfig cfg_;
  DiscreteAbreu prob_;
  NodeFunction K_;
  double t0_ = 0.0;
  double shift_ = 0.0;
  double base_shift_ = 0.0;  // F_K(v) without its K term, minus F_h(0)
};

// R = S(v + psi) - K on grid nodes with min l >= clamp, NaN elsewhere. The
// composite route uses the psi grid spacing as difference step.
ScalarField residual(const Polytope& poly, const std::shared_ptr<const SmoothPart>& psi, const NodeFunction& K,
                     double clamp, AbreuRoute route = AbreuRoute::CompositeFD, Exec exec = Exec::Parallel);

struct SolveReport {
  SolverState state;
  std::shared_ptr<SmoothPart> psi;
  PotentialPtr potential;
  AffineProbe probe;
  EdgeNonvanishing edges;
  bool balance_applied = false;
  std::array<double, 3> discrete_imbalance{0.0, 0.0, 0.0};
  double step_cap = 0.0;
  std::vector<std::string> warnings;
};

SolveReport solve(const Polytope& poly, const TargetFunction& K, const SolverConfig& config,
                  const std::shared_ptr<const SmoothPart>& psi0 = nullptr);

struct ContinuityStep {
  double t = 0.0;
  int iterations = 0;
  double initial_residual = 0.0;       // warm start
  double cold_initial_residual = 0.0;  // psi = 0 on the same K_t
  double final_residual = 0.0;
  bool converged = false;
  bool F_strictly_decreasing = true;
  double seconds = 0.0;
  std::vector<HistoryEntry> history;
};

struct ContinuityPath {
  std::vector<ContinuityStep> steps;
  bool completed = false;
  double last_good_t = 0.0;
  std::shared_ptr<SmoothPart> psi;
  std::vector<std::string> warnings;
  std::string diagnosis;
};

// K_t = t K1 + (1 - t) K0 at t = k/steps; K0 defaults to S of the Guillemin potential.
ContinuityPath continuity_solve(const Polytope& poly, const std::optional<TargetFunction>& K0,
                                const TargetFunction& K1, int steps, const SolverConfig& config);

struct FirstVariationReport {
  double eps = 0.0;
  double finite_difference = 0.0;
  double predicted = 0.0;  // sum w R dpsi with R from residual()
  double relative_error = 0.0;
  bool pass = false;
};

// Compares the centred difference of F_h along a smooth random dpsi supported
// on nodes at least clamp from the boundary with the residual pairing.
FirstVariationReport first_variation_check(const Solver& solver, const std::vector<double>& q, double eps = 1e-4,
                                           unsigned seed = 7, double tol = 0.05);

std::string history_csv(const std::vector<HistoryEntry>& history);

}  // namespace toric
