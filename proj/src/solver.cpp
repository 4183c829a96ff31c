#include "toric/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace toric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Mat2 guillemin_hessian(const Polytope& poly, const Vec2& p) {
  Mat2 H = Mat2::Zero();
  for (const Facet& f : poly.facets()) {
    const Vec2 v = f.n();
    H += v * v.transpose() / f.eval(p);
  }
  return H;
}

double guillemin_value(const Polytope& poly, const Vec2& p) {
  double s = 0.0;
  for (const Facet& f : poly.facets()) {
    const double l = f.eval(p);
    s += l > 0.0 ? l * std::log(l) : 0.0;
  }
  return s;
}

Vec2 guillemin_gradient(const Polytope& poly, const Vec2& p) {
  Vec2 g = Vec2::Zero();
  for (const Facet& f : poly.facets()) g += f.n() * (1.0 + std::log(f.eval(p)));
  return g;
}

double min_eig(const Mat2& H) {
  const double tr = H.trace(), det = H.determinant();
  return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

// Row 0 of the pseudo-inverse of the quadratic design matrix in edge-adapted
// coordinates; drops the normal-normal column when the fit is rank deficient.
Eigen::VectorXd extrapolation_weights(const std::vector<Vec2>& d, const Vec2& normal) {
  const int m = static_cast<int>(d.size());
  Eigen::MatrixXd A(m, 6);
  for (int k = 0; k < m; ++k) {
    const double tn = d[k].dot(normal);
    const double tt = -d[k].x() * normal.y() + d[k].y() * normal.x();
    A.row(k) << 1.0, tt, tn, tt * tt, tt * tn, tn * tn;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] < 1e-8 * sv[0]) {
    const Eigen::MatrixXd B = A.leftCols(5);
    return B.completeOrthogonalDecomposition().pseudoInverse().row(0).transpose();
  }
  return A.completeOrthogonalDecomposition().pseudoInverse().row(0).transpose();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

DiscreteAbreu::DiscreteAbreu(const Polytope& poly, int cells, int fit_points, double clamp_factor)
    : poly_(poly), grid_(polytope_grid(poly, cells, 2)) {
  const Vec2 h = grid_.h;
  const double hmax = h.maxCoeff();
  w_ = h.x() * h.y();
  clamp_ = clamp_factor * hmax;
  const int nn = grid_.size();
  unknown_of_.assign(nn, -1);
  const auto guill = guillemin(poly);
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) {
      const Vec2 p = grid_.node(i, j);
      const double lmin = poly.min_facet_value(p);
      if (!(lmin > 1e-9 * hmax)) continue;
      unknown_of_[grid_.flat(i, j)] = static_cast<int>(nodes_.size());
      nodes_.push_back(grid_.flat(i, j));
      points_.push_back(p);
      hv_.push_back(guillemin_hessian(poly, p));
      deep_.push_back(lmin >= clamp_ ? 1 : 0);
      AbreuOptions ao;
      ao.clamp = 0.0;
      sv_.push_back(abreu_scalar(*guill, p, ao));
    }
  const int n = unknowns();
  if (n == 0) throw DomainError("solver grid has no interior nodes");

  int k = 0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj, ++k) {
      Mat2 M = Mat2::Zero();
      if (dj == 0 && di != 0) M(0, 0) = 1.0 / (h.x() * h.x());
      if (di == 0 && dj != 0) M(1, 1) = 1.0 / (h.y() * h.y());
      if (di == 0 && dj == 0) {
        M(0, 0) = -2.0 / (h.x() * h.x());
        M(1, 1) = -2.0 / (h.y() * h.y());
      }
      if (di != 0 && dj != 0) M(0, 1) = M(1, 0) = di * dj / (4.0 * h.x() * h.y());
      stencil_[k] = M;
      offset_[k] = di * grid_.ny + dj;
    }

  // extrapolation rows for grid nodes near the polytope
  std::vector<int> band;
  for (int u = 0; u < n; ++u)
    if (!deep_[u]) band.push_back(u);
  if (band.size() < 6) throw DomainError("solver grid too coarse for boundary extrapolation");
  std::vector<Eigen::Triplet<double>> trip;
  for (int u = 0; u < n; ++u) trip.emplace_back(nodes_[u], u, 1.0);
  const int nfit = std::min<int>(fit_points, static_cast<int>(band.size()));
  for (int i = 0; i < grid_.nx; ++i)
    for (int j = 0; j < grid_.ny; ++j) {
      const int g = grid_.flat(i, j);
      if (unknown_of_[g] >= 0) continue;
      const Vec2 p = grid_.node(i, j);
      double dist = kInf;
      int near_edge = 0;
      for (std::size_t e = 0; e < poly.size(); ++e) {
        const double d = poly.facets()[e].eval(p) / poly.facets()[e].norm();
        if (d < dist) dist = d;
      }
      if (dist < -3.0 * hmax * (1.0 + 1e-9)) continue;
      double best = kInf;
      for (std::size_t e = 0; e < poly.size(); ++e) {
        const double d = std::abs(poly.facets()[e].eval(p)) / poly.facets()[e].norm();
        if (d < best) {
          best = d;
          near_edge = static_cast<int>(e);
        }
      }
      std::vector<std::pair<double, int>> cand;
      cand.reserve(band.size());
      for (int b : band) {
        const Vec2 d = points_[b] - p;
        cand.emplace_back(std::hypot(d.x() / h.x(), d.y() / h.y()), b);
      }
      std::partial_sort(cand.begin(), cand.begin() + nfit, cand.end());
      std::vector<Vec2> d;
      for (int m = 0; m < nfit; ++m) d.push_back((points_[cand[m].second] - p) / hmax);
      const Vec2 nv = poly.facets()[near_edge].n().normalized();
      const Eigen::VectorXd c = extrapolation_weights(d, nv);
      for (int m = 0; m < nfit; ++m) trip.emplace_back(g, cand[m].second, c[m]);
    }
  E_.resize(nn, n);
  E_.setFromTriplets(trip.begin(), trip.end());
  Et_ = E_.transpose();

  // pins: the deep node nearest the centroid and its +e1, +e2 neighbours
  const Vec2 cen = poly.centroid();
  int k0 = -1;
  double best = kInf;
  for (int u = 0; u < n; ++u)
    if (deep_[u] && (points_[u] - cen).norm() < best) {
      best = (points_[u] - cen).norm();
      k0 = u;
    }
  if (k0 < 0) throw DomainError("solver grid too coarse: no nodes at distance >= clamp from the boundary");
  pins_ = {k0, unknown_of_[nodes_[k0] + grid_.ny], unknown_of_[nodes_[k0] + 1]};
  if (pins_[1] < 0 || pins_[2] < 0 || !deep_[pins_[1]] || !deep_[pins_[2]])
    throw DomainError("solver grid too coarse: reference nodes are not deep");

  std::vector<Mat2> H;
  node_hessians(std::vector<double>(nn, 0.0), H, Exec::Serial);
  const std::vector<double> G = logdet_gradient_full(H, Exec::Serial);
  g0_.assign(n, 0.0);
  Eigen::Map<Eigen::VectorXd>(g0_.data(), n) = Et_ * as_vec(G);
  src_.assign(n, 0.0);
}

void DiscreteAbreu::set_target(const NodeFunction& K, bool balanced) {
  const int n = unknowns();
  src_.assign(n, 0.0);
  for (int u = 0; u < n; ++u) {
    const double svh = deep_[u] ? g0_[u] / w_ : sv_[u];
    src_[u] = K(points_[u]) - svh;
  }
  Eigen::Vector3d L = Eigen::Vector3d::Zero();
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  for (int u = 0; u < n; ++u) {
    const Eigen::Vector3d p(1.0, points_[u].x(), points_[u].y());
    L += w_ * src_[u] * p;
    if (!deep_[u]) G += w_ * p * p.transpose();
  }
  imbalance_ = {L[0], L[1], L[2]};
  balance_applied_ = balanced;
  if (balanced) {
    const Eigen::Vector3d c = G.ldlt().solve(L);
    for (int u = 0; u < n; ++u)
      if (!deep_[u]) src_[u] -= c[0] + c[1] * points_[u].x() + c[2] * points_[u].y();
  }
}

std::vector<double> DiscreteAbreu::extend(const std::vector<double>& q) const {
  std::vector<double> full(grid_.size(), 0.0);
  Eigen::Map<Eigen::VectorXd>(full.data(), grid_.size()) = E_ * as_vec(q);
  return full;
}

std::shared_ptr<SmoothPart> DiscreteAbreu::smooth_part(const std::vector<double>& q) const {
  return std::make_shared<SmoothPart>(grid_, extend(q));
}

std::vector<double> DiscreteAbreu::restrict_to_nodes(const SmoothPart& psi) const {
  std::vector<double> q(unknowns());
  const bool same = psi.grid() == grid_;
  for (int u = 0; u < unknowns(); ++u) q[u] = same ? psi.values()[nodes_[u]] : psi.closure_value(points_[u]);
  return q;
}

void DiscreteAbreu::node_hessians(const std::vector<double>& full, std::vector<Mat2>& H, Exec exec) const {
  const int n = unknowns();
  H.resize(n);
  auto one = [&](int u) {
    Mat2 M = hv_[u];
    for (int k = 0; k < 9; ++k) M += full[nodes_[u] + offset_[k]] * stencil_[k];
    H[u] = M;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int u = 0; u < n; ++u) one(u);
  } else {
    for (int u = 0; u < n; ++u) one(u);
  }
}

std::vector<double> DiscreteAbreu::logdet_gradient_full(const std::vector<Mat2>& H, Exec exec) const {
  const int n = unknowns(), nn = grid_.size();
  std::vector<Mat2> Hi(n);
  std::vector<double> G(nn, 0.0);
  auto inv = [&](int u) { Hi[u] = H[u].inverse(); };
  // gather: node m collects from every interior node whose stencil touches it
  auto gather = [&](int m) {
    const int i = m / grid_.ny, j = m % grid_.ny;
    double s = 0.0;
    int k = 0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj, ++k) {
        const int ii = i - di, jj = j - dj;
        if (ii < 0 || jj < 0 || ii >= grid_.nx || jj >= grid_.ny) continue;
        const int u = unknown_of_[grid_.flat(ii, jj)];
        if (u < 0) continue;
        const Mat2& M = stencil_[k];
        s -= w_ * (Hi[u](0, 0) * M(0, 0) + 2.0 * Hi[u](0, 1) * M(0, 1) + Hi[u](1, 1) * M(1, 1));
      }
    G[m] = s;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int u = 0; u < n; ++u) inv(u);
#pragma omp parallel for schedule(static)
    for (int m = 0; m < nn; ++m) gather(m);
  } else {
    for (int u = 0; u < n; ++u) inv(u);
    for (int m = 0; m < nn; ++m) gather(m);
  }
  return G;
}

double DiscreteAbreu::logdet_part(const std::vector<double>& q, Exec exec) const {
  std::vector<Mat2> H;
  node_hessians(extend(q), H, exec);
  const int n = unknowns();
  std::vector<double> ld(n);
  auto one = [&](int u) {
    const double det = H[u].determinant();
    ld[u] = (det > 0.0 && H[u](0, 0) > 0.0) ? std::log(det) : kNaN;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int u = 0; u < n; ++u) one(u);
  } else {
    for (int u = 0; u < n; ++u) one(u);
  }
  double s = 0.0;
  for (double v : ld) {
    if (std::isnan(v)) return kInf;
    s += v;
  }
  return -w_ * s;
}

double DiscreteAbreu::F(const std::vector<double>& q, Exec exec) const {
  const double ld = logdet_part(q, exec);
  if (!std::isfinite(ld)) return kInf;
  return ld - dot(g0_, q) - w_ * dot(src_, q);
}

std::vector<double> DiscreteAbreu::gradient(const std::vector<double>& q, Exec exec) const {
  std::vector<Mat2> H;
  node_hessians(extend(q), H, exec);
  const std::vector<double> G = logdet_gradient_full(H, exec);
  const int n = unknowns();
  std::vector<double> g(n);
  Eigen::Map<Eigen::VectorXd>(g.data(), n) = Et_ * as_vec(G);
  for (int u = 0; u < n; ++u) g[u] -= g0_[u] + w_ * src_[u];
  return g;
}

Eigen::SparseMatrix<double> DiscreteAbreu::hessian(const std::vector<double>& q) const {
  std::vector<Mat2> H;
  node_hessians(extend(q), H, Exec::Parallel);
  const int n = unknowns(), nn = grid_.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 81);
  for (int u = 0; u < n; ++u) {
    const Mat2 Hi = H[u].inverse();
    std::array<Mat2, 9> HM;
    for (int a = 0; a < 9; ++a) HM[a] = Hi * stencil_[a];
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b)
        trip.emplace_back(nodes_[u] + offset_[a], nodes_[u] + offset_[b], w_ * (HM[a] * HM[b]).trace());
  }
  Eigen::SparseMatrix<double> Hs(nn, nn);
  Hs.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> Ec = E_;
  Eigen::SparseMatrix<double> R = Ec.transpose() * Hs * Ec;
  R.makeCompressed();
  return R;
}

double DiscreteAbreu::convexity_margin(const std::vector<double>& q) const {
  std::vector<Mat2> H;
  node_hessians(extend(q), H, Exec::Parallel);
  double m = kInf;
  for (const Mat2& M : H) m = std::min(m, min_eig(M));
  return m;
}

double DiscreteAbreu::oscillation(const std::vector<double>& q) const {
  const std::vector<double> full = extend(q);
  const int r = reference();
  const int g = nodes_[r];
  const Vec2 pr = points_[r];
  const Vec2 grad = guillemin_gradient(poly_, pr) +
                    Vec2((full[g + grid_.ny] - full[g - grid_.ny]) / (2.0 * grid_.h.x()),
                         (full[g + 1] - full[g - 1]) / (2.0 * grid_.h.y()));
  const double ur = guillemin_value(poly_, pr) + q[r];
  double lo = kInf, hi = -kInf;
  for (int u = 0; u < unknowns(); ++u) {
    const double val = guillemin_value(poly_, points_[u]) + q[u] - ur - grad.dot(points_[u] - pr);
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  return hi - lo;
}

double DiscreteAbreu::residual_norm(const std::vector<double>& g) const {
  double m = 0.0;
  for (int u = 0; u < unknowns(); ++u)
    if (deep_[u]) m = std::max(m, std::abs(g[u]) / w_);
  return m;
}

Solver::Solver(const Polytope& poly, const SolverConfig& config)
    : poly_(poly), cfg_(config), prob_(poly, config.cells, config.fit_points, config.clamp_factor) {
  if (!(config.tol > 0.0)) throw DomainError("solver tolerance must be positive");
  if (!(config.backtrack > 0.0 && config.backtrack < 1.0)) throw DomainError("backtracking factor must lie in (0,1)");
  if (cfg_.absolute_F) {
    const auto v = guillemin(poly);
    const RefinedIntegral ld = integrate_interior_refined(
        poly, [&](const Vec2& xi) { return std::log(v->hessian(xi, 0.0).determinant()); }, cfg_.quadrature);
    const RefinedIntegral bd =
        integrate_boundary_refined(poly, [&](int, const Vec2& xi) { return v->closure_value(xi); }, cfg_.quadrature);
    base_shift_ = -ld.value + bd.value - prob_.logdet_part(std::vector<double>(prob_.unknowns(), 0.0));
  }
}

void Solver::set_target(const NodeFunction& K, bool balanced) {
  K_ = K;
  prob_.set_target(K, balanced);
  shift_ = 0.0;
  if (cfg_.absolute_F) {
    const auto v = guillemin(poly_);
    const RefinedIntegral kv = integrate_interior_refined(
        poly_, [&](const Vec2& xi) { return K(xi) * v->closure_value(xi); }, cfg_.quadrature);
    shift_ = base_shift_ - kv.value;
  }
}

void Solver::record(SolverState& s) const {
  s.convexity_margin = prob_.convexity_margin(s.q);
  s.oscillation = prob_.oscillation(s.q);
  s.history.push_back({s.iteration, s.residual, reported_F(s.F), s.step, s.oscillation, s.convexity_margin});
}

SolverState Solver::start(const std::vector<double>& q0) {
  if (!K_) throw DomainError("solver target not set");
  if (static_cast<int>(q0.size()) != prob_.unknowns()) throw DomainError("initial psi has the wrong size");
  SolverState s;
  s.q = q0;
  s.F = prob_.F(q0, cfg_.exec);
  if (!std::isfinite(s.F)) throw DomainError("initial potential is not convex on the solver grid");
  const std::vector<double> g = prob_.gradient(q0, cfg_.exec);
  s.residual = prob_.residual_norm(g);

  if (cfg_.initial_step > 0.0) {
    t0_ = cfg_.initial_step;
  } else if (!cfg_.newton) {
    // power iteration for the largest eigenvalue of Hess F_h / w
    const Eigen::SparseMatrix<double> HI = prob_.hessian(q0);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(HI.rows()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd y = HI * x;
      lam = x.dot(y);
      const double nrm = y.norm();
      if (!(nrm > 0.0)) break;
      x = y / nrm;
    }
    t0_ = lam > 0.0 ? prob_.weight() / lam : 1.0;
  } else {
    t0_ = 1.0;
  }

  // descent sign along the residual, probed once
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v) / prob_.weight());
  s.sign = -1;
  if (gmax > 0.0) {
    const double eps = std::min(0.1 * t0_, 1e-6 / gmax);
    std::vector<double> qp = q0, qm = q0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      qp[k] += eps * g[k] / prob_.weight();
      qm[k] -= eps * g[k] / prob_.weight();
    }
    s.sign = prob_.F(qp, cfg_.exec) < prob_.F(qm, cfg_.exec) ? 1 : -1;
  }
  s.converged = s.residual < cfg_.tol;
  record(s);
  return s;
}

SolverState Solver::descent_step(const SolverState& cur) const {
  if (cur.converged || cur.stalled) return cur;
  const int n = prob_.unknowns();
  const double w = prob_.weight();
  const std::vector<double> g = prob_.gradient(cur.q, cfg_.exec);
  std::vector<double> d(n, 0.0);
  double t = t0_;
  if (cfg_.newton) {
    Eigen::SparseMatrix<double> HI = prob_.hessian(cur.q);
    std::vector<char> pinned(n, 0);
    for (int p : prob_.pins()) pinned[p] = 1;
    for (int c = 0; c < HI.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(HI, c); it; ++it)
        if (pinned[it.row()] || pinned[it.col()]) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
    Eigen::VectorXd rhs(n);
    for (int u = 0; u < n; ++u) rhs[u] = pinned[u] ? 0.0 : -g[u];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(HI);
    SolverState s = cur;
    if (ldlt.info() != Eigen::Success) {
      s.stalled = true;
      s.diagnosis = "Newton system could not be factorized";
      return s;
    }
    const Eigen::VectorXd x = ldlt.solve(rhs);
    for (int u = 0; u < n; ++u) d[u] = x[u];
    t = 1.0;
  } else {
    for (int u = 0; u < n; ++u) d[u] = cur.sign * g[u] / w;
  }
  const double slope = dot(g, d);
  SolverState s = cur;
  if (!(slope < 0.0)) {
    s.stalled = true;
    s.diagnosis = "search direction is not a descent direction";
    return s;
  }
  const double t_first = t;
  std::vector<double> qn(n);
  for (;;) {
    for (int u = 0; u < n; ++u) qn[u] = cur.q[u] + t * d[u];
    const double Fn = prob_.F(qn, cfg_.exec);
    if (std::isfinite(Fn) && Fn < cur.F && Fn <= cur.F + 1e-4 * t * slope) {
      s.q = qn;
      s.F = Fn;
      break;
    }
    t *= cfg_.backtrack;
    if (t < cfg_.min_step * t_first) {
      s.stalled = true;
      s.diagnosis = "step underflow: no decrease of F found";
      return s;
    }
  }
  s.iteration = cur.iteration + 1;
  s.step = t;
  s.residual = prob_.residual_norm(prob_.gradient(s.q, cfg_.exec));
  s.converged = s.residual < cfg_.tol;
  record(s);
  return s;
}

SolverState Solver::run(SolverState s) const {
  while (!s.converged && !s.stalled && s.iteration < cfg_.max_iter) s = descent_step(s);
  if (!s.converged && !s.stalled) s.diagnosis = "iteration budget exhausted";
  return s;
}

ScalarField residual(const Polytope& poly, const std::shared_ptr<const SmoothPart>& psi, const NodeFunction& K,
                     double clamp, AbreuRoute route, Exec exec) {
  if (!psi) throw DomainError("residual: missing smooth part");
  const PotentialPtr u = symplectic_potential(poly, psi);
  const GridSpec& g = psi->grid();
  std::vector<Vec2> bad;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Vec2 p = g.node(i, j);
      if (!(poly.min_facet_value(p) >= clamp) || !(poly.min_facet_value(p) > 0.0)) continue;
      const Mat2 H = u->hessian(p, 0.0);
      if (!(H.determinant() > 0.0 && H(0, 0) > 0.0)) bad.push_back(p);
    }
  if (!bad.empty()) {
    char buf[96];
    std::string msg = "residual: Hessian not positive definite at " + std::to_string(bad.size()) + " node(s):";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 5); ++k) {
      std::snprintf(buf, sizeof buf, " (%.6g, %.6g)", bad[k].x(), bad[k].y());
      msg += buf;
    }
    throw DomainError(msg);
  }
  AbreuOptions ao;
  ao.route = route;
  ao.step = g.h;
  ao.clamp = route == AbreuRoute::Jet ? std::min(clamp, kThirdClamp) : 0.0;
  return sample_field(
      poly, g, clamp, [&](const Vec2& p) { return abreu_scalar(*u, p, ao) - K(p); }, exec);
}

namespace {

std::string probe_text(const AffineProbe& p) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "L_K(1) = %.6g, L_K(xi1) = %.6g, L_K(xi2) = %.6g", p.L1, p.Lx, p.Ly);
  return buf;
}

}  // namespace

SolveReport solve(const Polytope& poly, const TargetFunction& K, const SolverConfig& config,
                  const std::shared_ptr<const SmoothPart>& psi0) {
  SolveReport rep;
  rep.probe = affine_probe(poly, K, 1e-8);
  rep.edges = edge_nonvanishing(K, poly);
  if (!rep.edges.ok) rep.warnings.push_back("K vanishes identically on at least one edge");
  if (!rep.probe.balanced)
    rep.warnings.push_back("affine balance violated (" + probe_text(rep.probe) + "); S(u) = K has no solution");
  Solver sv(poly, config);
  sv.set_target([&K](const Vec2& p) { return K(p); }, rep.probe.balanced);
  std::vector<double> q0(sv.problem().unknowns(), 0.0);
  if (psi0) q0 = sv.problem().restrict_to_nodes(*psi0);
  SolverState s = sv.start(q0);
  s = sv.run(s);
  if (!s.converged && !rep.probe.balanced) s.diagnosis += "; cause: violated affine balance";
  rep.state = s;
  rep.balance_applied = sv.problem().balance_applied();
  rep.discrete_imbalance = sv.problem().discrete_imbalance();
  rep.step_cap = sv.step_cap();
  rep.psi = sv.problem().smooth_part(s.q);
  rep.potential = symplectic_potential(poly, rep.psi);
  return rep;
}

ContinuityPath continuity_solve(const Polytope& poly, const std::optional<TargetFunction>& K0,
                                const TargetFunction& K1, int steps, const SolverConfig& config) {
  if (steps < 1) throw DomainError("continuity path needs at least one step");
  ContinuityPath path;
  const EdgeNonvanishing en = edge_nonvanishing(K1, poly);
  if (!en.ok) path.warnings.push_back("K1 vanishes identically on at least one edge");
  const AffineProbe p1 = affine_probe(poly, K1, 1e-8);
  bool balanced = p1.balanced;
  if (!p1.balanced) path.warnings.push_back("K1 affine balance violated (" + probe_text(p1) + ")");
  if (K0) {
    const AffineProbe p0 = affine_probe(poly, *K0, 1e-8);
    balanced = balanced && p0.balanced;
    if (!p0.balanced) path.warnings.push_back("K0 affine balance violated (" + probe_text(p0) + ")");
  }
  const auto v = guillemin(poly);
  NodeFunction k0;
  if (K0) {
    const TargetFunction k0f = *K0;
    k0 = [k0f](const Vec2& p) { return k0f(p); };
  } else {
    k0 = [v](const Vec2& p) {
      AbreuOptions ao;
      ao.clamp = 0.0;
      return abreu_scalar(*v, p, ao);
    };
  }
  Solver sv(poly, config);
  std::vector<double> q(sv.problem().unknowns(), 0.0);
  const std::vector<double> zero = q;
  for (int k = 1; k <= steps; ++k) {
    const double t = double(k) / steps;
    const auto t0 = std::chrono::steady_clock::now();
    sv.set_target([t, &k0, &K1](const Vec2& p) { return t * K1(p) + (1.0 - t) * k0(p); }, balanced);
    ContinuityStep st;
    st.t = t;
    st.cold_initial_residual = sv.problem().residual_norm(sv.problem().gradient(zero));
    SolverState s = sv.start(q);
    st.initial_residual = s.residual;
    s = sv.run(s);
    st.iterations = s.iteration;
    st.final_residual = s.residual;
    st.converged = s.converged;
    st.history = s.history;
    for (std::size_t m = 1; m < s.history.size(); ++m)
      if (!(s.history[m].F < s.history[m - 1].F)) st.F_strictly_decreasing = false;
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    path.steps.push_back(st);
    if (!s.converged) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "step t = %.6g failed: %s (residual %.3g)", t, s.diagnosis.c_str(),
                    s.residual);
      path.diagnosis = buf;
      path.psi = sv.problem().smooth_part(q);
      return path;
    }
    q = s.q;
    path.last_good_t = t;
  }
  path.completed = true;
  path.psi = sv.problem().smooth_part(q);
  return path;
}

FirstVariationReport first_variation_check(const Solver& solver, const std::vector<double>& q, double eps,
                                           unsigned seed, double tol) {
  const DiscreteAbreu& pb = solver.problem();
  const int n = pb.unknowns();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(1.0, 6.0), phase(0.0, 6.283185307179586);
  struct Mode {
    double a, kx, ky, ph;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < 4; ++m) modes.push_back({amp(rng), freq(rng), freq(rng), phase(rng)});
  const double c = pb.clamp();
  auto cutoff = [&](const Vec2& p) {
    double s = 1.0;
    for (const Facet& f : pb.polytope().facets()) {
      const double r = std::clamp((f.eval(p) - c) / c, 0.0, 1.0);
      s *= r * r * r * (10.0 - 15.0 * r + 6.0 * r * r);
    }
    return s;
  };
  std::vector<double> d(n, 0.0);
  for (int u = 0; u < n; ++u) {
    if (!pb.deep()[u]) continue;
    const Vec2& p = pb.points()[u];
    double f = 0.0;
    for (const Mode& m : modes) f += m.a * std::sin(m.kx * p.x() + m.ky * p.y() + m.ph);
    d[u] = f * cutoff(p);
  }
  std::vector<double> qp = q, qm = q;
  for (int u = 0; u < n; ++u) {
    qp[u] += eps * d[u];
    qm[u] -= eps * d[u];
  }
  FirstVariationReport r;
  r.eps = eps;
  r.finite_difference = (pb.F(qp) - pb.F(qm)) / (2.0 * eps);
  const ScalarField R = residual(pb.polytope(), pb.smooth_part(q), solver.target(), pb.clamp());
  double s = 0.0;
  for (int u = 0; u < n; ++u) {
    if (d[u] == 0.0) continue;
    const double Ru = R.values[pb.nodes()[u]];
    if (std::isnan(Ru)) continue;
    s += pb.weight() * Ru * d[u];
  }
  r.predicted = s;  // descent sign -1: F' = sum w R dpsi
  r.relative_error = std::abs(r.finite_difference - r.predicted) / std::max(std::abs(r.predicted), 1e-300);
  r.pass = r.relative_error <= tol;
  return r;
}

std::string history_csv(const std::vector<HistoryEntry>& history) {
  std::string out = "iteration,residual,F,step,oscillation,convexity_margin\n";
  char buf[256];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.iteration, h.residual, h.F, h.step,
                  h.oscillation, h.convexity_margin);
    out += buf;
  }
  return out;
}

}  // namespace toric
