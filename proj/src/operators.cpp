#include "toric/operators.hpp"

#include "toric/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace toric {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Mat2 slice3(const Tensor3& t, int k) {
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = t[ix3(i, j, k)];
  return m;
}

Mat2 slice4(const Tensor4& t, int k, int l) {
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = t[ix4(i, j, k, l)];
  return m;
}

Mat2 cofactor(const Mat2& H) {
  Mat2 U;
  U << H(1, 1), -H(0, 1), -H(1, 0), H(0, 0);
  return U;
}

void require_pd(const Mat2& H, const Vec2& xi) {
  if (!(H(0, 0) > 0.0) || !(H.determinant() > 0.0))
    throw DomainError("Hessian not positive definite at (" + std::to_string(xi.x()) + ", " +
                      std::to_string(xi.y()) + ")");
}

CurvatureBundle bundle_jet(const Potential& u, const Vec2& xi, double clamp) {
  const Jet J = u.jet(xi, 4, clamp);
  require_pd(J.hess, xi);
  CurvatureBundle b;
  b.hess = J.hess;
  b.cofactor = cofactor(J.hess);
  const double det = J.hess.determinant();
  b.w = 1.0 / det;
  const Mat2 Hi = J.hess.inverse();
  Mat2 T[2], HT[2];
  for (int k = 0; k < 2; ++k) {
    T[k] = slice3(J.d3, k);
    HT[k] = Hi * T[k];
  }
  double S = 0.0, S_alt = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      const Mat2 Tkl = slice4(J.d4, k, l);
      const double dkl_w =
          b.w * (HT[k].trace() * HT[l].trace() + (HT[l] * HT[k]).trace() - (Hi * Tkl).trace());
      S -= b.cofactor(k, l) * dkl_w;
      const Mat2 dkl_inv = HT[l] * HT[k] * Hi + HT[k] * HT[l] * Hi - Hi * Tkl * Hi;
      S_alt -= dkl_inv(k, l);
    }
  b.S = S;
  b.S_alt = S_alt;
  return b;
}

CurvatureBundle bundle_fd(const Potential& u, const Vec2& xi, const AbreuOptions& opt) {
  const double h1 = opt.step.x(), h2 = opt.step.y();
  const Mat2 Hc = u.hessian(xi, opt.clamp);
  require_pd(Hc, xi);
  Mat2 inv[3][3];
  double w[3][3];
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const Vec2 p = xi + Vec2(a * h1, b * h2);
      const Mat2 H = (a == 0 && b == 0) ? Hc : u.hessian(p, 0.0);
      require_pd(H, p);
      inv[a + 1][b + 1] = H.inverse();
      w[a + 1][b + 1] = 1.0 / H.determinant();
    }
  auto d11 = [&](auto g) { return (g(2, 1) - 2.0 * g(1, 1) + g(0, 1)) / (h1 * h1); };
  auto d22 = [&](auto g) { return (g(1, 2) - 2.0 * g(1, 1) + g(1, 0)) / (h2 * h2); };
  auto d12 = [&](auto g) { return (g(2, 2) - g(2, 0) - g(0, 2) + g(0, 0)) / (4.0 * h1 * h2); };
  CurvatureBundle b;
  b.hess = Hc;
  b.cofactor = cofactor(Hc);
  b.w = 1.0 / Hc.determinant();
  b.S = -(d11([&](int a, int c) { return inv[a][c](0, 0); }) + d22([&](int a, int c) { return inv[a][c](1, 1); }) +
          2.0 * d12([&](int a, int c) { return inv[a][c](0, 1); }));
  auto W = [&](int a, int c) { return w[a][c]; };
  b.S_alt = -(b.cofactor(0, 0) * d11(W) + b.cofactor(1, 1) * d22(W) + 2.0 * b.cofactor(0, 1) * d12(W));
  return b;
}

}  // namespace

CurvatureBundle curvature_bundle(const Potential& u, const Vec2& xi, const AbreuOptions& opt) {
  return opt.route == AbreuRoute::Jet ? bundle_jet(u, xi, opt.clamp) : bundle_fd(u, xi, opt);
}

double abreu_scalar(const Potential& u, const Vec2& xi, const AbreuOptions& opt) {
  return curvature_bundle(u, xi, opt).S;
}

AffineInvariants affine_invariants(const Potential& u, const Vec2& xi, double clamp) {
  const Jet J = u.jet(xi, 3, clamp);
  require_pd(J.hess, xi);
  const Mat2 Hi = J.hess.inverse();
  AffineInvariants a;
  a.rho = std::pow(J.hess.determinant(), 0.25);
  Vec2 g;
  for (int k = 0; k < 2; ++k) g[k] = (Hi * slice3(J.d3, k)).trace();  // d_k log det
  a.Phi = g.dot(Hi * g) / 16.0;
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 2; ++m)
            for (int n = 0; n < 2; ++n)
              s += Hi(i, l) * Hi(j, m) * Hi(k, n) * J.d3[ix3(i, j, k)] * J.d3[ix3(l, m, n)];
  a.J = s / 8.0;
  a.Theta = a.J + a.Phi;
  return a;
}

PotentialPtr affine_rescale(const PotentialPtr& u, const Mat2& A, double lambda, const Vec2& b) {
  return std::make_shared<RescaledPotential>(u, A, lambda, b);
}

RicciData ricci_at(const Potential& u, const Vec2& xi, double clamp) {
  const Jet J = u.jet(xi, 4, clamp);
  require_pd(J.hess, xi);
  const Mat2 Hi = J.hess.inverse();
  Mat2 HT[2];
  for (int k = 0; k < 2; ++k) HT[k] = Hi * slice3(J.d3, k);
  Vec2 dL;       // xi-derivatives of log det Hess f = -log det Hess u
  Mat2 ddL;
  for (int a = 0; a < 2; ++a) {
    dL[a] = -HT[a].trace();
    for (int b = 0; b < 2; ++b) ddL(a, b) = (HT[b] * HT[a]).trace() - (Hi * slice4(J.d4, a, b)).trace();
  }
  // d/dx_i = Hi_ia d/dxi_a
  Mat2 D2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int a = 0; a < 2; ++a) {
        const Mat2 dHi = -HT[a] * Hi;  // d_a (Hess u)^{-1}
        double inner = 0.0;
        for (int b = 0; b < 2; ++b) inner += dHi(j, b) * dL[b] + Hi(j, b) * ddL(a, b);
        s += Hi(i, a) * inner;
      }
      D2(i, j) = s;
    }
  RicciData r;
  r.ric = -0.5 * (D2 + D2.transpose());
  const Mat2& F = J.hess;  // inverse of Hess f
  r.norm = std::sqrt(std::max(0.0, (F * r.ric * F * r.ric).trace()));
  r.S = (F * r.ric).trace();
  return r;
}

DualGrid legendre_grid(const Potential& u, const GridSpec& xgrid) {
  DualGrid d;
  d.grid = xgrid;
  const int n = xgrid.size();
  d.xi.assign(n, Vec2::Zero());
  d.f.assign(n, kNaN);
  d.logW.assign(n, kNaN);
  d.finv.assign(n, Mat2::Zero());
  d.valid.assign(n, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (int k = 0; k < n; ++k) {
    const Vec2 x = xgrid.node(k / xgrid.ny, k % xgrid.ny);
    try {
      const LegendreResult r = legendre(u, x);
      const Mat2 H = u.hessian(r.xi, 0.0);
      d.xi[k] = r.xi;
      d.f[k] = r.f;
      d.finv[k] = H;
      d.logW[k] = -std::log(H.determinant());
      d.valid[k] = 1;
    } catch (const DomainError&) {
    }
  }
  return d;
}

namespace {

bool stencil_ok(const DualGrid& d, int i, int j, int r) {
  const GridSpec& g = d.grid;
  if (i - r < 0 || j - r < 0 || i + r >= g.nx || j + r >= g.ny) return false;
  for (int a = -r; a <= r; a += r)
    for (int b = -r; b <= r; b += r)
      if (!d.valid[g.flat(i + a, j + b)]) return false;
  return true;
}

Mat2 hess_fd(const std::vector<double>& L, const GridSpec& g, int i, int j, int r) {
  const double h1 = r * g.h.x(), h2 = r * g.h.y();
  auto at = [&](int a, int b) { return L[g.flat(i + a, j + b)]; };
  Mat2 D;
  D(0, 0) = (at(r, 0) - 2 * at(0, 0) + at(-r, 0)) / (h1 * h1);
  D(1, 1) = (at(0, r) - 2 * at(0, 0) + at(0, -r)) / (h2 * h2);
  D(0, 1) = D(1, 0) = (at(r, r) - at(r, -r) - at(-r, r) + at(-r, -r)) / (4 * h1 * h2);
  return D;
}

}  // namespace

RicciGrid ricci_logaffine(const DualGrid& dual) {
  const GridSpec& g = dual.grid;
  RicciGrid R;
  R.grid = g;
  const int n = g.size();
  R.ric.assign(n, Mat2::Zero());
  R.norm.assign(n, kNaN);
  R.S.assign(n, kNaN);
  R.valid.assign(n, 0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      if (!stencil_ok(dual, i, j, 1)) continue;
      const int k = g.flat(i, j);
      const Mat2 ric = -hess_fd(dual.logW, g, i, j, 1);
      const Mat2& F = dual.finv[k];
      R.ric[k] = ric;
      R.norm[k] = std::sqrt(std::max(0.0, (F * ric * F * ric).trace()));
      R.S[k] = (F * ric).trace();
      R.valid[k] = 1;
      R.max_abs_ric = std::max(R.max_abs_ric, ric.cwiseAbs().maxCoeff());
      if (stencil_ok(dual, i, j, 2)) {
        const Mat2 ric2 = -hess_fd(dual.logW, g, i, j, 2);
        R.step_change = std::max(R.step_change, (ric - ric2).cwiseAbs().maxCoeff());
      }
    }
  R.coarse = R.step_change > 1e-2 * std::max(R.max_abs_ric, 1e-300);
  return R;
}

MetricDiagnostics metric_diagnostics(const Potential& f, const Potential& g, const GridSpec& xgrid) {
  const DualGrid df = legendre_grid(f, xgrid);
  const DualGrid dg = legendre_grid(g, xgrid);
  const RicciGrid rf = ricci_logaffine(df);
  MetricDiagnostics m;
  m.grid = xgrid;
  const int n = xgrid.size();
  m.W.assign(n, kNaN);
  m.Psi.assign(n, kNaN);
  m.ricci_norm = rf.norm;
  m.H.assign(n, kNaN);
  m.max_H = -std::numeric_limits<double>::infinity();
  m.min_H = std::numeric_limits<double>::infinity();
  for (int i = 0; i < xgrid.nx; ++i)
    for (int j = 0; j < xgrid.ny; ++j) {
      const int k = xgrid.flat(i, j);
      if (!df.valid[k]) continue;
      m.W[k] = std::exp(df.logW[k]);
      if (dg.valid[k]) {
        m.H[k] = std::exp(dg.logW[k] - df.logW[k]);
        m.max_H = std::max(m.max_H, m.H[k]);
        m.min_H = std::min(m.min_H, m.H[k]);
      }
      if (stencil_ok(df, i, j, 1)) {
        const Vec2 grad((df.logW[xgrid.flat(i + 1, j)] - df.logW[xgrid.flat(i - 1, j)]) / (2 * xgrid.h.x()),
                        (df.logW[xgrid.flat(i, j + 1)] - df.logW[xgrid.flat(i, j - 1)]) / (2 * xgrid.h.y()));
        m.Psi[k] = grad.dot(df.finv[k] * grad);
      }
    }
  return m;
}

namespace {

double segment_length(const Potential& u, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const GaussRule& g = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const Mat2 G = u.hessian(a + g.x[k] * d, 0.0);
    s += g.w[k] * std::sqrt(std::max(0.0, d.dot(G * d)));
  }
  return s;
}

// Straight segment ending on the boundary: the metric blows up like 1/l there,
// so substitute s = 1 - t^2 to remove the inverse square root.
double terminal_length(const Potential& u, const Vec2& a, const Vec2& foot) {
  const Vec2 d = foot - a;
  const GaussRule& g = gauss_legendre(16);
  double s = 0.0;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double t = g.x[k];
    const Mat2 G = u.hessian(a + (1.0 - t * t) * d, 0.0);
    s += g.w[k] * 2.0 * t * std::sqrt(std::max(0.0, d.dot(G * d)));
  }
  return s;
}

struct GraphSetup {
  GridSpec grid;
  std::vector<char> inside;
};

GraphSetup graph_setup(const Potential& u, const Polytope& poly, int cells) {
  GraphSetup s;
  s.grid = polytope_grid(poly, cells, 0);
  s.inside.assign(s.grid.size(), 0);
  for (int k = 0; k < s.grid.size(); ++k) {
    const Vec2 p = s.grid.node(k / s.grid.ny, k % s.grid.ny);
    s.inside[k] = poly.min_facet_value(p) > 1e-12 && u.interior_margin(p) > 1e-12;
  }
  return s;
}

std::vector<double> dijkstra_from_point(const Potential& u, const GraphSetup& s, const Vec2& p, bool sixteen) {
  const GridSpec& g = s.grid;
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  const int pi = int(std::lround((p.x() - g.origin.x()) / g.h.x()));
  const int pj = int(std::lround((p.y() - g.origin.y()) / g.h.y()));
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      const int i = pi + a, j = pj + b;
      if (i < 0 || j < 0 || i >= g.nx || j >= g.ny || !s.inside[g.flat(i, j)]) continue;
      const double d0 = segment_length(u, p, g.node(i, j));
      if (d0 < dist[g.flat(i, j)]) {
        dist[g.flat(i, j)] = d0;
        pq.push({d0, g.flat(i, j)});
      }
    }
  if (pq.empty()) throw DomainError("calabi_distance: grid too coarse, no interior node near the source");
  std::vector<std::pair<int, int>> offs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  if (sixteen)
    for (auto o : std::vector<std::pair<int, int>>{{1, 2}, {2, 1}, {-1, 2}, {-2, 1}, {1, -2}, {2, -1}, {-1, -2}, {-2, -1}})
      offs.push_back(o);
  while (!pq.empty()) {
    auto [d, k] = pq.top();
    pq.pop();
    if (d > dist[k]) continue;
    const int i = k / g.ny, j = k % g.ny;
    const Vec2 a = g.node(i, j);
    for (auto [di, dj] : offs) {
      const int ni = i + di, nj = j + dj;
      if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
      const int nk = g.flat(ni, nj);
      if (!s.inside[nk]) continue;
      const Vec2 b = g.node(ni, nj);
      const Vec2 e = b - a;
      const Mat2 G = u.hessian(0.5 * (a + b), 0.0);
      const double nd = d + std::sqrt(std::max(0.0, e.dot(G * e)));
      if (nd < dist[nk]) {
        dist[nk] = nd;
        pq.push({nd, nk});
      }
    }
  }
  return dist;
}

DistanceResult distance_once(const Potential& u, const Polytope& poly, const Vec2& p, const Vec2* target,
                             int cells, bool sixteen) {
  if (!(poly.min_facet_value(p) > 0.0)) throw DomainError("calabi_distance: source point outside the polytope");
  if (target && !(poly.min_facet_value(*target) > 0.0))
    throw DomainError("calabi_distance: target point outside the polytope");
  const GraphSetup s = graph_setup(u, poly, cells);
  const std::vector<double> dist = dijkstra_from_point(u, s, p, sixteen);
  const GridSpec& g = s.grid;
  DistanceResult r;
  r.nodes = int(std::count(s.inside.begin(), s.inside.end(), 1));
  double best = std::numeric_limits<double>::infinity();
  if (target) {
    const Vec2& t = *target;
    if ((t - p).cwiseQuotient(g.h).cwiseAbs().maxCoeff() <= 2.0) best = segment_length(u, p, t);
    const int ti = int(std::lround((t.x() - g.origin.x()) / g.h.x()));
    const int tj = int(std::lround((t.y() - g.origin.y()) / g.h.y()));
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        const int i = ti + a, j = tj + b;
        if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) continue;
        const int k = g.flat(i, j);
        if (!s.inside[k] || !std::isfinite(dist[k])) continue;
        best = std::min(best, dist[k] + segment_length(u, g.node(i, j), t));
      }
  } else {
    for (int k = 0; k < g.size(); ++k) {
      if (!s.inside[k] || !std::isfinite(dist[k])) continue;
      const Vec2 a = g.node(k / g.ny, k % g.ny);
      for (const auto& e : poly.edges()) {
        const Vec2 d = e.b - e.a;
        const double t = (a - e.a).dot(d) / d.squaredNorm();
        if (t <= 0.0 || t >= 1.0) continue;
        const Vec2 foot = e.a + t * d;
        best = std::min(best, dist[k] + terminal_length(u, a, foot));
      }
    }
  }
  if (!std::isfinite(best)) throw DomainError("calabi_distance: target not reached on this grid");
  r.distance = best;
  return r;
}

}  // namespace

DistanceResult calabi_distance(const Potential& u, const Polytope& poly, const Vec2& p, const Vec2& target,
                               const DistanceOptions& opt) {
  DistanceResult r = distance_once(u, poly, p, &target, opt.cells, opt.sixteen_neighbours);
  if (opt.estimate_error && opt.cells >= 8)
    r.error_estimate = std::abs(r.distance - distance_once(u, poly, p, &target, opt.cells / 2, opt.sixteen_neighbours).distance);
  return r;
}

DistanceResult calabi_distance_to_boundary(const Potential& u, const Polytope& poly, const Vec2& p,
                                           const DistanceOptions& opt) {
  DistanceResult r = distance_once(u, poly, p, nullptr, opt.cells, opt.sixteen_neighbours);
  if (opt.estimate_error && opt.cells >= 8)
    r.error_estimate = std::abs(r.distance - distance_once(u, poly, p, nullptr, opt.cells / 2, opt.sixteen_neighbours).distance);
  return r;
}

InteriorEstimateReport interior_estimate_monitor(const Potential& u, const Polytope& poly,
                                                 const std::vector<Vec2>& samples, const DistanceOptions& opt) {
  InteriorEstimateReport rep;
  for (const Vec2& p : samples) {
    InteriorEstimateSample s;
    s.p = p;
    s.Theta = affine_invariants(u, p).Theta;
    s.S = abreu_scalar(u, p);
    s.ricci_norm = ricci_at(u, p).norm;
    DistanceOptions o = opt;
    o.estimate_error = false;
    s.distance = calabi_distance_to_boundary(u, poly, p, o).distance;
    s.product = (s.Theta + std::abs(s.S) + s.ricci_norm) * s.distance * s.distance;
    rep.sup = std::max(rep.sup, s.product);
    rep.samples.push_back(s);
  }
  return rep;
}

ScalarField sample_field(const Polytope& poly, const GridSpec& grid, double clamp,
                         const std::function<double(const Vec2&)>& f, Exec exec) {
  ScalarField out;
  out.grid = grid;
  const int n = grid.size();
  out.values.assign(n, kNaN);
  auto one = [&](int k) {
    const Vec2 p = grid.node(k / grid.ny, k % grid.ny);
    if (!(poly.min_facet_value(p) >= clamp) || !(poly.min_facet_value(p) > 0.0)) return;
    try {
      out.values[k] = f(p);
    } catch (const DomainError&) {
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 32)
    for (int k = 0; k < n; ++k) one(k);
  } else {
    for (int k = 0; k < n; ++k) one(k);
  }
  return out;
}

}  // namespace toric
