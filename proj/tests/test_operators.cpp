#include <doctest.h>

#include "toric/operators.hpp"

#include <cmath>
#include <random>

using namespace toric;

namespace {

std::vector<Vec2> samples(const Polytope& P, int n, double margin, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p(P.lower().x() + U(rng) * (P.upper().x() - P.lower().x()),
                 P.lower().y() + U(rng) * (P.upper().y() - P.lower().y()));
    if (P.min_facet_value(p) >= margin) out.push_back(p);
  }
  return out;
}

// S = -sum d_ij u^{ij} by second differences of a closed-form inverse Hessian.
template <class Inv>
double S_from_inverse(const Inv& uinv, const Vec2& p, double h = 1e-3) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec2 ei = Vec2::Unit(i) * h, ej = Vec2::Unit(j) * h;
      s -= (uinv(p + ei + ej)(i, j) - uinv(p + ei - ej)(i, j) - uinv(p - ei + ej)(i, j) +
            uinv(p - ei - ej)(i, j)) /
           (4 * h * h);
    }
  return s;
}

Mat2 simplex_inverse(const Vec2& x) {
  Mat2 m;
  m << x.x() - x.x() * x.x(), -x.x() * x.y(), -x.x() * x.y(), x.y() - x.y() * x.y();
  return m;
}

Mat2 square_inverse(const Vec2& x) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = x.x() * (1 - x.x());
  m(1, 1) = x.y() * (1 - x.y());
  return m;
}

// 8th-order central first derivative of the Hessian along axis k
Mat2 dhess(const Potential& u, const Vec2& p, int k, double h) {
  static const double c[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  Mat2 d = Mat2::Zero();
  for (int m = 1; m <= 4; ++m) {
    const Vec2 e = Vec2::Unit(k) * (m * h);
    d += c[m - 1] * (u.hessian(p + e, 0.0) - u.hessian(p - e, 0.0));
  }
  return d / h;
}

double theta_oracle(const Potential& u, const Vec2& p, double h) {
  const Mat2 G = u.hessian(p, 0.0), Gi = G.inverse();
  double T[2][2][2];
  for (int k = 0; k < 2; ++k) {
    const Mat2 d = dhess(u, p, k, h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) T[k][i][j] = d(i, j);
  }
  // grad log rho = -(1/4) grad log det G
  Vec2 g;
  for (int k = 0; k < 2; ++k) g[k] = -0.25 * (Gi(0, 0) * T[k][0][0] + 2 * Gi(0, 1) * T[k][0][1] + Gi(1, 1) * T[k][1][1]);
  const double Phi = g.dot(Gi * g);
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 2; ++m)
            for (int n = 0; n < 2; ++n) s += Gi(i, l) * Gi(j, m) * Gi(k, n) * T[i][j][k] * T[l][m][n];
  return Phi + s / 8.0;
}

}  // namespace

TEST_CASE("closed-form oracles for the Guillemin inverse Hessians") {
  const auto vt = guillemin(standard_polytope("simplex"));
  const auto vs = guillemin(standard_polytope("square"));
  for (const Vec2& p : samples(standard_polytope("simplex"), 20, 0.05, 1)) {
    CHECK((vt->hessian(p).inverse() - simplex_inverse(p)).norm() < 1e-12);
    CHECK(S_from_inverse(simplex_inverse, p) == doctest::Approx(6.0).epsilon(1e-8));
  }
  for (const Vec2& p : samples(standard_polytope("square"), 20, 0.05, 2)) {
    CHECK((vs->hessian(p).inverse() - square_inverse(p)).norm() < 1e-12);
    CHECK(S_from_inverse(square_inverse, p) == doctest::Approx(4.0).epsilon(1e-8));
  }
}

TEST_CASE("Abreu scalar of the Guillemin potentials") {
  for (const char* name : {"simplex", "square"}) {
    const Polytope P = standard_polytope(name);
    const auto v = guillemin(P);
    for (const Vec2& p : samples(P, 200, 0.05, 7)) {
      const double oracle = std::string(name) == "simplex" ? S_from_inverse(simplex_inverse, p)
                                                            : S_from_inverse(square_inverse, p);
      const CurvatureBundle b = curvature_bundle(*v, p);
      CHECK(b.S == doctest::Approx(oracle).epsilon(1e-7));
      CHECK(std::abs(b.S - b.S_alt) < 1e-9);
      CHECK((b.cofactor * b.hess - b.hess.determinant() * Mat2::Identity()).norm() < 1e-9 * b.hess.norm() * b.hess.norm());
      CHECK(b.w * b.hess.determinant() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("composite difference route agrees with the jet route") {
  const Polytope P = standard_polytope("hirzebruch");
  const auto v = guillemin(P);
  AbreuOptions fd;
  fd.route = AbreuRoute::CompositeFD;
  fd.step = Vec2(1e-3, 1e-3);
  for (const Vec2& p : samples(P, 30, 0.05, 3))
    CHECK(abreu_scalar(*v, p, fd) == doctest::Approx(abreu_scalar(*v, p)).epsilon(1e-5));
}

TEST_CASE("quadratics are flat") {
  Mat2 Q;
  Q << 2, 0, 0, 3;
  const QuadraticPotential q(Q, Vec2(0.1, 0.2), 0.3);
  const AffineInvariants a = affine_invariants(q, Vec2(0.4, 0.1));
  CHECK(a.Theta == 0.0);
  CHECK(a.Phi == 0.0);
  CHECK(abreu_scalar(q, Vec2(0.4, 0.1)) == 0.0);
  const QuadraticPotential e(Mat2::Identity(), Vec2::Zero(), 0.0);
  CHECK(affine_invariants(e, Vec2(0.2, 0.2)).rho == doctest::Approx(1.0));
}

TEST_CASE("Theta at the simplex barycentre against a difference oracle") {
  const auto v = guillemin(standard_polytope("simplex"));
  const Vec2 b(1.0 / 3, 1.0 / 3);
  const double o1 = theta_oracle(*v, b, 1e-2), o2 = theta_oracle(*v, b, 5e-3);
  const double oracle = o2 + (o2 - o1) / 255.0;  // Richardson for an h^8 error
  const AffineInvariants a = affine_invariants(*v, b);
  CHECK(a.Theta > 0.0);
  CHECK(a.Theta == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(a.Theta == a.J + a.Phi);
}

TEST_CASE("affine transformation rules over random draws") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-1.5, 1.5), L(0.5, 2.0);
  const Polytope P = standard_polytope("hirzebruch");
  const auto v = guillemin(P);
  const auto pts = samples(P, 50, 0.1, 9);
  int draws = 0;
  while (draws < 50) {
    Mat2 A;
    A << U(rng), U(rng), U(rng), U(rng);
    if (std::abs(A.determinant()) < 0.2) continue;
    const double lam = L(rng);
    const Vec2 b(U(rng), U(rng));
    const auto us = affine_rescale(v, A, lam, b);
    const Vec2 p = pts[draws];
    const Vec2 ps = A * p + b;
    const Mat2 H = v->hessian(p), Hs = us->hessian(ps);
    CHECK(Hs.determinant() == doctest::Approx(lam * lam / (A.determinant() * A.determinant()) * H.determinant()).epsilon(1e-7));
    const Vec2 X(U(rng), U(rng));
    CHECK((A * X).dot(Hs * (A * X)) == doctest::Approx(lam * X.dot(H * X)).epsilon(1e-7));
    CHECK(affine_invariants(*us, ps).Theta == doctest::Approx(affine_invariants(*v, p).Theta / lam).epsilon(1e-7));
    CHECK(abreu_scalar(*us, ps) == doctest::Approx(abreu_scalar(*v, p) / lam).epsilon(1e-7));
    ++draws;
  }
}

TEST_CASE("rescaling examples") {
  const auto q = std::make_shared<QuadraticPotential>(Mat2::Identity(), Vec2::Zero(), 0.0);
  CHECK(affine_rescale(q, Mat2::Identity(), 2.0)->hessian(Vec2(0.1, 0.1)).determinant() == doctest::Approx(4.0));
  const auto v = guillemin(standard_polytope("simplex"));
  CHECK(abreu_scalar(*affine_rescale(v, Mat2::Identity(), 3.0), Vec2(0.2, 0.3)) == doctest::Approx(2.0).epsilon(1e-10));
  Mat2 A;
  A << 1, 1, 0, 1;
  const auto w = affine_rescale(v, A, 1.0);
  const Vec2 p(0.25, 0.4);
  CHECK(affine_invariants(*w, A * p).Theta == doctest::Approx(affine_invariants(*v, p).Theta).epsilon(1e-12));
}

TEST_CASE("S ignores added affine functions") {
  const auto v = guillemin(standard_polytope("square"));
  const auto a = std::make_shared<QuadraticPotential>(Mat2::Zero(), Vec2(0.7, -1.1), 3.0);
  const SumPotential s({v, a});
  CHECK(abreu_scalar(s, Vec2(0.3, 0.8)) == doctest::Approx(abreu_scalar(*v, Vec2(0.3, 0.8))).epsilon(1e-14));
}

TEST_CASE("log-affine Ricci and diagnostics") {
  const Polytope P = standard_polytope("square");
  const auto v = guillemin(P);
  GridSpec x;
  x.nx = x.ny = 41;
  x.h = Vec2(0.1, 0.1);
  x.origin = Vec2(-2, -2);
  const DualGrid d = legendre_grid(*v, x);
  const RicciGrid r = ricci_logaffine(d);
  int checked = 0;
  for (int k = 0; k < x.size(); ++k) {
    if (!r.valid[k]) continue;
    CHECK(r.S[k] == doctest::Approx(4.0).epsilon(1e-2));
    CHECK(r.ric[k](0, 0) > 0.0);
    CHECK(r.S[k] == doctest::Approx(ricci_at(*v, d.xi[k]).S).epsilon(1e-2));
    ++checked;
  }
  CHECK(checked > 1000);
  // W w = 1 at matched points
  for (int k = 0; k < x.size(); k += 37)
    if (d.valid[k]) CHECK(std::exp(d.logW[k]) * v->hessian(d.xi[k], 0.0).determinant() == doctest::Approx(1.0).epsilon(1e-8));

  const MetricDiagnostics same = metric_diagnostics(*v, *v, x);
  CHECK(same.max_H == doctest::Approx(1.0));
  CHECK(same.min_H == doctest::Approx(1.0));
  // u(xi) = 2 v(xi/2) has Legendre dual 2 f_v on the same x-grid
  const auto two = affine_rescale(v, 2.0 * Mat2::Identity(), 2.0);
  const MetricDiagnostics m2 = metric_diagnostics(*two, *v, x);
  CHECK(m2.max_H == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(m2.min_H == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("Calabi distance in the Euclidean metric") {
  const Polytope P = standard_polytope("square");
  const QuadraticPotential e(Mat2::Identity(), Vec2::Zero(), 0.0, P);
  DistanceOptions o;
  o.cells = 64;
  const DistanceResult r = calabi_distance(e, P, Vec2(0.5, 0.5), Vec2(0.7, 0.5), o);
  CHECK(r.distance == doctest::Approx(0.2).epsilon(1e-2));
  const QuadraticPotential f(4.0 * Mat2::Identity(), Vec2::Zero(), 0.0, P);
  CHECK(calabi_distance(f, P, Vec2(0.5, 0.5), Vec2(0.7, 0.5), o).distance == doctest::Approx(2 * r.distance).epsilon(1e-9));
  const auto v = guillemin(P);
  // exact: int_0^{1/2} dt / sqrt(t(1-t)) = pi/2 along xi2 = 1/2, and no path is shorter
  double prev = INFINITY, d = 0.0;
  for (int cells : {32, 64, 128}) {
    DistanceOptions c = o;
    c.cells = cells;
    d = calabi_distance_to_boundary(*v, P, Vec2(0.5, 0.5), c).distance;
    CHECK(std::isfinite(d));
    CHECK(std::abs(d - M_PI / 2) < prev);
    prev = std::abs(d - M_PI / 2);
  }
  CHECK(d == doctest::Approx(M_PI / 2).epsilon(0.03));
}

TEST_CASE("interior estimate monitor") {
  const Polytope P = standard_polytope("square");
  const QuadraticPotential e(Mat2::Identity(), Vec2::Zero(), 0.0, P);
  const InteriorEstimateReport r = interior_estimate_monitor(e, P, {Vec2(0.5, 0.5), Vec2(0.3, 0.6)});
  CHECK(r.sup == 0.0);
  const auto v = guillemin(P);
  std::vector<Vec2> diag;
  for (double t : {0.3, 0.2, 0.1, 0.05}) diag.emplace_back(t, t);
  DistanceOptions o;
  o.cells = 32;
  const InteriorEstimateReport g = interior_estimate_monitor(*v, P, diag, o);
  CHECK(std::isfinite(g.sup));
  CHECK(g.sup > 0.0);
}

TEST_CASE("field sampling and CSV export") {
  const Polytope P = standard_polytope("square");
  const auto v = guillemin(P);
  const GridSpec g = polytope_grid(P, 8, 0);
  const ScalarField s = sample_field(P, g, kThirdClamp, [&](const Vec2& p) { return abreu_scalar(*v, p); });
  const ScalarField t = sample_field(P, g, kThirdClamp, [&](const Vec2& p) { return abreu_scalar(*v, p); }, Exec::Serial);
  int finite = 0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (std::isnan(s.values[k])) {
      CHECK(std::isnan(t.values[k]));
      continue;
    }
    ++finite;
    CHECK(s.values[k] == t.values[k]);
    CHECK(s.values[k] == doctest::Approx(4.0).epsilon(1e-9));
  }
  CHECK(finite == 49);
  const std::string csv = field_csv(s);
  CHECK(csv.rfind("xi1,xi2,value\n", 0) == 0);
  CHECK(csv.find("NaN") != std::string::npos);
  CHECK(csv == field_csv(s));
  CHECK(field_csv(ScalarField{g, {}}) == "xi1,xi2,value\n");
}
