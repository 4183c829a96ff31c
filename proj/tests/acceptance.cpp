// Acceptance run: one PASS/FAIL line per criterion, with wall time.
#include "toric/edge_sign.hpp"
#include "toric/functionals.hpp"
#include "toric/solver.hpp"
#include "toric/stability.hpp"
#include "toric/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace toric;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(int id, const std::string& title, const std::function<std::string(bool&)>& body) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    detail = body(ok);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("[%s] %2d %s (%.2fs) %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), sec, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char b[128];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::vector<Vec2> random_interior(const Polytope& P, int n, double margin, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p(P.lower().x() + (P.upper().x() - P.lower().x()) * U(rng),
                 P.lower().y() + (P.upper().y() - P.lower().y()) * U(rng));
    if (P.min_facet_value(p) >= margin) out.push_back(p);
  }
  return out;
}

// S = -sum d_ij u^{ij} from a closed-form inverse Hessian, by second differences.
double S_from_inverse(const std::function<Mat2(const Vec2&)>& inv, const Vec2& p) {
  const double h = 1e-3;
  auto e = [](int i) { return i == 0 ? Vec2(1, 0) : Vec2(0, 1); };
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec2 a = h * e(i), b = h * e(j);
      s -= (inv(p + a + b)(i, j) - inv(p + a - b)(i, j) - inv(p - a + b)(i, j) + inv(p - a - b)(i, j)) / (4 * h * h);
    }
  return s;
}

Mat2 simplex_inverse(const Vec2& x) {
  Mat2 m;
  m << x.x() - x.x() * x.x(), -x.x() * x.y(), -x.x() * x.y(), x.y() - x.y() * x.y();
  return m;
}

Mat2 square_inverse(const Vec2& x) {
  Mat2 m;
  m << x.x() * (1 - x.x()), 0, 0, x.y() * (1 - x.y());
  return m;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values)
    if (!std::isnan(v)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

int main() {
  criterion(1, "Guillemin curvature on the simplex", [](bool& ok) {
    const Polytope P = standard_polytope("simplex");
    const auto v = guillemin(P);
    double err = 0.0, oracle_err = 0.0;
    for (const Vec2& p : random_interior(P, 200, 0.05, 1)) {
      err = std::max(err, std::abs(abreu_scalar(*v, p) - 6.0));
      oracle_err = std::max(oracle_err, std::abs(S_from_inverse(simplex_inverse, p) - 6.0));
    }
    ok = err < 1e-6 && oracle_err < 1e-5;
    return fmt("max|S-6| = %.3g", err) + fmt(", closed-form oracle off by %.3g", oracle_err);
  });

  criterion(2, "Guillemin curvature on the square", [](bool& ok) {
    const Polytope P = standard_polytope("square");
    const auto v = guillemin(P);
    const AffineFunction K = extremal_affine(P);
    double err = 0.0, cross = 0.0, oracle_err = 0.0;
    for (const Vec2& p : random_interior(P, 200, 0.05, 2)) {
      const double S = abreu_scalar(*v, p);
      err = std::max(err, std::abs(S - 4.0));
      cross = std::max(cross, std::abs(S - K(p)));
      oracle_err = std::max(oracle_err, std::abs(S_from_inverse(square_inverse, p) - 4.0));
    }
    ok = err < 1e-6 && cross < 1e-6 && oracle_err < 1e-5;
    return fmt("max|S-4| = %.3g", err) + fmt(", max|S-K_ext| = %.3g", cross);
  });

  criterion(3, "extremal affine functions", [](bool& ok) {
    const AffineFunction sq = extremal_affine(standard_polytope("square"));
    const AffineFunction tri = extremal_affine(standard_polytope("simplex"));
    const Polytope H = standard_polytope("hirzebruch");
    const AffineFunction h = extremal_affine(H);
    const TargetFunction K = h.target();
    double lk = 0.0;
    for (const AffineFunction& p : {AffineFunction{1, 0, 0}, AffineFunction{0, 1, 0}, AffineFunction{0, 0, 1}})
      lk = std::max(lk, std::abs(lk_affine(H, K, p)));
    const double mean = weighted_integral(H, K, {1, 0, 0}) / H.area();
    const double e_sq = std::max({std::abs(sq.a0 - 4), std::abs(sq.a1), std::abs(sq.a2)});
    const double e_tri = std::max({std::abs(tri.a0 - 6), std::abs(tri.a1), std::abs(tri.a2)});
    ok = e_sq < 1e-10 && e_tri < 1e-10 && lk < 1e-10 && std::abs(mean - 10.0 / 3.0) < 1e-10;
    return "square " + sq.str() + ", simplex " + tri.str() + ", hirzebruch " + h.str() +
           fmt(", max|L_K(p)| = %.3g", lk) + fmt(", mean %.15g", mean);
  });

  criterion(4, "Legendre duality", [](bool& ok) {
    double err = 0.0, herr = 0.0;
    for (const char* name : {"square", "simplex", "hirzebruch"}) {
      const Polytope P = standard_polytope(name);
      const auto v = guillemin(P);
      for (const Vec2& p : random_interior(P, 100, 1e-3, 4)) {
        const LegendreResult r = legendre(*v, v->jet(p, 1).grad);
        err = std::max(err, (r.xi - p).norm());
        herr = std::max(herr, (r.hess_f * v->hessian(r.xi) - Mat2::Identity()).norm());
      }
    }
    ok = err < 1e-8 && herr < 1e-8;
    return fmt("round trip %.3g", err) + fmt(", |Hess f Hess u - I| %.3g", herr);
  });

  criterion(5, "affine transformation rules", [](bool& ok) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1.5, 1.5), L(0.5, 2.0);
    const Polytope P = standard_polytope("hirzebruch");
    const auto v = guillemin(P);
    const auto pts = random_interior(P, 50, 0.1, 5);
    double worst = 0.0;
    auto rel = [&](double a, double b) { worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b))); };
    for (int k = 0; k < 50;) {
      Mat2 A;
      A << U(rng), U(rng), U(rng), U(rng);
      if (std::abs(A.determinant()) < 0.2) continue;
      const double lam = L(rng);
      const Vec2 b(U(rng), U(rng)), X(U(rng), U(rng));
      const auto us = affine_rescale(v, A, lam, b);
      const Vec2 p = pts[k], ps = A * p + b;
      const Mat2 H = v->hessian(p), Hs = us->hessian(ps);
      rel(Hs.determinant(), lam * lam / std::pow(A.determinant(), 2) * H.determinant());
      rel((A * X).dot(Hs * (A * X)), lam * X.dot(H * X));
      rel(affine_invariants(*us, ps).Theta, affine_invariants(*v, p).Theta / lam);
      rel(abreu_scalar(*us, ps), abreu_scalar(*v, p) / lam);
      ++k;
    }
    ok = worst < 1e-7;
    return fmt("worst relative deviation %.3g over 50 draws", worst);
  });

  criterion(6, "crease functional", [](bool& ok) {
    const CreaseValue c = crease_lk(standard_polytope("square"), TargetFunction::constant(4), {Vec2(1, 0), 0.5});
    ok = std::abs(c.lk - 0.25) < 1e-12 && std::abs(c.boundary - 0.75) < 1e-12;
    return fmt("L_K = %.17g", c.lk) + fmt(", boundary %.17g", c.boundary);
  });

  criterion(7, "stability verdicts", [](bool& ok) {
    const Polytope sq = standard_polytope("square");
    const StabilityReport r = scan_uniform_stability(sq, TargetFunction::constant(4));
    const StabilityReport u = scan_uniform_stability(sq, TargetFunction::affine(3.5, 1, 0));
    ok = r.lambda_est > 0 && r.probe.max_abs < 1e-10 && !r.affine_unstable && r.negative_count == 0 &&
         u.affine_unstable;
    return fmt("lambda_est %.6g", r.lambda_est) + fmt(", probes %.3g", r.probe.max_abs) +
           (u.affine_unstable ? ", tilted K flagged" : ", tilted K NOT flagged");
  });

  criterion(8, "solver fixed points and first variation", [](bool& ok) {
    const Polytope sq = standard_polytope("square"), tri = standard_polytope("simplex");
    const double clamp = 3.0 / 32;
    const auto zs = std::make_shared<SmoothPart>(SmoothPart::zeros(polytope_grid(sq, 32)));
    const auto zt = std::make_shared<SmoothPart>(SmoothPart::zeros(polytope_grid(tri, 32)));
    auto c = [](double v) { return NodeFunction([v](const Vec2&) { return v; }); };
    const double rs = max_abs(residual(sq, zs, c(4), clamp, AbreuRoute::Jet));
    const double rt = max_abs(residual(tri, zt, c(6), clamp, AbreuRoute::Jet));
    SolverConfig cfg;
    cfg.cells = 32;
    Solver s(sq, cfg);
    s.set_target(c(4), true);
    std::vector<double> q(s.problem().unknowns());
    for (int k = 0; k < s.problem().unknowns(); ++k)
      q[k] = 1e-2 * std::exp(-(s.problem().points()[k] - Vec2(0.5, 0.5)).squaredNorm() / (2 * 0.15 * 0.15));
    const FirstVariationReport fv = first_variation_check(s, q);
    ok = rs < 1e-9 && rt < 1e-9 && fv.pass && fv.relative_error < 0.05;
    return fmt("residual square %.3g", rs) + fmt(", simplex %.3g", rt) +
           fmt(", first variation rel. error %.3g", fv.relative_error);
  });

  criterion(9, "Hirzebruch continuity path, 10 steps on 64x64", [](bool& ok) {
    const Polytope P = standard_polytope("hirzebruch");
    SolverConfig cfg;
    cfg.cells = 64;
    cfg.newton = true;
    const auto t0 = Clock::now();
    const ContinuityPath path = continuity_solve(P, std::nullopt, extremal_affine(P).target(), 10, cfg);
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    double worst = 0.0;
    bool decreasing = true;
    for (const auto& s : path.steps) {
      worst = std::max(worst, s.final_residual);
      decreasing = decreasing && s.F_strictly_decreasing && s.converged;
    }
    ok = path.completed && path.steps.size() == 10 && worst < 1e-4 && decreasing && sec < 300;
    return std::to_string(path.steps.size()) + " steps" + fmt(", worst final residual %.3g", worst) +
           (decreasing ? ", F strictly decreasing" : ", F NOT strictly decreasing") +
           (path.diagnosis.empty() ? "" : ", " + path.diagnosis);
  });

  criterion(10, "edge-sign generator on the square", [](bool& ok) {
    const Polytope sq = standard_polytope("square");
    std::string detail;
    for (const std::vector<int>& signs : {std::vector<int>{1, 1, 1, 1}, std::vector<int>{-1, -1, -1, -1},
                                          std::vector<int>{1, -1, 1, -1}}) {
      EdgeSignSpec s;
      s.signs = signs;
      s.eps = 1e-3;
      ok = ok && prescribe_edge_sign(sq, s).all_signs_ok;
      double prev = INFINITY;
      for (double eps : {1e-2, 1e-3, 1e-4}) {
        s.eps = eps;
        double err = 0.0;
        for (const auto& w : prescribe_edge_sign(sq, s).windows) err = std::max(err, std::abs(w.S_at_q + 2 * w.a));
        ok = ok && err < prev;
        prev = err;
      }
      detail += fmt(" |S(q)+2a| at 1e-4: %.3g;", prev);
    }
    return std::string(ok ? "signs held on all windows;" : "sign or convergence failure;") + detail;
  });

  criterion(11, "validation suite on Guillemin fixtures", [](bool& ok) {
    std::string detail;
    for (const char* name : {"square", "simplex"}) {
      const Polytope P = standard_polytope(name);
      const auto v = guillemin(P);
      const double Ko = extremal_affine(P).a0;
      const ValidationReport d = det_lower_bound_check(*v, P, Ko, interior_samples(P, 40, 0.01));
      const ValidationReport s = boundary_slope_check(*v, P, 1e-3, 0.02);
      const ValidationReport h = h_upper_bound_check(*v, *v, default_xgrid(*v, P));
      ok = ok && d.verdict == Verdict::Pass && s.verdict == Verdict::Pass && h.verdict == Verdict::Pass && h.margin >= 3;
      detail += std::string(" ") + name + fmt(": det margin %.4g", d.margin) + fmt(", slope limit %.5g", s.observed) +
                fmt(", H margin %.4g;", h.margin);
    }
    return detail;
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
