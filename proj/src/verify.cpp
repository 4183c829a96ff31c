#include "toric/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace toric {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, double a) {
  char b[128];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::string fmt(const char* f, double a, double c) {
  char b[160];
  std::snprintf(b, sizeof b, f, a, c);
  return b;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Trend: return "trend";
    case Verdict::OutOfHypotheses: return "out-of-hypotheses";
  }
  return "?";
}

std::string report_text(const ValidationReport& r) {
  std::string s = "check: " + r.name + "\n";
  s += "layout: " + r.layout + "\n";
  s += "samples: " + std::to_string(r.samples) + "\n";
  s += fmt("observed: %.17g\n", r.observed);
  s += std::isnan(r.bound) ? std::string("bound: trend\n") : fmt("bound: %.17g\n", r.bound);
  if (!std::isnan(r.margin)) s += fmt("margin: %.17g\n", r.margin);
  s += "verdict: " + verdict_name(r.verdict) + "\n";
  for (const auto& n : r.notes) s += "note: " + n + "\n";
  return s;
}

std::string report_csv(const ValidationReport& r) {
  std::string s = "xi1,xi2,value\n";
  char b[96];
  for (const auto& v : r.values) {
    std::snprintf(b, sizeof b, "%.17g,%.17g,%.17g\n", v.xi.x(), v.xi.y(), v.value);
    s += b;
  }
  return s;
}

std::vector<Vec2> interior_samples(const Polytope& poly, int n, double margin) {
  std::vector<Vec2> out;
  const Vec2 lo = poly.lower(), hi = poly.upper();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p(lo.x() + (hi.x() - lo.x()) * (i + 0.5) / n, lo.y() + (hi.y() - lo.y()) * (j + 0.5) / n);
      if (poly.min_facet_value(p) >= margin) out.push_back(p);
    }
  return out;
}

ValidationReport det_lower_bound_check(const Potential& u, const Polytope& poly, double K_o,
                                       const std::vector<Vec2>& samples, const AbreuOptions& abreu) {
  ValidationReport r;
  r.name = "det_lower_bound";
  r.layout = std::to_string(samples.size()) + " caller-supplied interior points";
  r.samples = static_cast<int>(samples.size());
  const double diam = poly.diameter();
  if (!(K_o > 0.0)) {
    r.bound = kNaN;
    r.margin = kNaN;
    r.verdict = Verdict::OutOfHypotheses;
    r.notes.push_back("K_o = 0: the constant (2 K_o diam^2)^-2 is undefined, outside the hypotheses of the bound");
    return r;
  }
  r.bound = std::pow(2.0 * K_o * diam * diam, -2.0);
  const int n = r.samples;
  std::vector<double> det(n, kNaN), S(n, kNaN);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    try {
      det[k] = u.hessian(samples[k], 0.0).determinant();
      S[k] = abreu_scalar(u, samples[k], abreu);
    } catch (const DomainError&) {
    }
  }
  const double slack = 1e-9 * std::max(1.0, K_o);
  std::vector<std::string> offending;
  for (int k = 0; k < n; ++k)
    if (!(std::abs(S[k]) <= K_o + slack) && offending.size() < 8)
      offending.push_back(fmt("S = %.10g at xi1 = %.6g", S[k], samples[k].x()) + fmt(", xi2 = %.6g", samples[k].y()));
  r.observed = kInf;
  for (int k = 0; k < n; ++k) {
    r.values.push_back({samples[k], det[k]});
    if (std::isnan(det[k])) {
      r.observed = kNaN;
      break;
    }
    r.observed = std::min(r.observed, det[k]);
  }
  r.margin = r.observed / r.bound;
  if (!offending.empty()) {
    r.verdict = Verdict::Fail;
    r.notes.push_back("precondition |S(u)| <= K_o violated");
    for (auto& o : offending) r.notes.push_back(o);
    return r;
  }
  r.verdict = r.observed >= r.bound ? Verdict::Pass : Verdict::Fail;
  return r;
}

ValidationReport facet_det_check(const Potential& u, const Polytope& poly, int facet, int rays, int levels) {
  if (facet < 0 || facet >= static_cast<int>(poly.size())) throw DomainError("facet index out of range");
  const Edge& e = poly.edges()[facet];
  const Facet& F = poly.facets()[facet];
  const Vec2 inward = F.n() / F.norm();
  const Vec2 mid = 0.5 * (e.a + e.b);
  // half-disk of radius r around the midpoint, clear of the other facets
  double radius = 0.25 * e.length;
  for (std::size_t k = 0; k < poly.size(); ++k)
    if (static_cast<int>(k) != facet) radius = std::min(radius, 0.5 * poly.facets()[k].eval(mid) / poly.facets()[k].norm());
  ValidationReport r;
  r.name = "facet_det";
  r.layout = "inward rays from " + std::to_string(rays) + " facet points within the half-disk of radius " +
             fmt("%.6g", radius) + ", distances radius*2^-k for k = 1.." + std::to_string(levels);
  r.bound = kNaN;
  r.margin = kNaN;
  r.verdict = Verdict::Trend;
  const Vec2 tangent = (e.b - e.a) / e.length;
  std::vector<double> level_inf(levels, kInf);
  for (int k = 1; k <= levels; ++k) {
    const double d = radius * std::ldexp(1.0, -k);
    for (int m = 0; m < rays; ++m) {
      const double s = radius * (-0.8 + 1.6 * (m + 0.5) / rays);
      if (s * s + d * d > radius * radius) continue;
      const Vec2 p = mid + s * tangent + d * inward;
      const double det = u.hessian(p, 0.0).determinant();
      const double val = det * F.eval(p) / F.norm();
      r.values.push_back({p, val});
      level_inf[k - 1] = std::min(level_inf[k - 1], val);
    }
  }
  r.samples = static_cast<int>(r.values.size());
  r.observed = *std::min_element(level_inf.begin(), level_inf.end());
  std::string trend = "inf per level:";
  for (double v : level_inf) trend += fmt(" %.6g", v);
  r.notes.push_back(trend);
  const double change = std::abs(level_inf[levels - 1] - level_inf[levels - 2]) / std::abs(level_inf[levels - 2]);
  r.notes.push_back(fmt("relative change over the last halving: %.3g", change));
  if (level_inf[levels - 1] < 0.25 * level_inf[0])
    r.notes.push_back("det*d tends to 0 toward the facet: u violates the boundary hypotheses (not a failure of the bound)");
  return r;
}

ValidationReport boundary_slope_check(const Potential& u, const Polytope& poly, double s1, double tol) {
  ValidationReport r;
  r.name = "boundary_slope";
  r.layout = "inward normal rays from each edge midpoint at l = " + fmt("%.3g", s1) + " and " + fmt("%.3g", 2 * s1);
  r.bound = 1.0;
  double worst = -1.0;
  bool ok = true;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Edge& e = poly.edges()[k];
    const Vec2 v = poly.facets()[k].n();
    const Vec2 mid = 0.5 * (e.a + e.b);
    auto ratio = [&](double s) {
      const Vec2 p = mid + s * v / v.squaredNorm();
      const Mat2 H = u.hessian(p, 0.0);
      r.values.push_back({p, v.dot(H.inverse() * v) / s});
      return r.values.back().value;
    };
    const double r1 = ratio(s1), r2 = ratio(2 * s1);
    const double limit = 2.0 * r1 - r2;
    r.notes.push_back("edge " + std::to_string(k) + fmt(": ratio %.10g", r1) + fmt(", limit %.10g", limit));
    const double dev = std::max(std::abs(r1 - 1.0), std::abs(limit - 1.0));
    if (dev > worst) {
      worst = dev;
      r.observed = limit;
    }
    ok = ok && dev <= tol;
  }
  r.samples = static_cast<int>(r.values.size());
  r.margin = tol / std::max(worst, 1e-300);
  r.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return r;
}

GridSpec default_xgrid(const Potential& g, const Polytope& poly, int n, double half) {
  const Vec2 c = g.jet(poly.centroid(), 1, 0.0).grad;
  GridSpec x;
  x.nx = x.ny = n;
  x.h = Vec2::Constant(2.0 * half / (n - 1));
  x.origin = c - Vec2::Constant(half);
  return x;
}

ValidationReport h_upper_bound_check(const Potential& f, const Potential& g, const GridSpec& xgrid) {
  const DualGrid df = legendre_grid(f, xgrid);
  const DualGrid dg = legendre_grid(g, xgrid);
  const int n = xgrid.size();
  std::vector<double> H(n, kNaN), ric2(n, kNaN), S(n, kNaN), phi(n, kNaN);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    if (!df.valid[k] || !dg.valid[k]) continue;
    try {
      const double r = ricci_at(g, dg.xi[k]).norm;
      const double s = abreu_scalar(f, df.xi[k]);
      H[k] = std::exp(dg.logW[k] - df.logW[k]);
      ric2[k] = r * r;
      S[k] = std::abs(s);
      phi[k] = df.f[k] - dg.f[k];
    } catch (const DomainError&) {
    }
  }
  ValidationReport r;
  r.name = "h_upper_bound";
  r.layout = std::to_string(xgrid.nx) + "x" + std::to_string(xgrid.ny) + " x-grid, origin " +
             fmt("(%.6g, ", xgrid.origin.x()) + fmt("%.6g), ", xgrid.origin.y()) + fmt("spacing %.6g", xgrid.h.x()) +
             "; third-derivative clamp " + fmt("%.3g", kThirdClamp);
  double maxH = -kInf, Kdot = 0.0, maxS = 0.0, pmin = kInf, pmax = -kInf;
  int used = 0;
  for (int k = 0; k < n; ++k) {
    if (std::isnan(H[k])) continue;
    ++used;
    maxH = std::max(maxH, H[k]);
    Kdot = std::max(Kdot, ric2[k]);
    maxS = std::max(maxS, S[k]);
    pmin = std::min(pmin, phi[k]);
    pmax = std::max(pmax, phi[k]);
    r.values.push_back({xgrid.node(k / xgrid.ny, k % xgrid.ny), H[k]});
  }
  r.samples = used;
  if (used == 0) throw DomainError("h_upper_bound_check: no x-grid node is in the range of both gradients");
  r.observed = maxH;
  r.notes.push_back(fmt("Kdot = %.10g", Kdot) + fmt(", max|S(f)| = %.10g", maxS) +
                    fmt(", osc phi = %.10g", pmax - pmin));
  r.notes.push_back("ingredients sampled on the clamped x-grid only; the region near the divisors is under-sampled");
  if (!(Kdot > 1e-12)) {
    r.bound = kNaN;
    r.margin = kNaN;
    r.verdict = Verdict::OutOfHypotheses;
    r.notes.push_back("Kdot = 0 (flat reference): bound undefined");
    return r;
  }
  const double base = 2.0 + maxS / (2.0 * Kdot);
  r.bound = base * base * std::exp(2.0 * Kdot * (pmax - pmin));
  r.margin = r.bound / maxH;
  r.verdict = maxH <= r.bound ? Verdict::Pass : Verdict::Fail;
  return r;
}

}  // namespace toric
