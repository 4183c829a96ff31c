#include "toric/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace toric {

CreaseValue crease_lk(const Polytope& poly, const TargetFunction& K, const Crease& cr) {
  const Polygon base(poly.vertices().begin(), poly.vertices().end());
  const Polygon plus = clip_halfplane(base, cr.a, cr.c);
  CreaseValue v;
  v.area_plus = plus.size() >= 3 ? polygon_area(plus) : 0.0;
  if (!(v.area_plus > 1e-14 * poly.area())) throw DomainError("crease: P+ is empty");
  double hmin = std::numeric_limits<double>::infinity();
  for (const Vec2& p : poly.vertices()) hmin = std::min(hmin, cr.h(p));
  if (hmin >= 0.0) throw DomainError("not a crease: h >= 0 on all of the polytope, use the affine probe");
  for (const Edge& e : poly.edges()) {
    Vec2 a = e.a, b = e.b;
    if (!clip_segment(a, b, cr.a, cr.c)) continue;
    v.boundary += e.density * (b - a).norm() * cr.h(0.5 * (a + b));
  }
  if (!(v.boundary > 0.0)) throw DomainError("crease: zero boundary integral");
  v.lk = v.boundary - integrate_product(plus, K, Poly2::affine(-cr.c, cr.a.x(), cr.a.y()));
  v.ratio = v.lk / v.boundary;
  return v;
}

namespace {

// Evaluates the normalized crease for (theta, c): the side of the chord not
// containing the centroid carries the kink.
bool evaluate(const Polytope& poly, const TargetFunction& K, ScanSample& s) {
  Crease cr = Crease::from_angle(s.theta, s.c);
  if (cr.h(poly.centroid()) > 0.0) cr = {-cr.a, -cr.c};
  s.a = cr.a;
  s.offset = cr.c;
  try {
    const CreaseValue v = crease_lk(poly, K, cr);
    s.lk = v.lk;
    s.boundary = v.boundary;
    s.ratio = v.ratio;
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

void evaluate_all(const Polytope& poly, const TargetFunction& K, std::vector<ScanSample>& samples,
                  std::vector<char>& ok, Exec exec) {
  const int n = static_cast<int>(samples.size());
  ok.assign(n, 0);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (int k = 0; k < n; ++k) ok[k] = evaluate(poly, K, samples[k]);
  } else {
    for (int k = 0; k < n; ++k) ok[k] = evaluate(poly, K, samples[k]);
  }
}

void support(const Polytope& poly, double theta, double& lo, double& hi) {
  const Vec2 a(std::cos(theta), std::sin(theta));
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const Vec2& p : poly.vertices()) {
    lo = std::min(lo, a.dot(p));
    hi = std::max(hi, a.dot(p));
  }
}

}  // namespace

StabilityReport scan_uniform_stability(const Polytope& poly, const TargetFunction& K, const ScanOptions& opt) {
  if (opt.angles < 1 || opt.offsets < 1) throw DomainError("scan resolution must be positive");
  StabilityReport rep;
  rep.probe = affine_probe(poly, K);
  rep.affine_unstable = !rep.probe.balanced;
  rep.lambda_est = std::numeric_limits<double>::infinity();

  std::vector<ScanSample> accepted;
  auto absorb = [&](std::vector<ScanSample>& batch) {
    std::vector<char> ok;
    evaluate_all(poly, K, batch, ok, opt.exec);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (!ok[k]) continue;
      ++rep.evaluated;
      const ScanSample& s = batch[k];
      if (s.lk < 0.0) ++rep.negative_count;
      if (s.ratio < rep.lambda_est) {
        rep.lambda_est = s.ratio;
        rep.worst = s;
      }
      accepted.push_back(s);
    }
  };

  const double pi = std::numbers::pi;
  const double dtheta = pi / opt.angles;
  std::vector<ScanSample> batch;
  for (int i = 0; i < opt.angles; ++i) {
    const double theta = i * dtheta;
    double lo, hi;
    support(poly, theta, lo, hi);
    for (int j = 0; j < opt.offsets; ++j) {
      ScanSample s;
      s.theta = theta;
      s.c = lo + (hi - lo) * (j + 0.5) / opt.offsets;
      batch.push_back(s);
    }
  }
  absorb(batch);
  if (opt.keep_surface) rep.surface = accepted;
  rep.lambda_by_round.push_back(rep.lambda_est);

  double dth = dtheta, frac = 1.0 / opt.offsets;
  for (int round = 0; round < opt.refine_rounds && !accepted.empty(); ++round) {
    std::vector<ScanSample> best = accepted;
    const std::size_t keep = std::min<std::size_t>(std::max(opt.keep, 1), best.size());
    std::partial_sort(best.begin(), best.begin() + keep, best.end(),
                      [](const ScanSample& x, const ScanSample& y) { return x.ratio < y.ratio; });
    best.resize(keep);
    batch.clear();
    for (const ScanSample& b : best) {
      double lo, hi;
      for (int p = -4; p <= 4; ++p) {
        const double theta = b.theta + p * dth / 4.0;
        support(poly, theta, lo, hi);
        // offset expressed as a fraction of the support interval
        double lo0, hi0;
        support(poly, b.theta, lo0, hi0);
        const double f0 = (b.c - lo0) / (hi0 - lo0);
        for (int q = -4; q <= 4; ++q) {
          const double f = f0 + q * frac / 4.0;
          if (f <= 0.0 || f >= 1.0) continue;
          ScanSample s;
          s.theta = theta;
          s.c = lo + (hi - lo) * f;
          batch.push_back(s);
        }
      }
    }
    absorb(batch);
    rep.lambda_by_round.push_back(rep.lambda_est);
    dth /= 4.0;
    frac /= 4.0;
  }

  std::vector<ScanSample> neg;
  for (const auto& s : accepted)
    if (s.lk < 0.0) neg.push_back(s);
  std::sort(neg.begin(), neg.end(), [](const ScanSample& x, const ScanSample& y) { return x.lk < y.lk; });
  if (neg.size() > 16) neg.resize(16);
  rep.witnesses = neg;
  if (rep.evaluated == 0) rep.lambda_est = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

std::string scan_csv(const StabilityReport& report) {
  std::string out = "theta,c,a1,a2,offset,lk,boundary,ratio\n";
  char buf[256];
  for (const auto& s : report.surface) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.theta, s.c, s.a.x(),
                  s.a.y(), s.offset, s.lk, s.boundary, s.ratio);
    out += buf;
  }
  return out;
}

PolystabilityResult polystability_probe(const Polytope& poly, const TargetFunction& K,
                                        const std::vector<PLFunction>& functions, double tol) {
  PolystabilityResult r;
  bool negative = false, boundary_case = false;
  for (const auto& u : functions) {
    const PLIntegrals v = lk_functional(poly, K, u);
    const double scale = std::max({1.0, std::abs(v.boundary), std::abs(v.interior)});
    std::string flag;
    if (v.lk < -tol * scale) {
      flag = "negative";
      negative = true;
    } else if (std::abs(v.lk) <= tol * scale) {
      flag = v.affine ? "affine" : "zero on non-affine";
      boundary_case = boundary_case || !v.affine;
    } else {
      flag = "positive";
    }
    r.values.push_back(v);
    r.flags.push_back(flag);
  }
  r.verdict = negative ? "not polystable" : boundary_case ? "boundary case" : "no destabilizer among probes";
  return r;
}

}  // namespace toric
