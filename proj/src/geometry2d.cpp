#include "toric/geometry2d.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace toric {

namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    r.x[n - 1 - i] = 0.5 * (1.0 + z);
    r.w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);  // 2/((1-z^2)p'^2), halved for [0,1]
  }
  return r;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

Polygon clip_halfplane(const Polygon& poly, const Vec2& a, double c) {
  Polygon out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    double hp = a.dot(p) - c, hq = a.dot(q) - c;
    if (hp >= 0) out.push_back(p);
    if ((hp > 0 && hq < 0) || (hp < 0 && hq > 0)) {
      double t = hp / (hp - hq);
      out.push_back(p + t * (q - p));
    }
  }
  if (out.size() < 3) out.clear();
  return out;
}

double polygon_area(const Polygon& poly) { return polygon_moment(poly, 0, 0); }

double polygon_moment(const Polygon& poly, int p, int q) {
  const std::size_t m = poly.size();
  if (m < 3) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = poly[i].x(), yi = poly[i].y();
    const double xj = poly[(i + 1) % m].x(), yj = poly[(i + 1) % m].y();
    const double cr = xi * yj - xj * yi;
    double s = 0.0;
    for (int k = 0; k <= p; ++k)
      for (int l = 0; l <= q; ++l)
        s += binom(k + l, l) * binom(p + q - k - l, q - l) * std::pow(xi, k) * std::pow(xj, p - k) *
             std::pow(yi, l) * std::pow(yj, q - l);
    total += cr * s;
  }
  return total / ((p + q + 2.0) * (p + q + 1.0) * binom(p + q, p));
}

bool clip_segment(Vec2& a, Vec2& b, const Vec2& n, double c) {
  double ha = n.dot(a) - c, hb = n.dot(b) - c;
  if (ha < 0 && hb < 0) return false;
  if (ha >= 0 && hb >= 0) return true;
  double t = ha / (ha - hb);
  Vec2 m = a + t * (b - a);
  if (ha < 0) a = m; else b = m;
  return (b - a).norm() > 0.0;
}

double integrate_polygon(const Polygon& poly, const std::function<double(const Vec2&)>& f, int order) {
  const std::size_t m = poly.size();
  if (m < 3) return 0.0;
  Vec2 c = Vec2::Zero();
  for (const auto& v : poly) c += v;
  c /= double(m);
  const GaussRule& g = gauss_legendre(order);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 A = poly[i] - c, B = poly[(i + 1) % m] - c;
    const double J = A.x() * B.y() - A.y() * B.x();
    double s = 0.0;
    for (std::size_t a = 0; a < g.x.size(); ++a)
      for (std::size_t b = 0; b < g.x.size(); ++b) {
        const double r = g.x[a], t = g.x[b];
        s += g.w[a] * g.w[b] * r * f(c + r * (A + t * (B - A)));
      }
    total += s * J;
  }
  return total;
}

}  // namespace toric
