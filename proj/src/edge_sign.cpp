#include "toric/edge_sign.hpp"

#include "toric/geometry2d.hpp"
#include "toric/operators.hpp"

#include <algorithm>
#include <cmath>

namespace toric {

namespace {

// Quintic smoothstep on [0,1] and its derivatives.
double smoothstep(double t, int d) {
  switch (d) {
    case 0: return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    case 1: return 30.0 * t * t * (1.0 - t) * (1.0 - t);
    case 2: return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    default: return 60.0 * (1.0 - 6.0 * t + 6.0 * t * t);
  }
}

// Blend weight in |s|: 0 below delta, 1 above 2 delta.
double blend(double s, double delta, int d) {
  if (s <= delta) return 0.0;
  if (s >= 2.0 * delta) return d == 0 ? 1.0 : 0.0;
  return smoothstep((s - delta) / delta, d) / std::pow(delta, d);
}

long long ext_gcd(long long a, long long b, long long& x, long long& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return a >= 0 ? a : -a;
  }
  long long x1, y1;
  long long g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

constexpr int kQuadPts = 24;

}  // namespace

Vec2 EdgeFrame::point(double s1, double s2, const Polytope& poly) const {
  Mat2 M;
  M << v.x(), v.y(), w.x(), w.y();
  const Vec2 rhs(s1 + poly.facets()[edge].offset, s2 + w.dot(q));
  return M.inverse() * rhs;
}

EdgeFrame edge_frame(const Polytope& poly, int edge, const Vec2& q) {
  const auto& n = poly.facets()[edge].normal;
  long long s, t;
  ext_gcd(n[0], n[1], s, t);  // n0 s + n1 t = 1
  const Vec2 v(static_cast<double>(n[0]), static_cast<double>(n[1]));
  Vec2 w(static_cast<double>(-t), static_cast<double>(s));  // det [v; w] = n0 s + n1 t = 1
  w -= std::round(w.dot(v) / v.squaredNorm()) * v;
  EdgeFrame f;
  f.edge = edge;
  f.v = v;
  f.w = w;
  f.q = q;
  return f;
}

EdgeSignPotential::EdgeSignPotential(const Polytope& poly, const EdgeSignSpec& spec) : poly_(poly), spec_(spec) {
  const int m = int(poly.size());
  if (int(spec.signs.size()) != m)
    throw DomainError("edge signs: expected " + std::to_string(m) + " signs, got " + std::to_string(spec.signs.size()));
  if (!(spec.delta > 0.0) || !(spec.eps > 0.0) || !(spec.a_magnitude > 0.0))
    throw DomainError("edge signs: delta, eps and |a| must be positive");
  const double d = spec.delta;
  for (int e = 0; e < m; ++e) {
    if (spec.signs[e] != 1 && spec.signs[e] != -1) throw DomainError("edge signs must be +1 or -1");
    const Edge& ed = poly.edges()[e];
    EdgeSignPiece p;
    p.frame = edge_frame(poly, e, ed.a + spec.q_fraction * (ed.b - ed.a));
    p.a = -spec.signs[e] * spec.a_magnitude;
    p.c = spec.c;
    const double need = (p.a < 0 ? -p.a * 4.0 * d * d * 2.0 : 0.0) + 1e-3;
    if (p.c < need) {
      p.c = need;
      p.c_raised = true;
    }
    pieces_.push_back(p);
  }
  // each window must sit inside the polytope and where every other piece is affine
  for (int e = 0; e < m; ++e) {
    const EdgeFrame& fe = pieces_[e].frame;
    std::vector<Vec2> corners;
    for (double s1 : {0.0, d})
      for (double s2 : {-0.5 * d, 0.5 * d}) corners.push_back(fe.point(s1, s2, poly));
    for (const Vec2& c : corners)
      if (poly.min_facet_value(c) < -1e-12)
        throw DomainError("edge signs: window of edge " + std::to_string(e) + " leaves the polytope; reduce delta");
    for (int o = 0; o < m; ++o) {
      if (o == e) continue;
      const EdgeFrame& fo = pieces_[o].frame;
      bool far1 = true, above = true, below = true;
      for (const Vec2& c : corners) {
        far1 = far1 && fo.s1(c, poly) >= 2.0 * d - 1e-12;
        above = above && fo.s2(c) >= 2.0 * d - 1e-12;
        below = below && fo.s2(c) <= -2.0 * d + 1e-12;
      }
      if (!(far1 && (above || below)))
        throw DomainError("edge signs: windows overlap (window of edge " + std::to_string(e) +
                          " meets the non-affine region of edge " + std::to_string(o) + "); reduce delta or move q");
    }
  }
}

double EdgeSignPotential::alpha(double s, int d) const {
  const double dl = spec_.delta;
  const double C1 = 1.0 + std::log(2.0 * dl);
  auto dalpha = [&](double r) {  // first derivative, any r > 0
    const double b = blend(r, dl, 0);
    return (1.0 - b) * (1.0 + std::log(r)) + b * C1;
  };
  if (s <= dl) {
    switch (d) {
      case 0: return s > 0.0 ? s * std::log(s) : 0.0;
      case 1: return 1.0 + std::log(s);
      case 2: return 1.0 / s;
      case 3: return -1.0 / (s * s);
      default: return 2.0 / (s * s * s);
    }
  }
  auto integral = [&](double hi) {
    const GaussRule& g = gauss_legendre(kQuadPts);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * dalpha(dl + g.x[k] * (hi - dl));
    return acc * (hi - dl);
  };
  const double a_dl = dl * std::log(dl);
  if (s >= 2.0 * dl) {
    if (d == 0) return a_dl + integral(2.0 * dl) + C1 * (s - 2.0 * dl);
    return d == 1 ? C1 : 0.0;
  }
  const double b0 = blend(s, dl, 0), b1 = blend(s, dl, 1), b2 = blend(s, dl, 2), b3 = blend(s, dl, 3);
  const double L = std::log(2.0 * dl / s);
  switch (d) {
    case 0: return a_dl + integral(s);
    case 1: return dalpha(s);
    case 2: return (1.0 - b0) / s + b1 * L;
    case 3: return -2.0 * b1 / s - (1.0 - b0) / (s * s) + b2 * L;
    default: return -3.0 * b2 / s + 3.0 * b1 / (s * s) + 2.0 * (1.0 - b0) / (s * s * s) + b3 * L;
  }
}

double EdgeSignPotential::beta(const EdgeSignPiece& p, double r, int d) const {
  const double dl = spec_.delta;
  const double a = p.a, c = p.c;
  auto second = [&](double t) { return (1.0 - blend(std::abs(t), dl, 0)) / (a * t * t + c); };
  if (d <= 1) {
    // beta(0) = beta'(0) = 0; beta'' vanishes beyond 2 delta
    const double rc = std::clamp(r, -2.0 * dl, 2.0 * dl);
    double I0 = 0.0, I1 = 0.0;
    const double sg = rc >= 0 ? 1.0 : -1.0;
    const double ar = std::abs(rc);
    const GaussRule& g = gauss_legendre(kQuadPts);
    double lo = 0.0;
    for (double hi : {std::min(ar, dl), ar}) {
      if (hi <= lo) continue;
      for (std::size_t k = 0; k < g.x.size(); ++k) {
        const double t = sg * (lo + g.x[k] * (hi - lo));
        const double wgt = g.w[k] * (hi - lo) * sg;
        I0 += wgt * second(t);
        I1 += wgt * t * second(t);
      }
      lo = hi;
    }
    return d == 0 ? r * I0 - I1 : I0;
  }
  const double ar = std::abs(r), sg = r >= 0 ? 1.0 : -1.0;
  const double B0 = blend(ar, dl, 0), B1 = sg * blend(ar, dl, 1), B2 = blend(ar, dl, 2);
  const double q = a * r * r + c;
  const double g0 = 1.0 / q;
  const double g1 = -2.0 * a * r * g0 * g0;
  const double g2 = -2.0 * a * g0 * g0 + 8.0 * a * a * r * r * g0 * g0 * g0;
  switch (d) {
    case 2: return (1.0 - B0) * g0;
    case 3: return -B1 * g0 + (1.0 - B0) * g1;
    default: return -B2 * g0 - 2.0 * B1 * g1 + (1.0 - B0) * g2;
  }
}

Jet EdgeSignPotential::jet(const Vec2& xi, int order, double clamp) const {
  check_margin(xi, clamp);
  Jet J;
  J.order = order;
  const double eps = spec_.eps;
  J.value = eps * xi.squaredNorm();
  J.grad = 2.0 * eps * xi;
  J.hess = 2.0 * eps * Mat2::Identity();
  for (const auto& p : pieces_) {
    const double s1 = p.frame.s1(xi, poly_), s2 = p.frame.s2(xi);
    const Vec2& v = p.frame.v;
    const Vec2& w = p.frame.w;
    J.value += alpha(s1, 0) + beta(p, s2, 0);
    if (order >= 1) J.grad += alpha(s1, 1) * v + beta(p, s2, 1) * w;
    if (order >= 2) J.hess += alpha(s1, 2) * v * v.transpose() + beta(p, s2, 2) * w * w.transpose();
    if (order >= 3) {
      const double a3 = alpha(s1, 3), b3 = beta(p, s2, 3);
      const double a4 = order >= 4 ? alpha(s1, 4) : 0.0, b4 = order >= 4 ? beta(p, s2, 4) : 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            J.d3[ix3(i, j, k)] += a3 * v[i] * v[j] * v[k] + b3 * w[i] * w[j] * w[k];
            if (order >= 4)
              for (int l = 0; l < 2; ++l)
                J.d4[ix4(i, j, k, l)] += a4 * v[i] * v[j] * v[k] * v[l] + b4 * w[i] * w[j] * w[k] * w[l];
          }
    }
  }
  return J;
}

double EdgeSignPotential::closure_value(const Vec2& xi) const {
  double s = spec_.eps * xi.squaredNorm();
  for (const auto& p : pieces_) s += alpha(std::max(p.frame.s1(xi, poly_), 0.0), 0) + beta(p, p.frame.s2(xi), 0);
  return s;
}

EdgeSignResult prescribe_edge_sign(const Polytope& poly, const EdgeSignSpec& spec, int window_samples) {
  EdgeSignResult res;
  auto u = std::make_shared<EdgeSignPotential>(poly, spec);
  res.potential = u;
  const double dl = spec.delta;
  const double depth = 2.0 * kThirdClamp;
  if (depth >= dl) throw DomainError("edge signs: delta too small for the evaluation clamp");
  const int n = std::max(window_samples, 2);
  res.all_signs_ok = true;
  for (std::size_t e = 0; e < u->pieces().size(); ++e) {
    const EdgeSignPiece& p = u->pieces()[e];
    EdgeSignWindowReport w;
    w.edge = int(e);
    w.requested_sign = spec.signs[e];
    w.q = p.frame.q;
    w.a = p.a;
    w.c = p.c;
    w.c_raised = p.c_raised;
    w.S_at_q = abreu_scalar(*u, p.frame.point(depth, 0.0, poly));
    w.S_min = w.S_max = w.S_at_q;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double s1 = depth + (dl - depth) * i / (n - 1);
        const double s2 = -0.5 * dl + dl * j / (n - 1);
        const double S = abreu_scalar(*u, p.frame.point(s1, s2, poly));
        w.S_min = std::min(w.S_min, S);
        w.S_max = std::max(w.S_max, S);
        ++w.samples;
      }
    w.sign_ok = w.requested_sign > 0 ? w.S_min > 0.0 : w.S_max < 0.0;
    res.all_signs_ok = res.all_signs_ok && w.sign_ok;
    res.windows.push_back(w);
  }
  return res;
}

}  // namespace toric
