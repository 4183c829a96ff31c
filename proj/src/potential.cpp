#include "toric/potential.hpp"

#include <cmath>
#include <sstream>

namespace toric {

Jet& Jet::operator+=(const Jet& o) {
  value += o.value;
  grad += o.grad;
  hess += o.hess;
  for (int i = 0; i < 8; ++i) d3[i] += o.d3[i];
  for (int i = 0; i < 16; ++i) d4[i] += o.d4[i];
  return *this;
}

void Potential::check_margin(const Vec2& xi, double clamp) const {
  const double m = interior_margin(xi);
  if (!(m > 0.0) || m < clamp) {
    std::ostringstream os;
    os.precision(10);
    os << "point (" << xi.x() << ", " << xi.y() << ") has facet margin " << m << " below clamp " << clamp;
    throw DomainError(os.str());
  }
}

Jet GuilleminPotential::jet(const Vec2& xi, int order, double clamp) const {
  check_margin(xi, clamp);
  Jet J;
  J.order = order;
  for (const auto& f : poly_.facets()) {
    const Vec2 v = f.n();
    const double l = f.eval(xi);
    J.value += l * std::log(l);
    if (order >= 1) J.grad += v * (1.0 + std::log(l));
    if (order >= 2) J.hess += v * v.transpose() / l;
    if (order >= 3) {
      const double c3 = -1.0 / (l * l);
      const double c4 = 2.0 / (l * l * l);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            const double vvv = v[i] * v[j] * v[k];
            J.d3[ix3(i, j, k)] += c3 * vvv;
            if (order >= 4)
              for (int m = 0; m < 2; ++m) J.d4[ix4(i, j, k, m)] += c4 * vvv * v[m];
          }
    }
  }
  return J;
}

double GuilleminPotential::closure_value(const Vec2& xi) const {
  double s = 0.0;
  for (const auto& f : poly_.facets()) {
    const double l = f.eval(xi);
    if (l > 0.0) s += l * std::log(l);
  }
  return s;
}

Jet QuadraticPotential::jet(const Vec2& xi, int order, double clamp) const {
  if (domain_) check_margin(xi, clamp);
  Jet J;
  J.order = order;
  J.value = 0.5 * xi.dot(Q_ * xi) + b_.dot(xi) + c_;
  J.grad = Q_ * xi + b_;
  J.hess = Q_;
  return J;
}

double QuadraticPotential::closure_value(const Vec2& xi) const { return 0.5 * xi.dot(Q_ * xi) + b_.dot(xi) + c_; }

double QuadraticPotential::interior_margin(const Vec2& xi) const {
  return domain_ ? domain_->min_facet_value(xi) : std::numeric_limits<double>::infinity();
}

Vec2 QuadraticPotential::reference_point() const { return domain_ ? domain_->centroid() : Vec2::Zero(); }

SumPotential::SumPotential(std::vector<PotentialPtr> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("empty potential sum");
}

Jet SumPotential::jet(const Vec2& xi, int order, double clamp) const {
  Jet J = terms_.front()->jet(xi, order, clamp);
  for (std::size_t i = 1; i < terms_.size(); ++i) J += terms_[i]->jet(xi, order, clamp);
  return J;
}

double SumPotential::closure_value(const Vec2& xi) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t->closure_value(xi);
  return s;
}

double SumPotential::interior_margin(const Vec2& xi) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) m = std::min(m, t->interior_margin(xi));
  return m;
}

RescaledPotential::RescaledPotential(PotentialPtr base, Mat2 A, double lambda, Vec2 b)
    : base_(std::move(base)), A_(std::move(A)), lambda_(lambda), b_(std::move(b)) {
  if (std::abs(A_.determinant()) < 1e-14) throw DomainError("affine rescale: singular matrix");
  if (!(lambda_ > 0.0)) throw DomainError("affine rescale: lambda must be positive");
  B_ = A_.inverse();
}

Jet RescaledPotential::jet(const Vec2& xi, int order, double clamp) const {
  const Vec2 y = pullback(xi);
  const Jet S = base_->jet(y, order, clamp);
  Jet J;
  J.order = order;
  const Mat2& B = B_;
  J.value = lambda_ * S.value;
  J.grad = lambda_ * B.transpose() * S.grad;
  J.hess = lambda_ * B.transpose() * S.hess * B;
  if (order >= 3) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double s = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c) s += S.d3[ix3(a, b, c)] * B(a, i) * B(b, j) * B(c, k);
          J.d3[ix3(i, j, k)] = lambda_ * s;
        }
  }
  if (order >= 4) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) {
            double s = 0.0;
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                  for (int d = 0; d < 2; ++d)
                    s += S.d4[ix4(a, b, c, d)] * B(a, i) * B(b, j) * B(c, k) * B(d, l);
            J.d4[ix4(i, j, k, l)] = lambda_ * s;
          }
  }
  return J;
}

double RescaledPotential::closure_value(const Vec2& xi) const { return lambda_ * base_->closure_value(pullback(xi)); }

double RescaledPotential::interior_margin(const Vec2& xi) const { return base_->interior_margin(pullback(xi)); }

Vec2 RescaledPotential::reference_point() const { return A_ * base_->reference_point() + b_; }

PotentialPtr guillemin(const Polytope& poly) { return std::make_shared<GuilleminPotential>(poly); }

LegendreResult legendre(const Potential& u, const Vec2& x, const LegendreOptions& opt) {
  Vec2 xi = opt.start ? *opt.start : u.reference_point();
  if (!(u.interior_margin(xi) > 0.0)) throw DomainError("legendre: start point outside the domain");
  Jet J = u.jet(xi, 2, 0.0);
  Vec2 F = J.grad - x;
  double r = F.norm();
  const double scale = std::max(1.0, x.norm());
  int it = 0;
  for (; it < opt.max_iter && r > opt.tol * scale; ++it) {
    const Vec2 d = -J.hess.ldlt().solve(F);
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      const Vec2 trial = xi + t * d;
      if (!(u.interior_margin(trial) > 0.0)) continue;
      Jet Jt;
      try {
        Jt = u.jet(trial, 2, 0.0);
      } catch (const DomainError&) {
        continue;
      }
      const Vec2 Ft = Jt.grad - x;
      if (Ft.norm() <= (1.0 - 1e-4 * t) * r) {
        xi = trial;
        J = Jt;
        F = Ft;
        r = Ft.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (r > opt.tol * scale * 1e3) {
    std::ostringstream os;
    os.precision(12);
    os << "legendre: no convergence for x = (" << x.x() << ", " << x.y() << "); last iterate (" << xi.x() << ", "
       << xi.y() << "), residual " << r;
    throw DomainError(os.str());
  }
  LegendreResult res;
  res.xi = xi;
  res.f = x.dot(xi) - J.value;
  res.hess_f = J.hess.inverse();
  res.iterations = it;
  res.residual = r;
  return res;
}

PotentialPtr normalize_at(const PotentialPtr& u, const Vec2& p) {
  const Jet J = u->jet(p, 1);
  // subtract the supporting affine function at p
  auto affine = std::make_shared<QuadraticPotential>(Mat2::Zero(), -J.grad, J.grad.dot(p) - J.value);
  return std::make_shared<SumPotential>(std::vector<PotentialPtr>{u, affine});
}

EdgeRestriction restrict_to_edge(const Potential& u, const Polytope& poly, int edge, int samples) {
  if (edge < 0 || edge >= int(poly.size())) throw DomainError("restrict_to_edge: no edge " + std::to_string(edge));
  if (samples < 3) throw DomainError("restrict_to_edge: need at least 3 samples");
  const Edge& e = poly.edges()[edge];
  EdgeRestriction r;
  r.edge = edge;
  const double ds = e.length / (samples + 1);
  for (int k = 1; k <= samples; ++k) {
    const double t = k * ds;
    const Vec2 p = e.a + (t / e.length) * (e.b - e.a);
    r.t.push_back(t);
    r.points.push_back(p);
    r.values.push_back(u.closure_value(p));
  }
  for (int k = 1; k + 1 < samples; ++k) {
    const double d2 = (r.values[k + 1] - 2.0 * r.values[k] + r.values[k - 1]) / (ds * ds);
    r.second_differences.push_back(d2);
    if (d2 < -1e-8 * (1.0 + std::abs(r.values[k]) / (ds * ds))) r.convex = false;
  }
  return r;
}

}  // namespace toric
