#pragma once

#include "toric/polytope.hpp"
#include "toric/types.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace toric {

// Default facet-value clamps: plain evaluation, and anything needing third derivatives.
constexpr double kEvalClamp = 1e-6;
constexpr double kThirdClamp = 1e-3;

struct Jet {
  int order = 0;
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
  Tensor3 d3{};
  Tensor4 d4{};

  Jet& operator+=(const Jet& o);
};

class Potential {
 public:
  virtual ~Potential() = default;

  // Derivatives up to `order` (0..4). Throws DomainError when the interior
  // margin at xi is below clamp (or not positive when clamp is 0).
  virtual Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const = 0;

  // Value extended continuously to the closure of the domain.
  virtual double closure_value(const Vec2& xi) const { return jet(xi, 0, 0.0).value; }

  // Positive inside the domain, measured by facet values; +inf if unconstrained.
  virtual double interior_margin(const Vec2&) const { return std::numeric_limits<double>::infinity(); }

  // Starting point for the Legendre inversion.
  virtual Vec2 reference_point() const { return Vec2::Zero(); }

  Mat2 hessian(const Vec2& xi, double clamp = kEvalClamp) const { return jet(xi, 2, clamp).hess; }

 protected:
  void check_margin(const Vec2& xi, double clamp) const;
};

using PotentialPtr = std::shared_ptr<const Potential>;

class GuilleminPotential : public Potential {
 public:
  explicit GuilleminPotential(Polytope poly) : poly_(std::move(poly)) {}
  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override;
  double interior_margin(const Vec2& xi) const override { return poly_.min_facet_value(xi); }
  Vec2 reference_point() const override { return poly_.centroid(); }
  const Polytope& polytope() const { return poly_; }

 private:
  Polytope poly_;
};

// 1/2 xi^T Q xi + b.xi + c, optionally restricted to a polytope.
class QuadraticPotential : public Potential {
 public:
  QuadraticPotential(Mat2 Q, Vec2 b, double c, std::optional<Polytope> domain = std::nullopt)
      : Q_(std::move(Q)), b_(std::move(b)), c_(c), domain_(std::move(domain)) {}
  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override;
  double interior_margin(const Vec2& xi) const override;
  Vec2 reference_point() const override;

 private:
  Mat2 Q_;
  Vec2 b_;
  double c_;
  std::optional<Polytope> domain_;
};

class SumPotential : public Potential {
 public:
  explicit SumPotential(std::vector<PotentialPtr> terms);
  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override;
  double interior_margin(const Vec2& xi) const override;
  Vec2 reference_point() const override { return terms_.front()->reference_point(); }
  const std::vector<PotentialPtr>& terms() const { return terms_; }

 private:
  std::vector<PotentialPtr> terms_;
};

// u*(xi) = lambda * u(A^{-1}(xi - b))
class RescaledPotential : public Potential {
 public:
  RescaledPotential(PotentialPtr base, Mat2 A, double lambda, Vec2 b = Vec2::Zero());
  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override;
  double interior_margin(const Vec2& xi) const override;
  Vec2 reference_point() const override;
  Vec2 pullback(const Vec2& xi) const { return B_ * (xi - b_); }

 private:
  PotentialPtr base_;
  Mat2 A_, B_;
  double lambda_;
  Vec2 b_;
};

PotentialPtr guillemin(const Polytope& poly);

struct LegendreResult {
  Vec2 xi = Vec2::Zero();
  double f = 0.0;       // <x, xi> - u(xi)
  Mat2 hess_f = Mat2::Zero();
  int iterations = 0;
  double residual = 0.0;  // |grad u(xi) - x|
};

struct LegendreOptions {
  double tol = 1e-13;
  int max_iter = 200;
  std::optional<Vec2> start;
};

// Solves grad u(xi) = x by damped Newton. Throws DomainError on failure,
// quoting the last iterate.
LegendreResult legendre(const Potential& u, const Vec2& x, const LegendreOptions& opt = {});

PotentialPtr normalize_at(const PotentialPtr& u, const Vec2& p);

struct EdgeRestriction {
  int edge = 0;
  std::vector<double> t;        // parameter along the edge, 0 at its first vertex
  std::vector<Vec2> points;
  std::vector<double> values;
  std::vector<double> second_differences;  // per unit parameter squared
  bool convex = true;
};

// Samples u on the open edge at t = k/(samples+1), k = 1..samples.
EdgeRestriction restrict_to_edge(const Potential& u, const Polytope& poly, int edge, int samples);

}  // namespace toric
