#pragma once

#include "toric/types.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace toric {

// Polynomial in (xi1, xi2), keyed by exponent pair.
struct Poly2 {
  std::map<std::pair<int, int>, double> coeff;

  static Poly2 constant(double c);
  static Poly2 affine(double a0, double a1, double a2);
  double operator()(const Vec2& xi) const;
  int degree() const;
  bool is_zero() const;
  Poly2 operator+(const Poly2& o) const;
  Poly2 operator*(const Poly2& o) const;
  Poly2 scaled(double s) const;
};

// C exp(-a |xi - c|^2); a = 0 means the factor is absent.
struct Gaussian {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  double scale = 1.0;

  double operator()(const Vec2& xi) const;
  Gaussian operator*(const Gaussian& o) const;
  bool same_shape(const Gaussian& o) const { return a == o.a && (a == 0.0 || c == o.c); }
};

// Finite sum of polynomial * Gaussian terms. Closed under +, - and *.
class TargetFunction {
 public:
  struct Term {
    Poly2 poly;
    Gaussian gauss;
  };

  TargetFunction() = default;
  static TargetFunction constant(double c);
  static TargetFunction affine(double a0, double a1, double a2);
  // exp(-|xi - c|^2 / (2 w^2))
  static TargetFunction bump(const Vec2& c, double w);

  // Grammar: numbers, xi1, xi2, + - *, parentheses, unary minus, bump(cx, cy, w).
  static TargetFunction parse(const std::string& expr);

  double operator()(const Vec2& xi) const;
  TargetFunction operator+(const TargetFunction& o) const;
  TargetFunction operator-(const TargetFunction& o) const;
  TargetFunction operator*(const TargetFunction& o) const;
  TargetFunction scaled(double s) const;

  bool is_polynomial() const;
  // Only valid when is_polynomial().
  Poly2 polynomial() const;
  // (a0, a1, a2) when the function is affine.
  bool affine_coefficients(double& a0, double& a1, double& a2) const;

  const std::vector<Term>& terms() const { return terms_; }
  std::string str() const;

 private:
  void add_term(const Term& t);
  std::vector<Term> terms_;
};

}  // namespace toric
