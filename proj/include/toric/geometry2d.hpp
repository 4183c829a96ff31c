#pragma once

#include "toric/types.hpp"

#include <functional>
#include <vector>

namespace toric {

using Polygon = std::vector<Vec2>;  // counterclockwise, no repeated closing vertex

struct GaussRule {
  std::vector<double> x;  // nodes on [0,1]
  std::vector<double> w;  // weights summing to 1
};

// n-point Gauss-Legendre rule mapped to [0,1]; cached per n.
const GaussRule& gauss_legendre(int n);

// Part of the polygon where <a, xi> - c >= 0.
Polygon clip_halfplane(const Polygon& poly, const Vec2& a, double c);

double polygon_area(const Polygon& poly);

// Exact integral of x^p y^q over the polygon by edge summation.
double polygon_moment(const Polygon& poly, int p, int q);

// Sub-segment of [a,b] where <n, xi> - c >= 0; false if empty.
bool clip_segment(Vec2& a, Vec2& b, const Vec2& n, double c);

// Integral over the polygon of a smooth function: fan from the vertex mean,
// collapsed tensor Gauss rule with `order` points per direction per triangle.
double integrate_polygon(const Polygon& poly, const std::function<double(const Vec2&)>& f, int order);

}  // namespace toric
