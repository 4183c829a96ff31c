#pragma once

#include "toric/polytope.hpp"
#include "toric/potential.hpp"

#include <functional>
#include <string>
#include <vector>

namespace toric {

// Node (i, j) sits at origin + (i*h.x, j*h.y), stored at i*ny + j.
struct GridSpec {
  Vec2 origin = Vec2::Zero();
  Vec2 h = Vec2::Ones();
  int nx = 0, ny = 0;

  Vec2 node(int i, int j) const { return origin + Vec2(i * h.x(), j * h.y()); }
  int flat(int i, int j) const { return i * ny + j; }
  int size() const { return nx * ny; }
  bool operator==(const GridSpec& o) const {
    return origin == o.origin && h == o.h && nx == o.nx && ny == o.ny;
  }
};

// Bounding box of the polytope split into `cells` intervals per axis, padded by
// `ghost` node layers on every side.
GridSpec polytope_grid(const Polytope& poly, int cells, int ghost = 2);

// Grid-sampled correction psi. Interpolation is tensor-product quintic Hermite
// with nodal first and second derivatives taken from central differences, so the
// interpolant is C^2 and its nodal second derivatives equal the difference
// quotients. Third and fourth derivatives are centred differences of the
// interpolated Hessian with step h.
class SmoothPart : public Potential {
 public:
  SmoothPart() = default;
  SmoothPart(GridSpec grid, std::vector<double> values);
  static SmoothPart zeros(const GridSpec& grid);
  static SmoothPart sample(const GridSpec& grid, const std::function<double(const Vec2&)>& f);

  Jet jet(const Vec2& xi, int order, double clamp = kEvalClamp) const override;
  double closure_value(const Vec2& xi) const override { return interp(xi, 0).value; }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double at(int i, int j) const { return values_[grid_.flat(i, j)]; }

  std::string to_json() const;
  static SmoothPart from_json(const std::string& text);

 private:
  Jet interp(const Vec2& xi, int order) const;
  GridSpec grid_;
  std::vector<double> values_;
};

PotentialPtr symplectic_potential(const Polytope& poly, std::shared_ptr<const SmoothPart> psi);

}  // namespace toric
