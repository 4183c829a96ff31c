#include "toric/smooth_part.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace toric {

namespace {

// Quintic Hermite basis on [0,1]: kBasis[c][p] reproduces the p-th derivative at end c.
constexpr double kBasis[2][3][6] = {
    {{1, 0, 0, -10, 15, -6}, {0, 1, 0, -6, 8, -3}, {0, 0, 0.5, -1.5, 1.5, -0.5}},
    {{0, 0, 0, 10, -15, 6}, {0, 0, 0, -4, 7, -3}, {0, 0, 0, 0.5, -1.0, 0.5}},
};

double poly_deriv(const double* c, int r, double t) {
  double s = 0.0, tp = 1.0;
  for (int k = r; k < 6; ++k) {
    double f = 1.0;
    for (int m = 0; m < r; ++m) f *= double(k - m);
    s += f * c[k] * tp;
    tp *= t;
  }
  return s;
}

}  // namespace

GridSpec polytope_grid(const Polytope& poly, int cells, int ghost) {
  if (cells < 2) throw DomainError("grid needs at least 2 cells per axis");
  GridSpec g;
  const Vec2 lo = poly.lower(), hi = poly.upper();
  g.h = (hi - lo) / double(cells);
  g.origin = lo - double(ghost) * g.h;
  g.nx = g.ny = cells + 1 + 2 * ghost;
  return g;
}

SmoothPart::SmoothPart(GridSpec grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.nx < 4 || grid_.ny < 4) throw DomainError("smooth part grid must have at least 4x4 nodes");
  if (int(values_.size()) != grid_.size()) throw DomainError("smooth part: value count does not match grid");
  if (!(grid_.h.x() > 0 && grid_.h.y() > 0)) throw DomainError("smooth part: spacing must be positive");
}

SmoothPart SmoothPart::zeros(const GridSpec& grid) { return SmoothPart(grid, std::vector<double>(grid.size(), 0.0)); }

SmoothPart SmoothPart::sample(const GridSpec& grid, const std::function<double(const Vec2&)>& f) {
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) v[grid.flat(i, j)] = f(grid.node(i, j));
  return SmoothPart(grid, std::move(v));
}

Jet SmoothPart::interp(const Vec2& xi, int order) const {
  const double h1 = grid_.h.x(), h2 = grid_.h.y();
  const Vec2 rel = xi - grid_.origin;
  int i = int(std::floor(rel.x() / h1)), j = int(std::floor(rel.y() / h2));
  i = std::clamp(i, 1, grid_.nx - 3);
  j = std::clamp(j, 1, grid_.ny - 3);
  const double t = rel.x() / h1 - i, s = rel.y() / h2 - j;

  double V[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) V[a][b] = at(i - 1 + a, j - 1 + b);
  // difference stencils scaled so that N * h^p enters the basis directly
  static constexpr double D[3][3] = {{0, 1, 0}, {-0.5, 0, 0.5}, {1, -2, 1}};

  double N[2][2][3][3];
  for (int ca = 0; ca < 2; ++ca)
    for (int cb = 0; cb < 2; ++cb)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          double acc = 0.0;
          for (int r = 0; r < 3; ++r)
            for (int u = 0; u < 3; ++u) acc += D[p][r] * D[q][u] * V[ca + r][cb + u];
          N[ca][cb][p][q] = acc;  // equals h1^p h2^q * (d^p_x d^q_y psi)
        }

  auto eval = [&](int rx, int ry) {
    double bx[2][3], by[2][3];
    for (int c = 0; c < 2; ++c)
      for (int p = 0; p < 3; ++p) {
        bx[c][p] = poly_deriv(kBasis[c][p], rx, t);
        by[c][p] = poly_deriv(kBasis[c][p], ry, s);
      }
    double acc = 0.0;
    for (int ca = 0; ca < 2; ++ca)
      for (int cb = 0; cb < 2; ++cb)
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q) acc += N[ca][cb][p][q] * bx[ca][p] * by[cb][q];
    return acc / (std::pow(h1, rx) * std::pow(h2, ry));
  };

  Jet J;
  J.order = order;
  J.value = eval(0, 0);
  if (order >= 1) J.grad = Vec2(eval(1, 0), eval(0, 1));
  if (order >= 2) {
    const double hxy = eval(1, 1);
    J.hess << eval(2, 0), hxy, hxy, eval(0, 2);
  }
  return J;
}

Jet SmoothPart::jet(const Vec2& xi, int order, double) const {
  Jet J = interp(xi, std::min(order, 2));
  J.order = order;
  if (order < 3) return J;
  const double h1 = grid_.h.x(), h2 = grid_.h.y();
  auto H = [&](double a, double b) { return interp(xi + Vec2(a * h1, b * h2), 2).hess; };
  const Mat2 xp = H(1, 0), xm = H(-1, 0), yp = H(0, 1), ym = H(0, -1);
  const Mat2 d1 = (xp - xm) / (2 * h1), d2 = (yp - ym) / (2 * h2);
  // symmetrized: psi_ijk from every available (pair, direction) split
  const double t111 = d1(0, 0);
  const double t112 = 0.5 * (d2(0, 0) + d1(0, 1));
  const double t122 = 0.5 * (d1(1, 1) + d2(0, 1));
  const double t222 = d2(1, 1);
  const double T3v[4] = {t111, t112, t122, t222};  // by number of 2-indices
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) J.d3[ix3(i, j, k)] = T3v[i + j + k];
  if (order < 4) return J;
  const Mat2 c = J.hess;
  const Mat2 pp = H(1, 1), pm = H(1, -1), mp = H(-1, 1), mm = H(-1, -1);
  const Mat2 d11 = (xp - 2 * c + xm) / (h1 * h1);
  const Mat2 d22 = (yp - 2 * c + ym) / (h2 * h2);
  const Mat2 d12 = (pp - pm - mp + mm) / (4 * h1 * h2);
  const double T4v[5] = {
      d11(0, 0),
      0.5 * (d12(0, 0) + d11(0, 1)),
      (d22(0, 0) + d11(1, 1) + d12(0, 1)) / 3.0,
      0.5 * (d12(1, 1) + d22(0, 1)),
      d22(1, 1),
  };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) J.d4[ix4(i, j, k, l)] = T4v[i + j + k + l];
  return J;
}

std::string SmoothPart::to_json() const {
  nlohmann::json j;
  j["origin"] = {grid_.origin.x(), grid_.origin.y()};
  j["spacing"] = {grid_.h.x(), grid_.h.y()};
  j["dims"] = {grid_.nx, grid_.ny};
  j["values"] = values_;
  return j.dump();
}

SmoothPart SmoothPart::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    GridSpec g;
    g.origin = Vec2(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>());
    g.h = Vec2(j.at("spacing").at(0).get<double>(), j.at("spacing").at(1).get<double>());
    g.nx = j.at("dims").at(0).get<int>();
    g.ny = j.at("dims").at(1).get<int>();
    return SmoothPart(g, j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("smooth part: ") + e.what());
  }
}

PotentialPtr symplectic_potential(const Polytope& poly, std::shared_ptr<const SmoothPart> psi) {
  std::vector<PotentialPtr> terms{guillemin(poly)};
  if (psi) terms.push_back(std::move(psi));
  return std::make_shared<SumPotential>(std::move(terms));
}

}  // namespace toric
