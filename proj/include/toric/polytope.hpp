#pragma once

#include "toric/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toric {

struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational make(long long n, long long d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
};

// l(xi) = <xi, normal> - offset, positive on the interior.
struct Facet {
  std::array<long long, 2> normal{0, 0};
  double offset = 0.0;
  std::optional<Rational> exact_offset;

  Vec2 n() const { return Vec2(double(normal[0]), double(normal[1])); }
  double eval(const Vec2& xi) const { return n().dot(xi) - offset; }
  double norm() const { return n().norm(); }
};

struct Edge {
  int facet = 0;
  Vec2 a, b;            // counterclockwise endpoints
  double length = 0.0;
  double density = 0.0;  // 1/|v| so that dsigma = density * arclength
};

struct BoundaryMeasure {
  std::vector<double> density;
  double total = 0.0;
};

class Polytope {
 public:
  Polytope() = default;
  // Validates primitivity, orientation, boundedness and the Delzant condition.
  explicit Polytope(std::vector<Facet> facets, std::string name = "");

  const std::string& name() const { return name_; }
  const std::vector<Facet>& facets() const { return facets_; }
  // vertex i = facet i meets facet i+1
  const std::vector<Vec2>& vertices() const { return vertices_; }
  // edge i lies on facet i and runs from vertex i-1 to vertex i
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return facets_.size(); }

  std::vector<int> vertex_determinants() const;
  std::vector<double> facet_values(const Vec2& xi) const;
  double min_facet_value(const Vec2& xi) const;
  bool contains(const Vec2& xi, double tol = 0.0) const;

  double area() const { return area_; }
  Vec2 centroid() const { return centroid_; }
  Vec2 lower() const { return lo_; }
  Vec2 upper() const { return hi_; }
  double diameter() const;
  double euclid_distance_to_boundary(const Vec2& xi) const;

 private:
  std::string name_;
  std::vector<Facet> facets_;
  std::vector<Vec2> vertices_;
  std::vector<Edge> edges_;
  double area_ = 0.0;
  Vec2 centroid_ = Vec2::Zero();
  Vec2 lo_ = Vec2::Zero(), hi_ = Vec2::Zero();
};

BoundaryMeasure boundary_measure(const Polytope& poly);

Polytope parse_polytope(const std::string& json_text);
Polytope standard_polytope(const std::string& name);
// Fixture name or path to a JSON file.
Polytope load_polytope(const std::string& source);
std::string polytope_to_json(const Polytope& poly);

// Image under xi -> A xi + b with A unimodular; normals map by A^{-T}.
Polytope transform(const Polytope& poly, const Eigen::Matrix2i& A, const Vec2& b);

}  // namespace toric
