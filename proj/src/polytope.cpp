#include "toric/polytope.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace toric {

namespace {

constexpr double kGeomTol = 1e-12;

long long gcd_ll(long long a, long long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

std::string vec_str(const Vec2& p) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << p.x() << ", " << p.y() << ")";
  return os.str();
}

// Intersection of two facet lines, exact when both offsets are rational.
Vec2 meet(const Facet& f, const Facet& g) {
  const long long a = f.normal[0], b = f.normal[1], c = g.normal[0], d = g.normal[1];
  const long long det = a * d - b * c;
  if (f.exact_offset && g.exact_offset) {
    const Rational& p = *f.exact_offset;
    const Rational& q = *g.exact_offset;
    Rational x = (Rational::make(d, 1) * p - Rational::make(b, 1) * q) * Rational::make(1, det);
    Rational y = (Rational::make(a, 1) * q - Rational::make(c, 1) * p) * Rational::make(1, det);
    return Vec2(x.value(), y.value());
  }
  const double dd = double(det);
  return Vec2((double(d) * f.offset - double(b) * g.offset) / dd,
              (double(a) * g.offset - double(c) * f.offset) / dd);
}

std::optional<Rational> parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      std::size_t pos = 0;
      long long n = std::stoll(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return Rational::make(n, 1);
    }
    std::size_t p1 = 0, p2 = 0;
    std::string ns = s.substr(0, slash), ds = s.substr(slash + 1);
    long long n = std::stoll(ns, &p1), d = std::stoll(ds, &p2);
    if (p1 != ns.size() || p2 != ds.size() || d == 0) return std::nullopt;
    return Rational::make(n, d);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n');
}

}  // namespace

Rational Rational::make(long long n, long long d) {
  if (d == 0) throw DomainError("rational with zero denominator");
  if (d < 0) { n = -n; d = -d; }
  long long g = gcd_ll(n, d);
  if (g > 1) { n /= g; d /= g; }
  return Rational{n, d};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::operator+(const Rational& o) const { return make(num * o.den + o.num * den, den * o.den); }
Rational Rational::operator-(const Rational& o) const { return make(num * o.den - o.num * den, den * o.den); }
Rational Rational::operator*(const Rational& o) const { return make(num * o.num, den * o.den); }

Polytope::Polytope(std::vector<Facet> facets, std::string name)
    : name_(std::move(name)), facets_(std::move(facets)) {
  const std::size_t m = facets_.size();
  if (m < 3) throw DomainError("polytope needs at least 3 facets, got " + std::to_string(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = facets_[i].normal;
    if (v[0] == 0 && v[1] == 0) throw DomainError("facet " + std::to_string(i) + ": zero normal");
    if (gcd_ll(v[0], v[1]) != 1)
      throw DomainError("facet " + std::to_string(i) + ": normal (" + std::to_string(v[0]) + "," +
                        std::to_string(v[1]) + ") is not primitive");
  }
  auto dets = [&] {
    std::vector<long long> d(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& p = facets_[i].normal;
      const auto& q = facets_[(i + 1) % m].normal;
      d[i] = p[0] * q[1] - p[1] * q[0];
    }
    return d;
  }();
  for (std::size_t i = 0; i < m; ++i)
    if (dets[i] == 0)
      throw DomainError("facets " + std::to_string(i) + " and " + std::to_string((i + 1) % m) +
                        " are parallel: empty or unbounded interior");
  if (std::all_of(dets.begin(), dets.end(), [](long long d) { return d < 0; }))
    throw DomainError("facets are ordered clockwise; list them counterclockwise (reverse the order)");

  vertices_.resize(m);
  for (std::size_t i = 0; i < m; ++i) vertices_[i] = meet(facets_[i], facets_[(i + 1) % m]);

  for (std::size_t i = 0; i < m; ++i) {
    if (dets[i] != 1 && dets[i] != -1)
      throw DomainError("Delzant condition fails at vertex " + std::to_string(i) + " " +
                        vec_str(vertices_[i]) + ": det = " + std::to_string(dets[i]));
    if (dets[i] != 1)
      throw DomainError("vertex " + std::to_string(i) + " " + vec_str(vertices_[i]) +
                        " has clockwise normal pair; facets must be counterclockwise");
  }

  edges_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    Edge e;
    e.facet = int(i);
    e.a = vertices_[(i + m - 1) % m];
    e.b = vertices_[i];
    e.length = (e.b - e.a).norm();
    e.density = 1.0 / facets_[i].norm();
    if (e.length <= kGeomTol)
      throw DomainError("edge " + std::to_string(i) + " has zero length: empty or degenerate interior");
    Vec2 d = e.b - e.a;
    if (facets_[i].n().dot(Vec2(-d.y(), d.x())) <= 0)
      throw DomainError("edge " + std::to_string(i) + " is traversed against its normal: not a convex polygon");
    edges_[i] = e;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (facets_[j].eval(vertices_[i]) < -1e-9)
        throw DomainError("vertex " + std::to_string(i) + " " + vec_str(vertices_[i]) + " violates facet " +
                          std::to_string(j) + ": empty or non-convex interior");

  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = vertices_[i];
    const Vec2& q = vertices_[(i + 1) % m];
    double cr = p.x() * q.y() - q.x() * p.y();
    a2 += cr;
    cx += (p.x() + q.x()) * cr;
    cy += (p.y() + q.y()) * cr;
  }
  area_ = 0.5 * a2;
  if (area_ <= kGeomTol) throw DomainError("polytope has non-positive area");
  centroid_ = Vec2(cx / (3.0 * a2), cy / (3.0 * a2));
  lo_ = hi_ = vertices_[0];
  for (const auto& v : vertices_) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
}

std::vector<int> Polytope::vertex_determinants() const {
  std::vector<int> d(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& p = facets_[i].normal;
    const auto& q = facets_[(i + 1) % size()].normal;
    d[i] = int(p[0] * q[1] - p[1] * q[0]);
  }
  return d;
}

std::vector<double> Polytope::facet_values(const Vec2& xi) const {
  std::vector<double> l(size());
  for (std::size_t i = 0; i < size(); ++i) l[i] = facets_[i].eval(xi);
  return l;
}

double Polytope::min_facet_value(const Vec2& xi) const {
  double m = facets_[0].eval(xi);
  for (std::size_t i = 1; i < size(); ++i) m = std::min(m, facets_[i].eval(xi));
  return m;
}

bool Polytope::contains(const Vec2& xi, double tol) const { return min_facet_value(xi) > -tol; }

double Polytope::diameter() const {
  double d = 0.0;
  for (const auto& p : vertices_)
    for (const auto& q : vertices_) d = std::max(d, (p - q).norm());
  return d;
}

double Polytope::euclid_distance_to_boundary(const Vec2& xi) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : edges_) {
    Vec2 d = e.b - e.a;
    double t = std::clamp((xi - e.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (xi - (e.a + t * d)).norm());
  }
  return best;
}

BoundaryMeasure boundary_measure(const Polytope& poly) {
  BoundaryMeasure bm;
  for (const auto& e : poly.edges()) {
    bm.density.push_back(e.density);
    bm.total += e.length * e.density;
  }
  return bm;
}

Polytope parse_polytope(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("polytope JSON, line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("facets") || !j["facets"].is_array())
    throw ParseError("polytope JSON: field 'facets' must be an array");
  std::vector<Facet> facets;
  for (std::size_t i = 0; i < j["facets"].size(); ++i) {
    const auto& f = j["facets"][i];
    const std::string where = "facets[" + std::to_string(i) + "]";
    if (!f.is_object()) throw ParseError(where + ": expected an object");
    if (!f.contains("normal") || !f["normal"].is_array() || f["normal"].size() != 2 ||
        !f["normal"][0].is_number_integer() || !f["normal"][1].is_number_integer())
      throw ParseError(where + ".normal: expected an array of 2 integers");
    if (!f.contains("offset")) throw ParseError(where + ".offset: missing");
    Facet fa;
    fa.normal = {f["normal"][0].get<long long>(), f["normal"][1].get<long long>()};
    const auto& o = f["offset"];
    if (o.is_number_integer()) {
      fa.exact_offset = Rational::make(o.get<long long>(), 1);
    } else if (o.is_number()) {
      double v = o.get<double>();
      if (std::floor(v) == v && std::abs(v) < 1e15) fa.exact_offset = Rational::make((long long)v, 1);
      fa.offset = v;
    } else if (o.is_string()) {
      const auto s = o.get<std::string>();
      fa.exact_offset = parse_rational(s);
      if (!fa.exact_offset) {
        try {
          std::size_t pos = 0;
          fa.offset = std::stod(s, &pos);
          if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
          throw ParseError(where + ".offset: cannot parse '" + s + "' as a rational or real");
        }
      }
    } else {
      throw ParseError(where + ".offset: expected a number or rational string");
    }
    if (fa.exact_offset) fa.offset = fa.exact_offset->value();
    facets.push_back(fa);
  }
  std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
  return Polytope(std::move(facets), name);
}

Polytope standard_polytope(const std::string& name) {
  auto f = [](long long a, long long b, long long off) {
    Facet x;
    x.normal = {a, b};
    x.exact_offset = Rational::make(off, 1);
    x.offset = double(off);
    return x;
  };
  if (name == "square") return Polytope({f(1, 0, 0), f(0, 1, 0), f(-1, 0, -1), f(0, -1, -1)}, name);
  if (name == "simplex") return Polytope({f(1, 0, 0), f(0, 1, 0), f(-1, -1, -1)}, name);
  if (name == "hirzebruch") return Polytope({f(0, 1, 0), f(-1, -1, -2), f(0, -1, -1), f(1, 0, 0)}, name);
  throw DomainError("unknown fixture polytope '" + name + "' (expected simplex, square or hirzebruch)");
}

Polytope load_polytope(const std::string& source) {
  if (source == "square" || source == "simplex" || source == "hirzebruch") return standard_polytope(source);
  std::ifstream in(source);
  if (!in) throw DomainError("cannot open polytope file '" + source + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polytope(ss.str());
}

std::string polytope_to_json(const Polytope& poly) {
  nlohmann::json j;
  j["facets"] = nlohmann::json::array();
  for (const auto& f : poly.facets()) {
    nlohmann::json fj;
    fj["normal"] = {f.normal[0], f.normal[1]};
    if (f.exact_offset)
      fj["offset"] = f.exact_offset->den == 1 ? nlohmann::json(f.exact_offset->num) : nlohmann::json(f.exact_offset->str());
    else
      fj["offset"] = f.offset;
    j["facets"].push_back(fj);
  }
  return j.dump(2);
}

Polytope transform(const Polytope& poly, const Eigen::Matrix2i& A, const Vec2& b) {
  const int det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  if (det != 1 && det != -1) throw DomainError("transform: matrix is not unimodular");
  // A^{-T} for an integer unimodular matrix
  Eigen::Matrix2i AinvT;
  AinvT << A(1, 1), -A(1, 0), -A(0, 1), A(0, 0);
  AinvT *= det;
  const bool integral_shift = std::floor(b.x()) == b.x() && std::floor(b.y()) == b.y();
  std::vector<Facet> out;
  for (const auto& f : poly.facets()) {
    Facet g;
    Eigen::Vector2i v(int(f.normal[0]), int(f.normal[1]));
    Eigen::Vector2i w = AinvT * v;
    g.normal = {w.x(), w.y()};
    const double shift = b.x() * w.x() + b.y() * w.y();
    g.offset = f.offset + shift;
    if (f.exact_offset && integral_shift)
      g.exact_offset = *f.exact_offset + Rational::make((long long)std::llround(shift), 1);
    out.push_back(g);
  }
  if (det < 0) std::reverse(out.begin(), out.end());
  return Polytope(std::move(out), poly.name());
}

}  // namespace toric
