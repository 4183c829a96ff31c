#include "toric/target.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace toric {

Poly2 Poly2::constant(double c) {
  Poly2 p;
  if (c != 0.0) p.coeff[{0, 0}] = c;
  return p;
}

Poly2 Poly2::affine(double a0, double a1, double a2) {
  Poly2 p;
  if (a0 != 0.0) p.coeff[{0, 0}] = a0;
  if (a1 != 0.0) p.coeff[{1, 0}] = a1;
  if (a2 != 0.0) p.coeff[{0, 1}] = a2;
  return p;
}

double Poly2::operator()(const Vec2& xi) const {
  double s = 0.0;
  for (const auto& [e, c] : coeff) s += c * std::pow(xi.x(), e.first) * std::pow(xi.y(), e.second);
  return s;
}

int Poly2::degree() const {
  int d = 0;
  for (const auto& [e, c] : coeff)
    if (c != 0.0) d = std::max(d, e.first + e.second);
  return d;
}

bool Poly2::is_zero() const {
  for (const auto& kv : coeff)
    if (kv.second != 0.0) return false;
  return true;
}

Poly2 Poly2::operator+(const Poly2& o) const {
  Poly2 r = *this;
  for (const auto& [e, c] : o.coeff) r.coeff[e] += c;
  return r;
}

Poly2 Poly2::operator*(const Poly2& o) const {
  Poly2 r;
  for (const auto& [e1, c1] : coeff)
    for (const auto& [e2, c2] : o.coeff) r.coeff[{e1.first + e2.first, e1.second + e2.second}] += c1 * c2;
  return r;
}

Poly2 Poly2::scaled(double s) const {
  Poly2 r = *this;
  for (auto& kv : r.coeff) kv.second *= s;
  return r;
}

double Gaussian::operator()(const Vec2& xi) const {
  if (a == 0.0) return scale;
  return scale * std::exp(-a * (xi - c).squaredNorm());
}

Gaussian Gaussian::operator*(const Gaussian& o) const {
  if (a == 0.0) return Gaussian{o.a, o.c, o.scale * scale};
  if (o.a == 0.0) return Gaussian{a, c, o.scale * scale};
  Gaussian r;
  r.a = a + o.a;
  r.c = (a * c + o.a * o.c) / r.a;
  r.scale = scale * o.scale * std::exp(-a * o.a / r.a * (c - o.c).squaredNorm());
  return r;
}

TargetFunction TargetFunction::constant(double c) { return affine(c, 0.0, 0.0); }

TargetFunction TargetFunction::affine(double a0, double a1, double a2) {
  TargetFunction t;
  t.add_term({Poly2::affine(a0, a1, a2), Gaussian{}});
  return t;
}

TargetFunction TargetFunction::bump(const Vec2& c, double w) {
  if (!(w > 0.0)) throw DomainError("bump width must be positive");
  TargetFunction t;
  t.add_term({Poly2::constant(1.0), Gaussian{0.5 / (w * w), c, 1.0}});
  return t;
}

void TargetFunction::add_term(const Term& t) {
  // fold the Gaussian scale into the polynomial
  Term n{t.poly.scaled(t.gauss.scale), Gaussian{t.gauss.a, t.gauss.a == 0.0 ? Vec2::Zero() : t.gauss.c, 1.0}};
  if (n.poly.is_zero()) return;
  for (auto& e : terms_)
    if (e.gauss.same_shape(n.gauss)) {
      e.poly = e.poly + n.poly;
      return;
    }
  terms_.push_back(n);
}

double TargetFunction::operator()(const Vec2& xi) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.poly(xi) * t.gauss(xi);
  return s;
}

TargetFunction TargetFunction::operator+(const TargetFunction& o) const {
  TargetFunction r = *this;
  for (const auto& t : o.terms_) r.add_term(t);
  return r;
}

TargetFunction TargetFunction::operator-(const TargetFunction& o) const { return *this + o.scaled(-1.0); }

TargetFunction TargetFunction::operator*(const TargetFunction& o) const {
  TargetFunction r;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) r.add_term({a.poly * b.poly, a.gauss * b.gauss});
  return r;
}

TargetFunction TargetFunction::scaled(double s) const {
  TargetFunction r;
  for (const auto& t : terms_) r.add_term({t.poly.scaled(s), t.gauss});
  return r;
}

bool TargetFunction::is_polynomial() const {
  for (const auto& t : terms_)
    if (t.gauss.a != 0.0 && !t.poly.is_zero()) return false;
  return true;
}

Poly2 TargetFunction::polynomial() const {
  Poly2 p;
  for (const auto& t : terms_)
    if (t.gauss.a == 0.0) p = p + t.poly;
  return p;
}

bool TargetFunction::affine_coefficients(double& a0, double& a1, double& a2) const {
  if (!is_polynomial()) return false;
  const Poly2 p = polynomial();
  if (p.degree() > 1) return false;
  auto get = [&](int i, int j) {
    auto it = p.coeff.find({i, j});
    return it == p.coeff.end() ? 0.0 : it->second;
  };
  a0 = get(0, 0);
  a1 = get(1, 0);
  a2 = get(0, 1);
  return true;
}

std::string TargetFunction::str() const {
  auto num = [](double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return std::string(b);
  };
  std::string out;
  for (const auto& t : terms_) {
    std::string poly;
    for (const auto& [e, c] : t.poly.coeff) {
      if (c == 0.0) continue;
      std::string m = num(c);
      for (int k = 0; k < e.first; ++k) m += "*xi1";
      for (int k = 0; k < e.second; ++k) m += "*xi2";
      poly += (poly.empty() ? "" : " + ") + m;
    }
    if (poly.empty()) continue;
    std::string term = "(" + poly + ")";
    if (t.gauss.a != 0.0)
      term += "*bump(" + num(t.gauss.c.x()) + ", " + num(t.gauss.c.y()) + ", " + num(std::sqrt(0.5 / t.gauss.a)) + ")";
    out += (out.empty() ? "" : " + ") + term;
  }
  return out.empty() ? "0" : out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  TargetFunction run() {
    TargetFunction r = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("K expression, column " + std::to_string(pos_ + 1) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  TargetFunction sum() {
    TargetFunction r = product();
    for (;;) {
      if (eat('+')) r = r + product();
      else if (eat('-')) r = r - product();
      else return r;
    }
  }
  TargetFunction product() {
    TargetFunction r = unary();
    while (eat('*')) r = r * unary();
    return r;
  }
  TargetFunction unary() {
    if (eat('-')) return unary().scaled(-1.0);
    if (eat('+')) return unary();
    return atom();
  }
  double number_arg() {
    TargetFunction t = sum();
    double a0, a1, a2;
    if (!t.affine_coefficients(a0, a1, a2) || a1 != 0.0 || a2 != 0.0) fail("bump arguments must be constants");
    return a0;
  }
  TargetFunction atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      TargetFunction r = sum();
      expect(')');
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return TargetFunction::constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "xi1") return TargetFunction::affine(0.0, 1.0, 0.0);
      if (id == "xi2") return TargetFunction::affine(0.0, 0.0, 1.0);
      if (id == "bump") {
        expect('(');
        const double cx = number_arg();
        expect(',');
        const double cy = number_arg();
        expect(',');
        const double w = number_arg();
        expect(')');
        if (!(w > 0.0)) fail("bump width must be positive");
        return TargetFunction::bump(Vec2(cx, cy), w);
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

TargetFunction TargetFunction::parse(const std::string& expr) { return Parser(expr).run(); }

}  // namespace toric
