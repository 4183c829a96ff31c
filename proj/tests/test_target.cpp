#include <doctest.h>

#include "toric/target.hpp"

#include <cmath>

using namespace toric;

TEST_CASE("constants, affine functions and bumps") {
  CHECK(TargetFunction::constant(4)(Vec2(0.3, 0.9)) == 4.0);
  const TargetFunction a = TargetFunction::affine(1, 2, -3);
  CHECK(a(Vec2(0.5, 0.25)) == doctest::Approx(1 + 1 - 0.75));
  double a0, a1, a2;
  REQUIRE(a.affine_coefficients(a0, a1, a2));
  CHECK(a1 == 2.0);
  const TargetFunction b = TargetFunction::bump(Vec2(0.5, 0.5), 0.15);
  CHECK(b(Vec2(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(b(Vec2(0.65, 0.5)) == doctest::Approx(std::exp(-0.5)));
  CHECK_FALSE(b.is_polynomial());
  CHECK_FALSE(b.affine_coefficients(a0, a1, a2));
}

TEST_CASE("algebra agrees with pointwise evaluation") {
  const TargetFunction f = TargetFunction::affine(1, 2, 0) * TargetFunction::affine(0, 1, 1) +
                           TargetFunction::bump(Vec2(0.2, 0.3), 0.4).scaled(0.5);
  const TargetFunction g = f * TargetFunction::bump(Vec2(0.6, 0.1), 0.3) - TargetFunction::constant(2);
  for (const Vec2& p : {Vec2(0.1, 0.2), Vec2(0.7, 0.4), Vec2(-0.3, 1.2)}) {
    const double fp = (1 + 2 * p.x()) * (p.x() + p.y()) +
                      0.5 * std::exp(-(p - Vec2(0.2, 0.3)).squaredNorm() / (2 * 0.16));
    CHECK(f(p) == doctest::Approx(fp).epsilon(1e-14));
    CHECK(g(p) == doctest::Approx(fp * std::exp(-(p - Vec2(0.6, 0.1)).squaredNorm() / (2 * 0.09)) - 2).epsilon(1e-13));
  }
  const TargetFunction q = TargetFunction::affine(1, 1, 0) * TargetFunction::affine(1, -1, 0);
  REQUIRE(q.is_polynomial());
  CHECK(q.polynomial().degree() == 2);
}

TEST_CASE("expression grammar") {
  const TargetFunction k = TargetFunction::parse("4 + 0.05*bump(0.5, 0.5, 0.15) - 2*(xi1 - 0.5)*xi2");
  const Vec2 p(0.3, 0.7);
  CHECK(k(p) == doctest::Approx(4 + 0.05 * std::exp(-(p - Vec2(0.5, 0.5)).squaredNorm() / (2 * 0.0225)) -
                                2 * (0.3 - 0.5) * 0.7)
                    .epsilon(1e-14));
  CHECK(TargetFunction::parse("-xi1 + +3")(Vec2(1, 0)) == doctest::Approx(2));
  CHECK(TargetFunction::parse("1e-1*xi2")(Vec2(0, 2)) == doctest::Approx(0.2));
  const TargetFunction r = TargetFunction::parse(k.str());
  CHECK(r(p) == doctest::Approx(k(p)).epsilon(1e-14));
}

TEST_CASE("grammar errors carry the column") {
  for (const char* bad : {"4 +", "xi3", "bump(0.5, 0.5)", "(1 + xi1", "4 ** 2", "2 xi1", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(TargetFunction::parse(bad), ParseError);
  }
  try {
    TargetFunction::parse("1 + xi3");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
  }
}
