#include <doctest.h>

#include "toric/edge_sign.hpp"
#include "toric/operators.hpp"

#include <cmath>

using namespace toric;

TEST_CASE("edge frames are unimodular and adapted") {
  const Polytope P = standard_polytope("hirzebruch");
  for (int e = 0; e < static_cast<int>(P.size()); ++e) {
    const Edge& ed = P.edges()[e];
    const Vec2 q = ed.a + 0.3 * (ed.b - ed.a);
    const EdgeFrame f = edge_frame(P, e, q);
    CHECK(std::abs(std::abs(f.v.x() * f.w.y() - f.v.y() * f.w.x()) - 1.0) < 1e-14);
    CHECK(std::abs(f.s1(q, P)) < 1e-14);
    CHECK(std::abs(f.s2(q)) < 1e-14);
    const Vec2 p = f.point(0.02, -0.01, P);
    CHECK(f.s1(p, P) == doctest::Approx(0.02));
    CHECK(f.s2(p) == doctest::Approx(-0.01));
  }
}

TEST_CASE("one-variable profiles") {
  EdgeSignSpec s;
  s.signs = {1, 1, 1, 1};
  const EdgeSignPotential u(standard_polytope("square"), s);
  const double d = s.delta;
  // exact s log s inside the window, affine past 2 delta
  CHECK(u.alpha(0.5 * d, 0) == doctest::Approx(0.5 * d * std::log(0.5 * d)).epsilon(1e-14));
  CHECK(u.alpha(0.5 * d, 2) == doctest::Approx(1.0 / (0.5 * d)).epsilon(1e-12));
  CHECK(std::abs(u.alpha(2.5 * d, 2)) < 1e-14);
  const EdgeSignPiece& p = u.pieces()[0];
  for (double r : {0.0, 0.3 * d, -0.45 * d})
    CHECK(u.beta(p, r, 2) == doctest::Approx(1.0 / (p.a * r * r + p.c)).epsilon(1e-13));
  CHECK(std::abs(u.beta(p, 2.2 * d, 2)) < 1e-14);
  // beta' is the integral of beta''
  const double h = 1e-5, r = 1.3 * d;
  CHECK((u.beta(p, r + h, 1) - u.beta(p, r - h, 1)) / (2 * h) == doctest::Approx(u.beta(p, r, 2)).epsilon(1e-6));
  CHECK((u.beta(p, r + h, 0) - u.beta(p, r - h, 0)) / (2 * h) == doctest::Approx(u.beta(p, r, 1)).epsilon(1e-6));
}

TEST_CASE("requested signs appear on every window") {
  const Polytope sq = standard_polytope("square");
  for (const std::vector<int>& signs : {std::vector<int>{1, 1, 1, 1}, std::vector<int>{-1, -1, -1, -1},
                                        std::vector<int>{1, -1, -1, 1}}) {
    EdgeSignSpec s;
    s.signs = signs;
    const EdgeSignResult r = prescribe_edge_sign(sq, s);
    CHECK(r.all_signs_ok);
    for (const auto& w : r.windows) {
      CHECK(w.sign_ok);
      CHECK(w.S_at_q * w.requested_sign > 0.0);
      CHECK(w.S_min * w.requested_sign > 0.0);
      CHECK(w.S_max * w.requested_sign > 0.0);
      CHECK(w.a * w.requested_sign < 0.0);
    }
  }
}

TEST_CASE("S at q tends to -2a as eps decreases") {
  const Polytope sq = standard_polytope("square");
  for (int sign : {1, -1}) {
    double prev = 1e9;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      EdgeSignSpec s;
      s.signs = {sign, sign, sign, sign};
      s.eps = eps;
      const EdgeSignResult r = prescribe_edge_sign(sq, s);
      double err = 0.0;
      for (const auto& w : r.windows) err = std::max(err, std::abs(w.S_at_q + 2 * w.a));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 2e-2);
  }
}

TEST_CASE("c is raised when a negative a would break positivity") {
  EdgeSignSpec s;
  s.signs = {1, 1, 1, 1};
  s.a_magnitude = 50.0;
  s.c = 1e-4;
  const EdgeSignResult r = prescribe_edge_sign(standard_polytope("square"), s);
  for (const auto& w : r.windows) {
    CHECK(w.c_raised);
    CHECK(w.a * (s.delta * s.delta) + w.c > 0.0);
  }
}

TEST_CASE("invalid specifications") {
  const Polytope sq = standard_polytope("square");
  EdgeSignSpec s;
  s.signs = {1, 1};
  CHECK_THROWS_AS(prescribe_edge_sign(sq, s), DomainError);
  s.signs = {1, 1, 1, 1};
  s.delta = 0.4;
  CHECK_THROWS_AS(prescribe_edge_sign(sq, s), DomainError);
  s.delta = 0.08;
  s.eps = -1.0;
  CHECK_THROWS_AS(prescribe_edge_sign(sq, s), DomainError);
}
