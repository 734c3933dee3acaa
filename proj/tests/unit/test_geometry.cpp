#include "doctest.h"

#include <cmath>

#include "tube/geometry.hpp"

using namespace tube;

TEST_CASE("vector arithmetic in both dimensions") {
  const Vec a(1.0, 2.0), b(-0.5, 4.0);
  const Vec s = a + b;
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(6.0));
  CHECK(dot(a, b) == doctest::Approx(7.5));
  CHECK(norm2(a) == doctest::Approx(5.0));
  const Vec one_d(3.0);
  CHECK(one_d.n == 1);
  CHECK(norm(one_d) == doctest::Approx(3.0));
  CHECK(zero_vec(2).n == 2);
  CHECK(norm2(zero_vec(2)) == 0.0);
}

TEST_CASE("potential, gradient, and Hessian are consistent") {
  const TubePoint p{Vec(0.3, 5.1), Vec(0.8, -0.6)};
  CHECK(rho(p) == doctest::Approx(0.5));  // |xi| = 1
  const PhaseVec g = grad_rho(p);
  CHECK(norm2(g.x) == 0.0);
  CHECK(g.xi[0] == doctest::Approx(0.8));
  CHECK(g.xi[1] == doctest::Approx(-0.6));

  // Directional finite difference of rho reproduces <grad, w>.
  const PhaseVec w{Vec(0.2, -0.4), Vec(1.1, 0.5)};
  const double eps = 1e-6;
  const TubePoint q{p.x + eps * w.x, p.xi + eps * w.xi};
  const double fd = (rho(q) - rho(p)) / eps;
  CHECK(fd == doctest::Approx(dot(g, w)).epsilon(1e-5));

  // Hessian is the identity on the fiber block.
  const PhaseVec v{Vec(1.0, 0.0), Vec(0.25, -2.0)};
  CHECK(hess_rho(w, v) == doctest::Approx(dot(w.xi, v.xi)));
  CHECK(hess_rho(w, v) == doctest::Approx(0.25 * 1.1 - 2.0 * 0.5));
}

TEST_CASE("complex structure squares to minus one and is an isometry") {
  const PhaseVec w{Vec(0.7, -1.2), Vec(0.4, 2.2)};
  const PhaseVec jw = apply_J(w);
  CHECK(jw.x[0] == doctest::Approx(-0.4));
  CHECK(jw.x[1] == doctest::Approx(-2.2));
  CHECK(jw.xi[0] == doctest::Approx(0.7));
  CHECK(jw.xi[1] == doctest::Approx(-1.2));
  const PhaseVec jjw = apply_J(jw);
  CHECK(norm(jjw + w) < 1e-15);
  CHECK(norm2(jw) == doctest::Approx(norm2(w)));
  CHECK(dot(jw, w) == doctest::Approx(0.0));
}

TEST_CASE("hamilton field of the potential generates fiber translation to base flow") {
  const TubePoint p{Vec(0.0, 0.0), Vec(0.6, 0.8)};
  const PhaseVec h = hamilton_field(grad_rho(p));
  // J(0; xi) = (-xi; 0): the geodesic-flow generator up to sign.
  CHECK(h.x[0] == doctest::Approx(-0.6));
  CHECK(h.x[1] == doctest::Approx(-0.8));
  CHECK(norm2(h.xi) == 0.0);
}

TEST_CASE("angle wrapping and nearest periodic images") {
  CHECK(wrap_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - kTwoPi));
  CHECK(nearest_image(kTwoPi + 0.25) == doctest::Approx(0.25));
  CHECK(nearest_image(-kTwoPi - 0.25) == doctest::Approx(-0.25));
  CHECK(nearest_image(kPi + 0.1) == doctest::Approx(-kPi + 0.1));
}
