#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "tube/modes.hpp"

using namespace tube;

namespace {

// Uniform-grid quadrature of |u|^2 over the torus; exact for trigonometric
// sums whose frequency differences are not multiples of the grid size.
double grid_mass(const ModeSum& u, int res) {
  double acc = 0.0;
  if (u.n == 1) {
    for (int i = 0; i < res; ++i) acc += std::norm(eval_u(u, Vec(kTwoPi * i / res)));
    return acc * kTwoPi / res;
  }
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j)
      acc += std::norm(eval_u(u, Vec(kTwoPi * i / res, kTwoPi * j / res)));
  return acc * kTwoPi * kTwoPi / (res * res);
}

}  // namespace

TEST_CASE("normalized single modes have unit mass and h = 1/|k|") {
  const ModeSum u2 = single_mode(2, {3, 4});
  CHECK(u2.h == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(l2_mass(u2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(u2.modes[0].coeff) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-15));

  const ModeSum u1 = single_mode(1, {-7, 0});
  CHECK(u1.n == 1);
  CHECK(u1.h == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(l2_mass(u1) == doctest::Approx(1.0).epsilon(1e-14));

  const ModeSum raw = single_mode(1, {5, 0}, false);
  CHECK(raw.modes[0].coeff == std::complex<double>(1.0, 0.0));
}

TEST_CASE("parseval identity against grid quadrature") {
  ModeSum u = single_mode(2, {3, 4});
  Mode m2;
  m2.k = {-4, 3};
  m2.coeff = {0.3, -0.7};
  u.modes.push_back(m2);
  CHECK(grid_mass(u, 32) == doctest::Approx(l2_mass(u)).epsilon(1e-13));

  ModeSum v = single_mode(1, {2, 0}, false);
  Mode m3;
  m3.k = {-2, 0};
  m3.coeff = {0.0, 1.25};
  v.modes.push_back(m3);
  CHECK(grid_mass(v, 16) == doctest::Approx(l2_mass(v)).epsilon(1e-13));
}

TEST_CASE("lattice shells enumerate the expected points") {
  const auto s25 = shell_points(2, 25);
  CHECK(s25.size() == 12);  // (+-5,0),(0,+-5),(+-3,+-4),(+-4,+-3)
  for (const auto& k : s25) CHECK(k[0] * k[0] + k[1] * k[1] == 25);
  // Sorted and duplicate-free.
  for (size_t i = 1; i < s25.size(); ++i) CHECK(s25[i - 1] < s25[i]);

  CHECK(shell_points(2, 3).empty());  // not a sum of two squares
  const auto s49 = shell_points(1, 49);
  CHECK(s49.size() == 2);
  CHECK(s49.front()[0] == -7);
  CHECK(s49.back()[0] == 7);
}

TEST_CASE("shell ensembles are unit-mass, deterministic, and vary by draw") {
  EnsembleSpec spec;
  spec.n = 2;
  spec.r2 = 25;
  spec.draws = 4;
  spec.seed = 2024;
  const auto ens = make_shell_ensemble(spec);
  REQUIRE(ens.size() == 4);
  for (const ModeSum& u : ens) {
    CHECK(u.modes.size() == 12);
    CHECK(u.h == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(l2_mass(u) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto again = make_shell_ensemble(spec);
  for (size_t d = 0; d < ens.size(); ++d)
    for (size_t m = 0; m < ens[d].modes.size(); ++m)
      CHECK(ens[d].modes[m].coeff == again[d].modes[m].coeff);
  CHECK(ens[0].modes[0].coeff != ens[1].modes[0].coeff);
}

TEST_CASE("precompiled evaluator matches the continued sum") {
  EnsembleSpec spec;
  spec.n = 2;
  spec.r2 = 25;
  spec.seed = 7;
  const ModeSum u = make_shell_ensemble(spec).front();
  const ModeEval ev(u);
  const TubePoint pts[] = {{Vec(0.3, 1.1), Vec(0.4, -0.2)},
                           {Vec(5.0, 2.2), Vec(-1.2, 0.7)},
                           {Vec(0.0, 0.0), Vec(0.0, 0.0)}};
  for (const TubePoint& p : pts) {
    const LogComplex a = ev.at(p);
    const LogComplex b = eval_u_complex(u, p);
    CHECK(std::abs(a.logmag - b.logmag) < 1e-12 * std::max(1.0, std::abs(b.logmag)));
    CHECK(std::abs(a.to_std_scaled(b.logmag) - b.to_std_scaled(b.logmag)) < 1e-12);
  }
  // At xi = 0 the continuation reduces to the real evaluation.
  const Vec x0(1.0, 2.0);
  const std::complex<double> real_val = eval_u(u, x0);
  const LogComplex cont_val = ev(x0, Vec(0.0, 0.0));
  CHECK(std::abs(cont_val.to_std() - real_val) < 1e-14);
}

TEST_CASE("jet derivatives agree with central finite differences") {
  ModeSum u = single_mode(2, {2, 1});
  Mode m2;
  m2.k = {-1, -2};
  m2.coeff = {0.4, 0.9};
  u.modes.push_back(m2);
  const TubePoint p{Vec(0.7, -0.3), Vec(0.35, -0.5)};
  const Jet2 j = eval_jet2(u, p);

  const double eps = 1e-5;
  auto value_at = [&](int a, double t) {
    TubePoint q = p;
    if (a < 2)
      q.x[a] += t;
    else
      q.xi[a - 2] += t;
    return eval_u_complex(u, q).to_std_scaled(j.logscale);
  };
  for (int a = 0; a < 4; ++a) {
    const std::complex<double> fd = (value_at(a, eps) - value_at(a, -eps)) / (2.0 * eps);
    CHECK(std::abs(fd - j.du[static_cast<size_t>(a)]) < 1e-8 * std::abs(j.u) + 1e-10);
    const std::complex<double> fd2 =
        (value_at(a, eps) - 2.0 * value_at(a, 0.0) + value_at(a, -eps)) / (eps * eps);
    CHECK(std::abs(fd2 - j.d2(a, a)) < 1e-4 * std::abs(j.u) + 1e-6);
  }
  // Mixed second derivative via the four-point stencil.
  auto value_ab = [&](double s, double t) {
    TubePoint q = p;
    q.x[0] += s;
    q.xi[1] += t;
    return eval_u_complex(u, q).to_std_scaled(j.logscale);
  };
  const std::complex<double> fd_mixed =
      (value_ab(eps, eps) - value_ab(eps, -eps) - value_ab(-eps, eps) + value_ab(-eps, -eps)) /
      (4.0 * eps * eps);
  CHECK(std::abs(fd_mixed - j.d2(0, 3)) < 1e-5 * std::abs(j.u) + 1e-8);
}

TEST_CASE("continuations are harmonic on the chart") {
  // Each mode contributes -k_j^2 u on the base block and +k_j^2 u on the
  // fiber block, so the chart Laplacian cancels exactly.
  EnsembleSpec spec;
  spec.n = 2;
  spec.r2 = 25;
  spec.seed = 3;
  const ModeSum u = make_shell_ensemble(spec).front();
  const Jet2 j = eval_jet2(u, {Vec(0.9, 0.1), Vec(-0.4, 0.8)});
  const LogComplex lap = jet_laplacian(j);
  const LogComplex val = jet_value(j);
  CHECK((lap.is_zero() || lap.logmag < val.logmag - 25.0));
}

TEST_CASE("weighted jet applies the fiber weight exactly") {
  const ModeSum u = single_mode(2, {3, 4});
  const TubePoint p{Vec(0.2, 0.5), Vec(0.6, -0.1)};
  const Jet2 j = eval_jet2(u, p);
  const Jet2 wj = weighted_jet2(j, p, u.h);
  const double r = 0.5 * norm2(p.xi);

  // Value: e^{-rho/h} u.
  const LogComplex wv = jet_value(wj);
  const LogComplex v = jet_value(j);
  CHECK(wv.logmag == doctest::Approx(v.logmag - r / u.h).epsilon(1e-12));

  // First derivatives against finite differences of the weighted field.
  const double eps = 1e-5;
  auto wvalue_at = [&](int a, double t) {
    TubePoint q = p;
    if (a < 2)
      q.x[a] += t;
    else
      q.xi[a - 2] += t;
    const LogComplex lc = eval_u_complex(u, q);
    return std::polar(std::exp(lc.logmag - 0.5 * norm2(q.xi) / u.h - wj.logscale), lc.phase);
  };
  for (int a = 0; a < 4; ++a) {
    const std::complex<double> fd = (wvalue_at(a, eps) - wvalue_at(a, -eps)) / (2.0 * eps);
    CHECK(std::abs(fd - wj.du[static_cast<size_t>(a)]) < 1e-7 * std::abs(wj.u) + 1e-10);
  }
}
