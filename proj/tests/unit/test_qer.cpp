#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "tube/qer.hpp"

using namespace tube;

namespace {

ModeSum two_mode_shell() {
  ModeSum u = single_mode(2, {3, 4});
  Mode m2;
  m2.k = {-4, 3};
  m2.coeff = {0.3, -0.7};
  u.modes.push_back(m2);
  return u;
}

}  // namespace

TEST_CASE("pointwise operator identities hold on every member family") {
  const ModeSum u = two_mode_shell();
  const std::vector<HypersurfaceSpec> specs = {
      vertical_surface(2, {1, 0}, 0.3), tilted_surface(Vec(0.2, -0.1), 0.3),
      tube_graph_surface(0.4, cosine_poly({1, 0}))};
  const double params[][3] = {{0.15, 0.8, 0.45}, {0.62, 0.31, 0.9}};
  for (const HypersurfaceSpec& s : specs) {
    for (const auto& q : params) {
      const TubePoint p = sample_node(s, q[0], q[1], q[2]).p;
      CHECK(cr_residual(u, s, p) < 1e-12);
      CHECK(r_identity_residual(u, s, p) < 1e-12);
      CHECK(y_decomposition_residual(u, s, p) < 1e-11);
      // The conjugate continuation violates the tangency equation by O(1).
      CHECK(cr_residual(u, s, p, Continuation::ConjugateProbe) > 1e-2);
    }
  }
}

TEST_CASE("circle quadratic form: closed-form term ratio and value") {
  const double h = 1.0 / 25.0;
  const ModeSum u = single_mode(1, {25, 0});
  const HypersurfaceSpec s = vertical_surface(1, {1, 0}, 0.9);
  const SurfaceQuadratic q = cauchy_lhs(u, s, unit_weight, 256);

  // term1 = -(h/2) * mass, term2 = mass  =>  term2/term1 = -2/h.
  const std::complex<double> ratio = (q.term2 / q.term1).to_std();
  CHECK(std::abs(ratio - std::complex<double>(-2.0 / h, 0.0)) < 1e-6 * (2.0 / h));
  CHECK(q.scaled_term2 > 0.0);
  CHECK(q.scaled_term1 < 0.0);
  CHECK(q.imag_rel < 1e-10);

  // scaled LHS = (1 - h/2) * |c|^2 * sqrt(pi) with |c|^2 = 1/(2 pi).
  const double expected = (1.0 - 0.5 * h) / (2.0 * std::sqrt(kPi));
  CHECK(q.scaled_lhs == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("torus quadratic form against the slice reference") {
  const double h = 0.1;
  const ModeSum u = single_mode(2, {10, 0});
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  const SurfaceQuadratic q = cauchy_lhs(u, s, unit_weight, 96);

  // term1 = -h * mass, term2 = mass. Accuracy is limited by the Gaussian
  // tail cut off at the tube radius (erfc((tau-1)/sqrt(h))/2 ~ 4e-6 at
  // h = 0.1), amplified in term1 by the quadratic fiber growth of the
  // operator factors; measured error is 1.7e-4 relative, flat in res.
  const std::complex<double> ratio = (q.term2 / q.term1).to_std();
  CHECK(std::abs(ratio - std::complex<double>(-1.0 / h, 0.0)) < 5e-4 * (1.0 / h));
  CHECK(q.scaled_lhs == doctest::Approx(0.5 * (1.0 - h)).epsilon(5e-5));

  CHECK(qer_rhs_defect(s, unit_weight, u) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(qer_rhs_defect(s, unit_weight, single_mode(2, {0, 10})) ==
        doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(q.scaled_lhs / qer_rhs_defect(s, unit_weight, u) ==
        doctest::Approx(1.0 - h).epsilon(5e-5));

  // Curved-fiber members have no transverse base slice.
  CHECK_THROWS(qer_rhs_defect(tube_graph_surface(0.5, cosine_poly({1, 0})), unit_weight, u));
}

TEST_CASE("zero weight annihilates the quadratic form") {
  const ModeSum u = single_mode(2, {5, 0});
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  const SurfaceQuadratic q = cauchy_lhs(u, s, [](const SurfaceNode&) { return 0.0; }, 48);
  CHECK(q.term1.is_zero());
  CHECK(q.term2.is_zero());
  CHECK(q.scaled_lhs == 0.0);
}

TEST_CASE("gram route reproduces the direct quadrature route") {
  const ModeSum u = two_mode_shell();
  const std::vector<std::array<int, 2>> ks = {{3, 4}, {-4, 3}};
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.4);
  const SurfaceWeight a = [](const SurfaceNode& nd) { return 1.0 + 0.3 * std::sin(nd.p.x[1]); };
  const int res = 64;

  const SurfaceQuadratic direct = cauchy_lhs(u, s, a, res);
  const CauchyGram g = cauchy_gram(ks, 2, u.h, s, a, res);
  const std::vector<std::complex<double>> c = mode_coefficients(u, ks);
  const double via_gram = (gram_apply(g.t1, c) + gram_apply(g.t2, c)).real();
  CHECK(via_gram == doctest::Approx(direct.scaled_lhs).epsilon(1e-9));

  // The gram norm block carries the same weight as the form, so compare the
  // unweighted restriction norm against a unit-weight gram.
  const CauchyGram gn = cauchy_gram(ks, 2, u.h, s, unit_weight, res, false);
  const double rn = restriction_norm(u, s, res);
  CHECK(gram_apply(gn.norm, c).real() == doctest::Approx(rn * rn).epsilon(1e-9));

  // Requesting a coefficient outside the basis is an error.
  CHECK_THROWS(mode_coefficients(u, {{3, 4}}));
}

TEST_CASE("restriction norm closed form and the weighted-norm identity") {
  const double h = 0.1;
  const ModeSum u = single_mode(2, {10, 0});
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  const double rn = restriction_norm(u, s, 96);
  // h^{-1} |c|^2 (2 pi) (pi h) = 1/2 for the normalized mode; the tube-radius
  // truncation leaves a tail of order erfc((tau-1)/sqrt(h))/2 ~ 4e-6.
  CHECK(rn == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));
  CHECK(weighted_norm_log(u, s, 96) ==
        doctest::Approx(2.0 * std::log(rn) + 1.0 / h).epsilon(1e-8));
}

TEST_CASE("boundary density closed form") {
  // Base-vertical member: nu has no fiber part, so q = -15 <xi, nu_x>^2.
  const EnergyCurveGrid vg = intersect_sphere_bundle(vertical_surface(2, {1, 0}, 0.0), 32);
  for (const SurfaceNode& node : vg.nodes) {
    const double xi1 = node.p.xi[0];
    CHECK(density_q(node) == doctest::Approx(-15.0 * xi1 * xi1).epsilon(1e-12));
  }
  // General members: q = -15 A^2 - A B with A = <xi, nu_x>, B = <xi, nu_xi>.
  const EnergyCurveGrid tg =
      intersect_sphere_bundle(tube_graph_surface(0.5, cosine_poly({1, 0})), 24);
  REQUIRE(!tg.nodes.empty());
  for (const SurfaceNode& node : tg.nodes) {
    const double A = dot(node.p.xi, node.nu.x);
    const double B = dot(node.p.xi, node.nu.xi);
    CHECK(density_q(node) == doctest::Approx(-15.0 * A * A - A * B).epsilon(1e-12));
  }
}

TEST_CASE("energy-curve reference integrals") {
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  // Int over {x1 = 0} x S^1 of -15 cos^2 = -15 * 2pi * pi = -30 pi^2.
  const double ref = qer_rhs(s, unit_weight, 192);
  CHECK(ref == doctest::Approx(-30.0 * kPi * kPi).epsilon(1e-11));

  // Wallis ratio: the xi_1^2-weighted integral is 3/4 of the flat one.
  const SurfaceWeight a2 = [](const SurfaceNode& nd) { return nd.p.xi[0] * nd.p.xi[0]; };
  CHECK(qer_rhs(s, a2, 192) / ref == doctest::Approx(0.75).epsilon(1e-12));

  const GeneralPosition gp = general_position_check(s, 96);
  CHECK(gp.ok);
  CHECK(gp.value == doctest::Approx(-30.0 * kPi * kPi).epsilon(1e-9));
  CHECK(gp.measure == doctest::Approx(kTwoPi * kTwoPi).epsilon(1e-10));
}

TEST_CASE("identity multiplier acts as the identity") {
  const ModeSum u = single_mode(2, {0, 8});
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  const double r =
      multiplier_residual(u, s, [](double, double, double) { return 1.0; }, 24, 24);
  CHECK(r < 1e-13);
}

TEST_CASE("flowed wavefront projection collapses onto the chart set") {
  const HypersurfaceSpec s = vertical_surface(2, {1, 0}, 0.0);
  const FlowOutSet fo = flow_out_set(s, 12);
  REQUIRE(!fo.samples.empty());
  bool has_zero_time = false;
  for (double t : fo.flow_times) has_zero_time = has_zero_time || t == 0.0;
  CHECK(has_zero_time);
  const Vec that(0.0, 1.0);  // unit tangent of the base slice {x1 = 0}
  for (const FlowOutSample& smp : fo.samples) {
    CHECK(norm(smp.xi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(smp.dual_s - dot(smp.xi, that)) < 1e-12);
    CHECK(norm(smp.dual_xi) < 1e-12);
  }
  CHECK_THROWS(flow_out_set(tube_graph_surface(0.5, cosine_poly({1, 0})), 8));
}

TEST_CASE("deterministic scaling run matches the 1 - h law") {
  ScalingInput in;
  in.hs = {0.2, 0.1};
  in.family = [](double h) {
    const int m = static_cast<int>(std::lround(1.0 / h));
    return std::vector<ModeSum>{single_mode(2, {m, 0})};
  };
  const QERReport rep = scaling_experiment(in, vertical_surface(2, {1, 0}, 0.0), unit_weight);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].h == doctest::Approx(0.2));
  CHECK(rep.rows[1].h == doctest::Approx(0.1));
  // Tube-radius truncation leaves relative tails of order
  // erfc((tau-1)/sqrt(h))/2: ~8e-4 at h = 0.2, ~4e-6 at h = 0.1.
  for (const QERRow& row : rep.rows) {
    CHECK(row.rhs == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(row.ratio == doctest::Approx(1.0 - row.h).epsilon(1e-2));
    CHECK(row.norm == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(2e-3));
    CHECK(row.imag_rel < 1e-8);
  }
  CHECK(rep.gap_monotone);
  CHECK(rep.final_gap == doctest::Approx(0.1).epsilon(1e-3));
  // h-flat up to the truncation tails; genuine power laws would give |slope|
  // near 0.5, so the bound still separates the hypotheses sharply.
  CHECK(std::abs(rep.norm_fit.slope) < 5e-3);
}
