// Catalog of hypersurfaces in the co-ball bundle with closed-form defining
// functions, normals, curvature, and quadrature.
//
// Members (all with F, grad F, Hess F in closed form; no root finding):
//   Vertical:  F = <e, x> - c, e an integer lattice direction
//   Tilted:    F = x_n - <a, xi> - c
//   TubeGraph: F = |xi|^2 - 1 - delta * g(x), g a finite trig polynomial
// Per node we carry the unit normal nu = grad F/|grad F| (orientation:
// increasing F), the tangent X = J nu, the angles
//   cos(theta) = <grad rho, nu>/|grad rho|,  cos(phi) = <grad rho, X>/|grad rho|,
// the mean curvature H = div nu, and quadrature weights for the hypersurface
// measure. Energy-curve grids sample the intersection with the unit cosphere
// bundle, weighted by the co-area factor 1/|P_{T S*M} grad F| so the total is
// the Liouville-induced measure.
//
// The admissible angle region is the L1 diamond
//   |theta - pi/2| + |phi - pi/2| <= pi/2,
// and f(theta, phi) = cos^2(theta) - 2 + cos^2(phi) + sin(theta) is the
// ellipticity profile: f < 0 strictly inside the diamond except at the two
// corners (pi/2, 0), (pi/2, pi) where f = 0. On the TubeGraph energy curve
// |cos phi| = sin(theta) * |xi_1| can touch the diamond boundary, so the
// membership test is inclusive with a small tolerance.
#pragma once

#include "tube/geometry.hpp"
#include "tube/logspace.hpp"
#include "tube/modes.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace tube {

enum class SurfaceKind { Vertical, Tilted, TubeGraph };

struct TrigTerm {
  std::array<int, 2> m{0, 0};
  double cos_c = 0.0;
  double sin_c = 0.0;
};

struct TrigPoly {
  std::vector<TrigTerm> terms;
  double eval(const Vec& x) const;
  Vec grad(const Vec& x) const;
  // Hessian contracted with two vectors.
  double hess(const Vec& x, const Vec& a, const Vec& b) const;
  double laplacian(const Vec& x) const;
};

TrigPoly cosine_poly(std::array<int, 2> m, double amplitude = 1.0);

struct HypersurfaceSpec {
  SurfaceKind kind = SurfaceKind::Vertical;
  int n = 2;
  double tau = 2.0;  // tube radius of the ambient chart
  // Vertical
  std::array<int, 2> e{1, 0};
  // Tilted (n = 2)
  Vec a = Vec(0.0, 0.0);
  // Vertical / Tilted offset
  double c = 0.0;
  // TubeGraph
  double delta = 0.0;
  TrigPoly g;
  int orientation = 1;

  std::string describe() const;
};

HypersurfaceSpec vertical_surface(int n, std::array<int, 2> e, double c, double tau = 2.0);
HypersurfaceSpec tilted_surface(Vec a, double c, double tau = 2.0);
HypersurfaceSpec tube_graph_surface(double delta, TrigPoly g, double tau = 2.0);

double surface_F(const HypersurfaceSpec& s, const TubePoint& p);
PhaseVec surface_gradF(const HypersurfaceSpec& s, const TubePoint& p);
double surface_hessF(const HypersurfaceSpec& s, const TubePoint& p, const PhaseVec& u,
                     const PhaseVec& v);
double surface_laplacianF(const HypersurfaceSpec& s, const TubePoint& p);

PhaseVec normal(const HypersurfaceSpec& s, const TubePoint& p);
PhaseVec j_normal(const HypersurfaceSpec& s, const TubePoint& p);
// (theta, phi); requires grad rho != 0 (xi != 0).
std::array<double, 2> angles(const HypersurfaceSpec& s, const TubePoint& p);
double mean_curvature(const HypersurfaceSpec& s, const TubePoint& p);

bool admissible_check(double theta, double phi, double tol = 1e-12);
double f_value(double theta, double phi);

struct SurfaceNode {
  TubePoint p;
  double w = 0.0;  // quadrature weight for the hypersurface measure
  PhaseVec nu, X;
  double theta = 0.0, phi = 0.0;
  double H = 0.0;          // mean curvature
  double grad_norm = 0.0;  // |grad F|
};

struct SurfaceGrid {
  HypersurfaceSpec spec;
  std::vector<SurfaceNode> nodes;
  double area = 0.0;
};

struct EnergyCurveGrid {
  HypersurfaceSpec spec;
  std::vector<SurfaceNode> nodes;  // w holds the Liouville-induced weight
  double measure = 0.0;
};

// Uniform chart product grid with `res` points per axis (midpoint rule on
// the radial xi axis, periodic trapezoid elsewhere).
SurfaceGrid build_surface_grid(const HypersurfaceSpec& s, int res);

// Streaming variant: visit every quadrature node without materializing the
// grid (node counts grow like res^3).
void for_each_surface_node(const HypersurfaceSpec& s, int res,
                           const std::function<void(const SurfaceNode&)>& fn);

// Intersection with the unit cosphere bundle. TubeGraph members require g
// to be a single one-variable cosine so the zero set is closed-form.
EnergyCurveGrid intersect_sphere_bundle(const HypersurfaceSpec& s, int res);

// true iff min |cos theta| over the energy curve exceeds tol; returns margin.
struct ConditionA {
  bool ok = false;
  double margin = 0.0;
};
ConditionA condition_a_check(const HypersurfaceSpec& s, double tol, int res = 96);

// true iff (theta, phi) stays at distance > delta from both diamond corners
// (pi/2, 0) and (pi/2, pi) over the energy curve.
bool local_condition_check(const HypersurfaceSpec& s, double delta, int res = 96);

// Node on the surface from chart parameters in [0,1)^3 (identity-suite
// sampling; the radial coordinate is mapped into [0.3, 1.7]).
SurfaceNode sample_node(const HypersurfaceSpec& s, double u1, double u2, double u3);

// Intrinsic Laplacian of the restriction of a scalar field given by its
// second-order jet:  Lap_Sigma f = Lap f - Hess f(nu,nu) - H * d_nu f.
LogComplex tangential_laplacian(const SurfaceNode& node, const Jet2& field_jet);

}  // namespace tube
