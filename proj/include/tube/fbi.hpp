// Heat-kernel phase-space transform of torus eigenfunctions, evaluated two
// independent ways, plus norms, energy localization, windowed semiclassical
// Fourier transforms, and wavefront containment diagnostics.
//
// Closed form:      T u(x,xi) = e^{-1/(2h)} e^{-rho/h} u_C(x,xi).
// Quadrature form:  h^{-n/4} (2 pi h)^{-n/2} Int e^{(-r2_C(z,y)/2 - rho)/h} u(y) dy,
// with r2_C(z,y) = sum_j (x_j - y_j - i xi_j)^2 over nearest images. The two
// agree up to the fixed factor h^{-n/4} (periodization corrections are
// e^{-c/h}); that factor is the one-time normalization calibration and is
// folded into every norm as h^{-n/2} under the square.
//
// For a single lattice mode the transform separates per axis,
//   |T u| = |c| prod_j e^{-(xi_j - khat_j)^2/(2h)},
// which the wavefront diagnostics exploit as a fast path (validated against
// the dense path in unit tests).
#pragma once

#include "tube/geometry.hpp"
#include "tube/logspace.hpp"
#include "tube/modes.hpp"
#include "tube/zoom_dft.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace tube {

// Closed-form transform (log-space).
LogComplex eval_T(const ModeSum& u, const TubePoint& p);

// Independent quadrature oracle with res points per base axis.
LogComplex eval_T_heat(const ModeSum& u, const TubePoint& p, int res);

// The constant relating the two evaluations.
double heat_normalization(int n, double h);

// h^{-n/4}-normalized ambient L2 norm over the tube of radius tau,
// sqrt(h^{-n/2} Int |Tu|^2 dx dxi): h-independent for shell eigenfunctions.
double ambient_norm(const ModeSum& u, double tau, int res);

// Fraction of Int |Tu|^2 carried by { | |xi| - 1 | > eps }.
double energy_mass_off_shell(const ModeSum& u, double eps, double tau, int res);

// Harmonicity + holomorphy residual of the continuation at p, relative to
// |u_C(p)|: |h^2 Lap u_C| + h sum_j |(d_{x_j} - i d_{xi_j}) u_C|, all exact.
// The conjugate-continuation probe is the negative control.
double holomorphy_residual(const ModeSum& u, const TubePoint& p,
                           Continuation cont = Continuation::Holomorphic);

// ---------------------------------------------------------------------------
// Windowed semiclassical Fourier transforms and wavefront diagnostics.

// C-infinity bump, = exp(1 - 1/(1 - t^2)) on |t| < 1 (peak value 1), 0 outside,
// with an optional flat plateau: w(t) = 1 for |t| <= flat, rolloff on
// flat < |t| < width.
double bump_window(double t, double width, double flat = 0.0);

struct DualAxis {
  double f0 = 0.0;
  double df = 0.0;
  int count = 0;
  double coord(int i) const { return f0 + df * i; }
};

// Dense windowed transform of an arbitrary sampled field (tensor over chart
// axes):  G(b*) = Int e^{-i<b,b*>/h} w(b - center) f(b) db, axis by axis.
Tensor windowed_ft_nd(const Tensor& field, const std::vector<AxisGrid>& axes,
                      const std::vector<double>& center, double window_width,
                      const std::vector<DualAxis>& dual, double h, double window_flat = 0.0);

// Fast path for product fields (single lattice modes): the windowed transform
// factorizes, so return one 1-D dual profile per axis. profile[a][m] is the
// windowed transform of factors[a] along axis a at dual index m; the full
// transform is the outer product. Validated against windowed_ft_nd.
std::vector<std::vector<std::complex<double>>> separable_windowed_ft(
    const std::vector<AxisGrid>& axes,
    const std::vector<std::function<std::complex<double>(double)>>& factors,
    const std::vector<double>& center, double window_width, const std::vector<DualAxis>& dual,
    double h, double window_flat = 0.0);

// Enumerate dual-lattice points of a separable transform whose product
// magnitude exceeds threshold_rel * (product of per-axis maxima), with
// suffix-max pruning so the cost tracks the output size.
void scan_superthreshold(const std::vector<std::vector<double>>& mags, double threshold_rel,
                         const std::function<void(const std::vector<int>&, double)>& fn);

// One superthreshold sample of a windowed transform.
struct WFPoint {
  std::vector<double> center;  // window center in chart coordinates
  std::vector<double> dual;    // dual coordinates
  double mag = 0.0;
};

struct WFDiagnostic {
  double window_width = 0.5;
  double threshold = 0.1;  // relative to peak
  double peak_mag = 0.0;
  std::vector<WFPoint> super_threshold;
};

// Distance of a diagnostic sample to the model sets.
// Full-tube model: { |xi| = 1, xi* = 0, x* = xi }.
double dist_to_wavefront_set(const Vec& xi_center, const Vec& x_star, const Vec& xi_star);
// Cruder model: { |xi| = 1, xi* = 0, |x*| = 1 }.
double dist_to_crude_set(const Vec& xi_center, const Vec& x_star, const Vec& xi_star);
// Restriction to a base-vertical surface with unit slice tangent that_hat:
// { |xi| = 1, xi* = 0, s* = <xi, that_hat> }.
double dist_to_surface_wavefront_set(const Vec& that_hat, const Vec& xi_center, double s_star,
                                     const Vec& xi_star);

struct ContainmentStats {
  double max_dist = 0.0;
  double mean_dist = 0.0;
  int count = 0;
};

ContainmentStats wf_containment(const std::vector<WFPoint>& pts,
                                const std::function<double(const WFPoint&)>& dist);

}  // namespace tube
