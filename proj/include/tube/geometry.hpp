// Flat-model phase-space geometry on B*_tau(T^n), n in {1,2}.
//
// The co-ball bundle of the flat torus carries the Kaehler potential
//   rho(x,xi) = |xi|^2 / 2,
// the complex structure acting blockwise as J(a;b) = (-b;a) on tangent
// vectors (x-block; xi-block), and the complexified coordinate z = x - i*xi.
// Everything here is closed-form; no numerical differentiation.
#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

namespace tube {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Small fixed-capacity vector for n in {1,2}; avoids heap traffic in
// quadrature loops.
struct Vec {
  int n = 0;
  std::array<double, 2> c{0.0, 0.0};

  Vec() = default;
  Vec(int dim) : n(dim) {}
  Vec(double a) : n(1), c{a, 0.0} {}
  Vec(double a, double b) : n(2), c{a, b} {}

  double& operator[](int i) { return c[static_cast<size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<size_t>(i)]; }
};

inline Vec operator+(Vec a, const Vec& b) {
  for (int i = 0; i < a.n; ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (int i = 0; i < a.n; ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (int i = 0; i < a.n; ++i) a[i] *= s;
  return a;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline Vec zero_vec(int n) { return Vec(n); }

// Point of the co-ball bundle: base point x on the torus, covector xi.
struct TubePoint {
  Vec x;
  Vec xi;
  int dim() const { return x.n; }
};

// Tangent/cotangent vector on the 2n-dimensional chart, split into blocks.
struct PhaseVec {
  Vec x;
  Vec xi;
  int dim() const { return x.n; }
};

inline PhaseVec operator+(PhaseVec a, const PhaseVec& b) {
  return {a.x + b.x, a.xi + b.xi};
}
inline PhaseVec operator-(PhaseVec a, const PhaseVec& b) {
  return {a.x - b.x, a.xi - b.xi};
}
inline PhaseVec operator*(double s, const PhaseVec& a) {
  return {s * a.x, s * a.xi};
}
inline double dot(const PhaseVec& a, const PhaseVec& b) {
  return dot(a.x, b.x) + dot(a.xi, b.xi);
}
inline double norm2(const PhaseVec& a) { return dot(a, a); }
inline double norm(const PhaseVec& a) { return std::sqrt(norm2(a)); }
inline PhaseVec zero_phase_vec(int n) { return {Vec(n), Vec(n)}; }

// Kaehler potential and its exact derivatives.
inline double rho(const TubePoint& p) { return 0.5 * norm2(p.xi); }
inline PhaseVec grad_rho(const TubePoint& p) { return {zero_vec(p.dim()), p.xi}; }
// Hess(rho) = identity on the xi-block, zero elsewhere:
inline double hess_rho(const PhaseVec& a, const PhaseVec& b) { return dot(a.xi, b.xi); }

// Complex structure J(a;b) = (-b;a); J^2 = -Id.
inline PhaseVec apply_J(const PhaseVec& w) { return {-1.0 * w.xi, w.x}; }

// Hamilton vector field of a function with gradient g: H = J grad.
inline PhaseVec hamilton_field(const PhaseVec& grad) { return apply_J(grad); }

// Wrap an angle to [0, 2*pi).
inline double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

// Nearest-image representative of a periodic difference, in [-pi, pi).
inline double nearest_image(double d) {
  double w = std::fmod(d + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - kPi;
}

}  // namespace tube
