// Trigonometric eigenfunctions of the flat torus and their holomorphic
// continuations to the co-ball bundle.
//
// A ModeSum is  u(x) = sum_m c_m e^{i<k_m, x>}  with every |k_m| on one
// lattice shell, h = 1/|k|, so  h^2 Laplacian u = u.  The continuation in
// z = x - i*xi is  u_C(x,xi) = sum_m c_m e^{i<k_m,x>} e^{<k_m,xi>}; all
// derivatives up to second order are exact (polynomial factors in k), and
// every evaluation carries a common log-scale so magnitudes like e^{|k|tau}
// never overflow. The weighted jet multiplies by e^{-rho/h} analytically.
#pragma once

#include "tube/geometry.hpp"
#include "tube/logspace.hpp"
#include "tube/rng.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace tube {

struct Mode {
  std::array<int, 2> k{0, 0};
  std::complex<double> coeff{0.0, 0.0};
};

struct ModeSum {
  int n = 2;       // base dimension (1: circle, 2: torus)
  double h = 1.0;  // semiclassical parameter, 1/|k| on the shell
  std::vector<Mode> modes;
};

// Single normalized lattice mode: c = (2*pi)^{-n/2}, h = 1/|k|.
ModeSum single_mode(int n, std::array<int, 2> k, bool normalized = true);

// (2*pi)^n * sum |c|^2  — equals ||u||^2 on the torus by Parseval.
double l2_mass(const ModeSum& u);

// All integer lattice points with |k|^2 = r2 (n=1: (+-r,0)), sorted.
std::vector<std::array<int, 2>> shell_points(int n, int r2);

struct EnsembleSpec {
  int n = 2;
  int r2 = 25;       // squared shell radius
  int draws = 1;
  uint64_t seed = 0;
};

// Deterministic random shell ensembles: coefficients uniform on the complex
// sphere scaled so l2_mass == 1, one independent counter stream per draw.
std::vector<ModeSum> make_shell_ensemble(const EnsembleSpec& spec);

// Real-point evaluation u(x).
std::complex<double> eval_u(const ModeSum& u, const Vec& x);

// Precompiled evaluator of the continued sum u_C = sum c_k e^{i<k,x>}e^{<k,xi>}
// for quadrature hot loops (per-mode constants hoisted, log-space result).
class ModeEval {
 public:
  explicit ModeEval(const ModeSum& u);
  LogComplex operator()(const Vec& x, const Vec& xi) const;
  LogComplex at(const TubePoint& p) const { return (*this)(p.x, p.xi); }

 private:
  int n_ = 2;
  struct Pre {
    double k0, k1, logc, argc;
  };
  std::vector<Pre> pre_;
};

// Value and derivatives of the continuation at one tube point, all sharing
// one log factor: actual value = e^{logscale} * entry. Index order for
// derivatives: (x_1..x_n, xi_1..xi_n).
struct Jet2 {
  int n = 2;  // base dimension; chart dimension is 2n
  double logscale = kNegInf;
  std::complex<double> u{0.0, 0.0};
  std::array<std::complex<double>, 4> du{};
  std::array<std::complex<double>, 16> d2u{};  // row-major (2n)x(2n)

  int vars() const { return 2 * n; }
  std::complex<double> d2(int a, int b) const { return d2u[static_cast<size_t>(a) * 4 + b]; }
  std::complex<double>& d2(int a, int b) { return d2u[static_cast<size_t>(a) * 4 + b]; }
};

// Continuation convention: holomorphic (e^{<k,xi>} factor) or its
// conjugate-continuation probe (e^{-<k,xi>}), which is the negative control
// for holomorphy diagnostics.
enum class Continuation { Holomorphic, ConjugateProbe };

Jet2 eval_jet2(const ModeSum& u, const TubePoint& p,
               Continuation cont = Continuation::Holomorphic);

// Jet of v = e^{-rho/h} u_C from the jet of u_C (exact product rule;
// grad rho = (0;xi), Hess rho = Id on the xi block).
Jet2 weighted_jet2(const Jet2& j, const TubePoint& p, double h);

LogComplex jet_value(const Jet2& j);
LogComplex jet_d1(const Jet2& j, int a);
LogComplex jet_d2(const Jet2& j, int a, int b);
// Directional derivative along a phase-space vector w.
LogComplex jet_dir(const Jet2& j, const PhaseVec& w);
// Second derivative contracted twice: Hess(w,w') entrywise.
LogComplex jet_hess(const Jet2& j, const PhaseVec& w, const PhaseVec& wp);
// Full chart Laplacian sum_a d2(a,a).
LogComplex jet_laplacian(const Jet2& j);

LogComplex eval_u_complex(const ModeSum& u, const TubePoint& p);

}  // namespace tube
