#include "tube/modes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tube {

ModeSum single_mode(int n, std::array<int, 2> k, bool normalized) {
  ModeSum u;
  u.n = n;
  double kk = std::sqrt(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
  if (kk == 0.0) throw std::invalid_argument("single_mode: k = 0 has no shell");
  u.h = 1.0 / kk;
  double c = normalized ? std::pow(kTwoPi, -0.5 * n) : 1.0;
  u.modes.push_back({k, {c, 0.0}});
  return u;
}

double l2_mass(const ModeSum& u) {
  double s = 0.0;
  for (const auto& m : u.modes) s += std::norm(m.coeff);
  return std::pow(kTwoPi, u.n) * s;
}

std::vector<std::array<int, 2>> shell_points(int n, int r2) {
  std::vector<std::array<int, 2>> pts;
  if (r2 <= 0) throw std::invalid_argument("shell_points: r2 must be positive");
  if (n == 1) {
    int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r2))));
    if (r * r != r2) throw std::invalid_argument("shell_points: r2 not a perfect square for n=1");
    pts.push_back({r, 0});
    pts.push_back({-r, 0});
  } else if (n == 2) {
    int rmax = static_cast<int>(std::floor(std::sqrt(static_cast<double>(r2))));
    for (int a = -rmax; a <= rmax; ++a) {
      int rem = r2 - a * a;
      int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rem))));
      while (b * b > rem) --b;
      if (b * b == rem) {
        pts.push_back({a, b});
        if (b != 0) pts.push_back({a, -b});
      }
    }
  } else {
    throw std::invalid_argument("shell_points: n must be 1 or 2");
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::vector<ModeSum> make_shell_ensemble(const EnsembleSpec& spec) {
  auto pts = shell_points(spec.n, spec.r2);
  if (pts.size() < 2) throw std::invalid_argument("make_shell_ensemble: shell too thin");
  std::vector<ModeSum> out;
  out.reserve(static_cast<size_t>(spec.draws));
  const double target = std::pow(kTwoPi, -spec.n);  // sum |c|^2
  for (int d = 0; d < spec.draws; ++d) {
    CounterRng rng = CounterRng(spec.seed, 0x5ee0u).split(static_cast<uint64_t>(d));
    ModeSum u;
    u.n = spec.n;
    u.h = 1.0 / std::sqrt(static_cast<double>(spec.r2));
    double mass = 0.0;
    for (size_t m = 0; m < pts.size(); ++m) {
      std::complex<double> z(rng.normal(2 * m), rng.normal(2 * m + 1));
      u.modes.push_back({pts[m], z});
      mass += std::norm(z);
    }
    if (mass < 1e-30) {
      u.modes[0].coeff = {1.0, 0.0};
      mass = 1.0;
    }
    double s = std::sqrt(target / mass);
    for (auto& m : u.modes) m.coeff *= s;
    out.push_back(std::move(u));
  }
  return out;
}

std::complex<double> eval_u(const ModeSum& u, const Vec& x) {
  std::complex<double> s{0.0, 0.0};
  for (const auto& m : u.modes) {
    double ph = 0.0;
    for (int i = 0; i < u.n; ++i) ph += m.k[static_cast<size_t>(i)] * x[i];
    s += m.coeff * std::polar(1.0, ph);
  }
  return s;
}

ModeEval::ModeEval(const ModeSum& u) : n_(u.n) {
  pre_.reserve(u.modes.size());
  for (const Mode& m : u.modes) {
    const double a = std::abs(m.coeff);
    if (a == 0.0) continue;
    pre_.push_back({static_cast<double>(m.k[0]), static_cast<double>(m.k[1]), std::log(a),
                    std::arg(m.coeff)});
  }
}

LogComplex ModeEval::operator()(const Vec& x, const Vec& xi) const {
  double ref = kNegInf;
  for (const Pre& m : pre_) {
    const double g = m.k0 * xi[0] + (n_ > 1 ? m.k1 * xi[1] : 0.0) + m.logc;
    ref = std::max(ref, g);
  }
  if (ref == kNegInf) return LogComplex::zero();
  std::complex<double> s{0.0, 0.0};
  for (const Pre& m : pre_) {
    const double g = m.k0 * xi[0] + (n_ > 1 ? m.k1 * xi[1] : 0.0) + m.logc;
    const double ph = m.k0 * x[0] + (n_ > 1 ? m.k1 * x[1] : 0.0) + m.argc;
    s += std::exp(g - ref) * std::complex<double>{std::cos(ph), std::sin(ph)};
  }
  return with_scale(s, ref);
}

Jet2 eval_jet2(const ModeSum& u, const TubePoint& p, Continuation cont) {
  Jet2 j;
  j.n = u.n;
  const double s = (cont == Continuation::Holomorphic) ? 1.0 : -1.0;

  // Common log scale: the largest per-mode exponent <k,xi> + log|c|.
  double ref = kNegInf;
  for (const auto& m : u.modes) {
    double mag = std::abs(m.coeff);
    if (mag == 0.0) continue;
    double e = 0.0;
    for (int i = 0; i < u.n; ++i) e += s * m.k[static_cast<size_t>(i)] * p.xi[i];
    ref = std::max(ref, e + std::log(mag));
  }
  if (ref == kNegInf) return j;  // zero function
  j.logscale = ref;

  const int nv = 2 * u.n;
  for (const auto& m : u.modes) {
    double mag = std::abs(m.coeff);
    if (mag == 0.0) continue;
    double e = 0.0, ph = std::arg(m.coeff);
    for (int i = 0; i < u.n; ++i) {
      e += s * m.k[static_cast<size_t>(i)] * p.xi[i];
      ph += m.k[static_cast<size_t>(i)] * p.x[i];
    }
    std::complex<double> w = std::polar(std::exp(e + std::log(mag) - ref), ph);
    // derivative factors: d/dx_i -> i*k_i, d/dxi_i -> s*k_i
    std::array<std::complex<double>, 4> f{};
    for (int i = 0; i < u.n; ++i) {
      double ki = static_cast<double>(m.k[static_cast<size_t>(i)]);
      f[static_cast<size_t>(i)] = {0.0, ki};
      f[static_cast<size_t>(u.n + i)] = {s * ki, 0.0};
    }
    j.u += w;
    for (int a = 0; a < nv; ++a) {
      j.du[static_cast<size_t>(a)] += f[static_cast<size_t>(a)] * w;
      for (int b = 0; b < nv; ++b)
        j.d2(a, b) += f[static_cast<size_t>(a)] * f[static_cast<size_t>(b)] * w;
    }
  }
  return j;
}

Jet2 weighted_jet2(const Jet2& j, const TubePoint& p, double h) {
  Jet2 r = j;
  r.logscale = j.logscale - rho(p) / h;
  const int n = j.n, nv = 2 * n;
  // g_a = d_a rho: zero on the x block, xi_i on the xi block.
  std::array<double, 4> g{};
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(n + i)] = p.xi[i];
  for (int a = 0; a < nv; ++a) {
    r.du[static_cast<size_t>(a)] = j.du[static_cast<size_t>(a)] - (g[static_cast<size_t>(a)] / h) * j.u;
  }
  for (int a = 0; a < nv; ++a) {
    for (int b = 0; b < nv; ++b) {
      double hess_ab = (a == b && a >= n) ? 1.0 : 0.0;
      r.d2(a, b) = j.d2(a, b) - (g[static_cast<size_t>(a)] / h) * j.du[static_cast<size_t>(b)] -
                   (g[static_cast<size_t>(b)] / h) * j.du[static_cast<size_t>(a)] +
                   (g[static_cast<size_t>(a)] * g[static_cast<size_t>(b)] / (h * h) - hess_ab / h) * j.u;
    }
  }
  return r;
}

LogComplex jet_value(const Jet2& j) { return with_scale(j.u, j.logscale); }
LogComplex jet_d1(const Jet2& j, int a) { return with_scale(j.du[static_cast<size_t>(a)], j.logscale); }
LogComplex jet_d2(const Jet2& j, int a, int b) { return with_scale(j.d2(a, b), j.logscale); }

LogComplex jet_dir(const Jet2& j, const PhaseVec& w) {
  std::complex<double> s{0.0, 0.0};
  const int n = j.n;
  for (int i = 0; i < n; ++i) s += w.x[i] * j.du[static_cast<size_t>(i)];
  for (int i = 0; i < n; ++i) s += w.xi[i] * j.du[static_cast<size_t>(n + i)];
  return with_scale(s, j.logscale);
}

LogComplex jet_hess(const Jet2& j, const PhaseVec& w, const PhaseVec& wp) {
  const int n = j.n, nv = 2 * n;
  std::array<double, 4> a{}, b{};
  for (int i = 0; i < n; ++i) {
    a[static_cast<size_t>(i)] = w.x[i];
    a[static_cast<size_t>(n + i)] = w.xi[i];
    b[static_cast<size_t>(i)] = wp.x[i];
    b[static_cast<size_t>(n + i)] = wp.xi[i];
  }
  std::complex<double> s{0.0, 0.0};
  for (int p = 0; p < nv; ++p)
    for (int q = 0; q < nv; ++q) s += a[static_cast<size_t>(p)] * b[static_cast<size_t>(q)] * j.d2(p, q);
  return with_scale(s, j.logscale);
}

LogComplex jet_laplacian(const Jet2& j) {
  std::complex<double> s{0.0, 0.0};
  for (int a = 0; a < 2 * j.n; ++a) s += j.d2(a, a);
  return with_scale(s, j.logscale);
}

LogComplex eval_u_complex(const ModeSum& u, const TubePoint& p) { return ModeEval(u).at(p); }

}  // namespace tube
