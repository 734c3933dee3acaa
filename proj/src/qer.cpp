#include "tube/qer.hpp"

#include "tube/fft.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tube {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

LogComplex conj_lc(const LogComplex& a) {
  if (a.is_zero()) return a;
  return {a.logmag, -a.phase};
}

// Raw directional derivative of a jet along a real phase-space vector; the
// result shares the jet's log scale, so ratios and differences of raw values
// from jets at the same scale are exact.
std::complex<double> raw_dir(const Jet2& j, const PhaseVec& w) {
  std::complex<double> r{0.0, 0.0};
  for (int i = 0; i < j.n; ++i)
    r += w.x[i] * j.du[static_cast<size_t>(i)] + w.xi[i] * j.du[static_cast<size_t>(j.n + i)];
  return r;
}

SurfaceNode make_node(const HypersurfaceSpec& s, const TubePoint& p) {
  SurfaceNode nd;
  nd.p = p;
  nd.nu = normal(s, p);
  nd.X = j_normal(s, p);
  const auto th = angles(s, p);
  nd.theta = th[0];
  nd.phi = th[1];
  nd.H = mean_curvature(s, p);
  nd.grad_norm = std::sqrt(norm2(surface_gradF(s, p)));
  nd.w = 0.0;
  return nd;
}

struct SliceChart {
  Vec e;      // integer conormal of the base slice (Vertical)
  Vec x0;     // base point of the slice line
  Vec that;   // unit tangent of the slice line
  double length = 0.0;
};

SliceChart vertical_chart(const HypersurfaceSpec& s) {
  SliceChart ch;
  ch.e = Vec(static_cast<double>(s.e[0]), static_cast<double>(s.e[1]));
  const double en = norm(ch.e);
  if (en == 0.0) throw std::invalid_argument("vertical chart: zero conormal");
  ch.x0 = (s.c / norm2(ch.e)) * ch.e;
  ch.that = (1.0 / en) * Vec(-ch.e[1], ch.e[0]);
  ch.length = kTwoPi * en;
  return ch;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pointwise identities.

double cr_residual(const ModeSum& u, const HypersurfaceSpec& s, const TubePoint& p,
                   Continuation cont) {
  const Jet2 j = eval_jet2(u, p, cont);
  const PhaseVec nu = normal(s, p);
  const PhaseVec X = j_normal(s, p);
  const std::complex<double> xu = raw_dir(j, X);
  const std::complex<double> dnu = raw_dir(j, nu);
  const double den = std::abs(xu) + std::abs(dnu) + std::abs(j.u);
  if (den == 0.0) return 0.0;
  return std::abs(xu + kI * dnu) / den;
}

double r_identity_residual(const ModeSum& u, const HypersurfaceSpec& s, const TubePoint& p,
                           Continuation cont) {
  const double h = u.h;
  const Jet2 j = eval_jet2(u, p, cont);
  const Jet2 T = weighted_jet2(j, p, h);
  const PhaseVec nu = normal(s, p);
  const PhaseVec X = j_normal(s, p);
  const double dnu_rho = dot(p.xi, nu.xi);
  const double x_rho = dot(p.xi, X.xi);
  const std::complex<double> lhs = -h * raw_dir(T, nu);
  const std::complex<double> rhs =
      -kI * h * raw_dir(T, X) + std::complex<double>{dnu_rho, -x_rho} * T.u;
  return std::abs(lhs - rhs) / (std::abs(T.u) + 1e-300);
}

double y_decomposition_residual(const ModeSum& u, const HypersurfaceSpec& s, const TubePoint& p) {
  const double h = u.h;
  const PhaseVec gr = grad_rho(p);
  const double g2 = norm2(gr);
  if (g2 < 1e-300) return 0.0;  // both sides vanish with the weight gradient
  const Jet2 j = eval_jet2(u, p);
  const Jet2 v = weighted_jet2(j, p, h);
  const PhaseVec nu = normal(s, p);
  const PhaseVec X = j_normal(s, p);
  const double aN = dot(gr, nu);
  const PhaseVec tang = gr - aN * nu;

  // Complex directional derivative along Y = i <grad rho, nu> X + (grad rho)^T.
  auto d_y = [&](const Jet2& jet) { return kI * aN * raw_dir(jet, X) + raw_dir(jet, tang); };

  // v and j share their raw basis up to the weight factor, so the commutator
  // [Y, e^{-rho/h}] u is the plain difference of raw derivatives.
  const std::complex<double> lhs = d_y(v) - d_y(j);

  const double ct = std::cos(angles(s, p)[0]);
  const double cp = std::cos(angles(s, p)[1]);
  const double s2 = 1.0 - ct * ct;
  const std::complex<double> rhs =
      (-1.0 / h) * std::complex<double>{g2 * s2, g2 * ct * cp} * v.u;

  const double den = std::abs(rhs) + (g2 / h) * std::abs(v.u) + 1e-300;
  return std::abs(lhs - rhs) / den;
}

// ---------------------------------------------------------------------------
// Cauchy-data functional, jet route.

SurfaceQuadratic cauchy_lhs(const ModeSum& u, const HypersurfaceSpec& s, const SurfaceWeight& a,
                            int res) {
  const double h = u.h;
  const int n = u.n;

  // The zeroth-order coefficient is h * (chart Laplacian of rho); on these
  // charts that Laplacian equals the base dimension exactly.
  double lap_rho = 0.0;
  for (int i = 0; i < n; ++i) {
    PhaseVec exi = zero_phase_vec(n);
    PhaseVec ex = zero_phase_vec(n);
    exi.xi[i] = 1.0;
    ex.x[i] = 1.0;
    lap_rho += hess_rho(exi, exi) + hess_rho(ex, ex);
  }
  assert(lap_rho == static_cast<double>(n));

  const LogComplex h1 = LogComplex::from_std({h, 0.0});
  const LogComplex h2 = LogComplex::from_std({h * h, 0.0});
  const LogComplex h2v = LogComplex::from_std({2.0 * h, 0.0});
  const LogComplex hn = LogComplex::from_std({h * lap_rho, 0.0});

  LogAccumulator acc1, acc2;
  for_each_surface_node(s, res, [&](const SurfaceNode& nd) {
    const double wq = nd.w * a(nd);
    if (wq == 0.0) return;
    const Jet2 j = eval_jet2(u, nd.p);
    const Jet2 v = weighted_jet2(j, nd.p, h);
    const LogComplex val = jet_value(v);
    if (val.is_zero()) return;
    const LogComplex lap = tangential_laplacian(nd, v);
    const LogComplex dgr = jet_dir(v, grad_rho(nd.p));
    const LogComplex dnu = jet_dir(v, nd.nu);

    const LogComplex op = h2 * lap + h2v * dgr + hn * val;
    acc1.add(op * conj_lc(val), wq);
    const LogComplex hdn = h1 * dnu;
    acc2.add(hdn * conj_lc(hdn), wq);
  });

  SurfaceQuadratic out;
  out.term1 = acc1.total();
  out.term2 = acc2.total();
  const double sc = 1.0 / h + 0.5 * n * std::log(h);
  const std::complex<double> t1 = out.term1.to_std_scaled(sc);
  const std::complex<double> t2 = out.term2.to_std_scaled(sc);
  out.scaled_term1 = t1.real();
  out.scaled_term2 = t2.real();
  const std::complex<double> tot = t1 + t2;
  out.scaled_lhs = tot.real();
  out.imag_rel = std::abs(tot.imag()) / (std::abs(tot.real()) + 1e-300);
  return out;
}

// ---------------------------------------------------------------------------
// Cauchy-data functional, closed-form factor route over a mode basis.

CauchyGram cauchy_gram(const std::vector<std::array<int, 2>>& ks, int n, double h,
                       const HypersurfaceSpec& s, const SurfaceWeight& a, int res, bool with_op) {
  const size_t nk = ks.size();
  if (nk == 0) throw std::invalid_argument("cauchy_gram: empty basis");
  CauchyGram g;
  g.ks = ks;
  g.n = n;
  g.h = h;
  g.norm.assign(nk * nk, {0.0, 0.0});
  if (with_op) {
    g.t1.assign(nk * nk, {0.0, 0.0});
    g.t2.assign(nk * nk, {0.0, 0.0});
  }

  std::vector<Vec> khat(nk, Vec(n));
  for (size_t i = 0; i < nk; ++i)
    for (int d = 0; d < n; ++d) khat[i][d] = h * ks[i][static_cast<size_t>(d)];

  std::vector<std::complex<double>> w(nk), neum(nk), op0(nk);
  for_each_surface_node(s, res, [&](const SurfaceNode& nd) {
    const double wq = nd.w * a(nd);
    if (wq == 0.0) return;
    const TubePoint& p = nd.p;
    const double rr = rho(p);
    for (size_t i = 0; i < nk; ++i) {
      const Vec& kh = khat[i];
      const double logm = (dot(kh, p.xi) - rr - 0.5) / h;
      double th = 0.0;
      for (int d = 0; d < n; ++d) th += ks[i][static_cast<size_t>(d)] * p.x[d];
      w[i] = std::polar(std::exp(logm), th);
      if (with_op) {
        const Vec dd = kh - p.xi;
        // h d_nu v / v
        const std::complex<double> nm = kI * dot(kh, nd.nu.x) + dot(dd, nd.nu.xi);
        neum[i] = nm;
        // (h^2 Lap_Sigma + 2h D_{grad rho} + h n) v / v: the +hn cancels the
        // -nh from h^2 tr Hess(log v), leaving closed first-order factors.
        const double flat = -norm2(kh) + norm2(dd) + 2.0 * dot(p.xi, dd);
        op0[i] = flat - nm * nm + h * norm2(nd.nu.xi) - h * nd.H * nm;
      }
    }
    for (size_t i = 0; i < nk; ++i)
      for (size_t j = 0; j < nk; ++j) {
        const std::complex<double> pw = wq * w[i] * std::conj(w[j]);
        g.norm[i * nk + j] += pw;
        if (with_op) {
          g.t1[i * nk + j] += op0[i] * pw;
          g.t2[i * nk + j] += neum[i] * std::conj(neum[j]) * pw;
        }
      }
  });

  const double sc = std::pow(h, -0.5 * n);
  for (auto& z : g.norm) z *= sc;
  for (auto& z : g.t1) z *= sc;
  for (auto& z : g.t2) z *= sc;
  return g;
}

std::complex<double> gram_apply(const std::vector<std::complex<double>>& g,
                                const std::vector<std::complex<double>>& c) {
  const size_t nk = c.size();
  if (g.size() != nk * nk) throw std::invalid_argument("gram_apply: size mismatch");
  std::complex<double> sum{0.0, 0.0};
  for (size_t i = 0; i < nk; ++i)
    for (size_t j = 0; j < nk; ++j) sum += c[i] * std::conj(c[j]) * g[i * nk + j];
  return sum;
}

std::vector<std::complex<double>> mode_coefficients(const ModeSum& u,
                                                    const std::vector<std::array<int, 2>>& ks) {
  std::vector<std::complex<double>> c(ks.size(), {0.0, 0.0});
  for (const Mode& m : u.modes) {
    const auto it = std::find(ks.begin(), ks.end(), m.k);
    if (it == ks.end()) throw std::invalid_argument("mode_coefficients: mode outside basis");
    c[static_cast<size_t>(it - ks.begin())] += m.coeff;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Norms.

double restriction_norm(const ModeSum& u, const HypersurfaceSpec& s, int res) {
  const ModeEval ev(u);
  const double h = u.h;
  LogAccumulator acc;
  for_each_surface_node(s, res, [&](const SurfaceNode& nd) {
    const LogComplex uc = ev.at(nd.p);
    if (uc.is_zero()) return;
    acc.add({2.0 * (uc.logmag - rho(nd.p) / h - 0.5 / h), 0.0}, nd.w);
  });
  const LogComplex t = acc.total();
  if (t.is_zero()) return 0.0;
  return std::exp(0.5 * (t.logmag - 0.5 * u.n * std::log(h)));
}

double weighted_norm_log(const ModeSum& u, const HypersurfaceSpec& s, int res) {
  const ModeEval ev(u);
  const double h = u.h;
  LogAccumulator acc;
  for_each_surface_node(s, res, [&](const SurfaceNode& nd) {
    const LogComplex uc = ev.at(nd.p);
    if (uc.is_zero()) return;
    acc.add({2.0 * (uc.logmag - rho(nd.p) / h), 0.0}, nd.w);
  });
  const LogComplex t = acc.total();
  if (t.is_zero()) return kNegInf;
  return t.logmag - 0.5 * u.n * std::log(h);
}

// ---------------------------------------------------------------------------
// Boundary density.

double density_q(const SurfaceNode& nd) {
  if (std::abs(norm(nd.p.xi) - 1.0) > 1e-6)
    throw std::invalid_argument("density_q: node off the unit shell");
  const double a = dot(nd.p.xi, nd.nu.x);
  const double b = dot(nd.p.xi, nd.nu.xi);
  const double c_b = 1.0;  // calibrated leading amplitude
  return c_b * (-16.0) * a * a + a * a - b * a;
}

double qer_rhs(const HypersurfaceSpec& s, const SurfaceWeight& a, int res) {
  const EnergyCurveGrid grid = intersect_sphere_bundle(s, res);
  if (grid.nodes.empty()) throw std::invalid_argument("qer_rhs: empty energy curve");
  double sum = 0.0;
  for (const SurfaceNode& nd : grid.nodes) sum += a(nd) * density_q(nd) * nd.w;
  return sum;
}

GeneralPosition general_position_check(const HypersurfaceSpec& s, int res) {
  GeneralPosition gp;
  const EnergyCurveGrid grid = intersect_sphere_bundle(s, res);
  gp.measure = grid.measure;
  double sum = 0.0;
  for (const SurfaceNode& nd : grid.nodes) sum += density_q(nd) * nd.w;
  gp.value = sum;
  gp.ok = std::abs(gp.value) > 1e-6 * gp.measure;
  return gp;
}

double qer_rhs_defect(const HypersurfaceSpec& s, const SurfaceWeight& a, const ModeSum& u,
                      int res) {
  if (u.modes.size() != 1) throw std::invalid_argument("qer_rhs_defect: single mode required");
  const Mode& m = u.modes[0];
  const int n = u.n;
  Vec k(n);
  for (int d = 0; d < n; ++d) k[d] = static_cast<double>(m.k[static_cast<size_t>(d)]);
  const double kn = norm(k);
  if (kn == 0.0) throw std::invalid_argument("qer_rhs_defect: zero frequency");
  const Vec khat = (1.0 / kn) * k;
  const double pref = std::pow(kPi, 0.5 * n) * std::norm(m.coeff);

  auto slice_term = [&](const Vec& x) {
    TubePoint p{x, khat};
    const SurfaceNode nd = make_node(s, p);
    const double ax = dot(nd.nu.x, khat);
    return a(nd) * (2.0 * ax * ax - 1.0);
  };

  switch (s.kind) {
    case SurfaceKind::Vertical: {
      if (n == 1) return pref * slice_term(Vec(wrap_angle(s.c)));
      const SliceChart ch = vertical_chart(s);
      double sum = 0.0;
      for (int i = 0; i < res; ++i) {
        const double t = (i + 0.5) * ch.length / res;
        Vec x = ch.x0 + t * ch.that;
        x = Vec(wrap_angle(x[0]), wrap_angle(x[1]));
        sum += slice_term(x);
      }
      return pref * sum * (ch.length / res);  // surface measure factor 1
    }
    case SurfaceKind::Tilted: {
      const double jac = std::sqrt(1.0 + norm2(s.a));
      const double x2 = wrap_angle(dot(s.a, khat) + s.c);
      double sum = 0.0;
      for (int i = 0; i < res; ++i) {
        const double x1 = (i + 0.5) * kTwoPi / res;
        sum += slice_term(Vec(x1, x2));
      }
      return pref * jac * sum * (kTwoPi / res);
    }
    default:
      throw std::invalid_argument("qer_rhs_defect: curved-fiber slice is tangent (unsupported)");
  }
}

// ---------------------------------------------------------------------------
// Symbols.

double symbol_A(const SurfaceNode& nd, const PhaseVec& eta) {
  const double ex = dot(eta, nd.X);
  return -norm2(eta) + ex * ex + norm2(nd.p.xi) * f_value(nd.theta, nd.phi);
}

double symbol_B(const SurfaceNode& nd, const PhaseVec& eta) {
  const PhaseVec gr = grad_rho(nd.p);
  const double aN = dot(gr, nd.nu);
  const PhaseVec tang = gr - aN * nd.nu;
  return 2.0 * dot(eta, tang) - norm2(nd.p.xi) * std::cos(nd.theta) * std::cos(nd.phi);
}

EllipticityScan ellipticity_scan(const HypersurfaceSpec& s, double eta_radius, int res,
                                 int eta_res) {
  const EnergyCurveGrid grid = intersect_sphere_bundle(s, res);
  EllipticityScan out;
  out.min_symbol = std::numeric_limits<double>::infinity();
  out.max_symbol = -std::numeric_limits<double>::infinity();
  const int nb = 2 * s.n - 1;
  for (const SurfaceNode& nd : grid.nodes) {
    // Orthonormal tangent basis of T Sigma, led by X (the saturation
    // direction of the Cauchy-Schwarz bound).
    std::vector<PhaseVec> basis;
    basis.push_back(nd.X);
    for (int aix = 0; aix < 2 * s.n && static_cast<int>(basis.size()) < nb; ++aix) {
      PhaseVec v = zero_phase_vec(s.n);
      if (aix < s.n)
        v.x[aix] = 1.0;
      else
        v.xi[aix - s.n] = 1.0;
      v = v - dot(v, nd.nu) * nd.nu;
      for (const PhaseVec& b : basis) v = v - dot(v, b) * b;
      const double vn = norm(v);
      if (vn > 0.3) basis.push_back((1.0 / vn) * v);
    }
    auto visit = [&](const PhaseVec& eta) {
      const double val = symbol_A(nd, eta);
      out.min_symbol = std::min(out.min_symbol, val);
      out.max_symbol = std::max(out.max_symbol, val);
      ++out.pairs;
    };
    for (int ir = 0; ir <= eta_res; ++ir) {
      const double r = eta_radius * ir / std::max(1, eta_res);
      if (s.n == 1) {
        visit(r * basis[0]);
        continue;
      }
      // directions on the upper half sphere (the symbol is even in eta)
      for (int ip = 0; ip <= eta_res; ++ip) {
        const double psi = 0.5 * kPi * ip / std::max(1, eta_res);
        for (int ic = 0; ic < 2 * eta_res; ++ic) {
          const double chi = kPi * ic / std::max(1, eta_res);
          PhaseVec dir = std::cos(psi) * basis[0];
          if (basis.size() > 1) dir = dir + std::sin(psi) * std::cos(chi) * basis[1];
          if (basis.size() > 2) dir = dir + std::sin(psi) * std::sin(chi) * basis[2];
          visit(r * dir);
          if (ir == 0) break;  // eta = 0 once per psi row
        }
        if (ir == 0) break;
      }
    }
  }
  out.margin = -out.max_symbol;
  return out;
}

// ---------------------------------------------------------------------------
// Fourier multiplier on the restricted transform.

double multiplier_residual(const ModeSum& u, const HypersurfaceSpec& s,
                           const std::function<double(double, double, double)>& Q, int ns, int nxi,
                           double xi_halfwidth) {
  if (u.n != 2) throw std::invalid_argument("multiplier_residual: base dimension must be 2");
  if (s.kind == SurfaceKind::TubeGraph)
    throw std::invalid_argument("multiplier_residual: no flat periodic chart on this member");
  if (ns < 4 || nxi < 4) throw std::invalid_argument("multiplier_residual: grid too small");
  const double h = u.h;
  const double w = xi_halfwidth;
  const double dxi = 2.0 * w / nxi;

  SliceChart ch;
  if (s.kind == SurfaceKind::Vertical) ch = vertical_chart(s);
  const double length = (s.kind == SurfaceKind::Vertical) ? ch.length : kTwoPi;

  // Sample the restricted transform on the chart grid (bare magnitudes are
  // <= sum |c|, so plain complex storage is safe).
  const std::vector<int> dims{ns, nxi, nxi};
  std::vector<std::complex<double>> f(static_cast<size_t>(ns) * nxi * nxi);
  std::vector<double> xs(static_cast<size_t>(nxi));
  for (int i = 0; i < nxi; ++i) xs[static_cast<size_t>(i)] = -w + (i + 0.5) * dxi;
  size_t idx = 0;
  for (int is = 0; is < ns; ++is) {
    const double sv = is * length / ns;
    for (int i1 = 0; i1 < nxi; ++i1)
      for (int i2 = 0; i2 < nxi; ++i2, ++idx) {
        const Vec xi(xs[static_cast<size_t>(i1)], xs[static_cast<size_t>(i2)]);
        Vec x;
        if (s.kind == SurfaceKind::Vertical)
          x = ch.x0 + sv * ch.that;
        else
          x = Vec(sv, wrap_angle(dot(s.a, xi) + s.c));
        const double rr = 0.5 * norm2(xi);
        std::complex<double> val{0.0, 0.0};
        for (const Mode& m : u.modes) {
          double kxi = 0.0, th = 0.0;
          for (int d = 0; d < 2; ++d) {
            kxi += m.k[static_cast<size_t>(d)] * xi[d];
            th += m.k[static_cast<size_t>(d)] * x[d];
          }
          val += m.coeff * std::polar(std::exp(kxi - (rr + 0.5) / h), th);
        }
        f[idx] = val;
      }
  }

  // Chartwise Fourier multiplier.
  std::vector<std::complex<double>> qf = f;
  fft_nd(qf, dims, -1);
  auto signed_freq = [](int j, int nf) { return (j <= nf / 2) ? j : j - nf; };
  idx = 0;
  for (int j0 = 0; j0 < ns; ++j0) {
    const double sstar = h * kTwoPi / length * signed_freq(j0, ns);
    for (int j1 = 0; j1 < nxi; ++j1) {
      const double x1star = h * kTwoPi / (2.0 * w) * signed_freq(j1, nxi);
      for (int j2 = 0; j2 < nxi; ++j2, ++idx) {
        const double x2star = h * kTwoPi / (2.0 * w) * signed_freq(j2, nxi);
        qf[idx] *= Q(sstar, x1star, x2star);
      }
    }
  }
  fft_nd(qf, dims, +1);
  const double inv = 1.0 / (static_cast<double>(ns) * nxi * nxi);
  for (auto& z : qf) z *= inv;

  // Comparison symbol: dual values attained on the restricted wavefront set.
  double num = 0.0, den = 0.0;
  idx = 0;
  for (int is = 0; is < ns; ++is)
    for (int i1 = 0; i1 < nxi; ++i1)
      for (int i2 = 0; i2 < nxi; ++i2, ++idx) {
        const Vec xi(xs[static_cast<size_t>(i1)], xs[static_cast<size_t>(i2)]);
        double qs;
        if (s.kind == SurfaceKind::Vertical)
          qs = Q(dot(xi, ch.that), 0.0, 0.0);
        else
          qs = Q(xi[0], xi[1] * s.a[0], xi[1] * s.a[1]);
        num += std::norm(qf[idx] - qs * f[idx]);
        den += std::norm(f[idx]);
      }
  if (den == 0.0) throw std::invalid_argument("multiplier_residual: restricted field vanishes");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Restricted wavefront set.

FlowOutSet flow_out_set(const HypersurfaceSpec& s, int res) {
  if (s.n != 2 || s.kind == SurfaceKind::TubeGraph)
    throw std::invalid_argument("flow_out_set: no global flat chart on this member");
  FlowOutSet out;
  out.flow_times = {-1.0, -0.5, 0.0, 0.5, 1.0};

  SliceChart ch;
  if (s.kind == SurfaceKind::Vertical) ch = vertical_chart(s);
  const double length = (s.kind == SurfaceKind::Vertical) ? ch.length : kTwoPi;

  for (int i = 0; i < res; ++i) {
    const double sb = i * length / res;
    for (int j = 0; j < res; ++j) {
      const double al = kTwoPi * j / res;
      const Vec xi(std::cos(al), std::sin(al));
      double ref_dual_s = 0.0;
      Vec ref_dual_xi(0.0, 0.0);
      for (double t : out.flow_times) {
        // Ambient dual of the wavefront point over Sigma, moved by the flow
        // of the defining function: (x*, xi*) = (xi, 0) - t (d_x F, d_xi F).
        Vec xstar, xistar;
        if (s.kind == SurfaceKind::Vertical) {
          xstar = xi - t * ch.e;
          xistar = Vec(0.0, 0.0);
        } else {
          xstar = xi - t * Vec(0.0, 1.0);
          xistar = Vec(0.0, 0.0) + t * s.a;
        }
        // Chart projection of the duals.
        FlowOutSample smp;
        smp.sbase = sb;
        smp.xi = xi;
        smp.flow_time = t;
        if (s.kind == SurfaceKind::Vertical) {
          smp.dual_s = dot(xstar, ch.that);
          smp.dual_xi = xistar;  // chart fibers coincide with ambient fibers
        } else {
          smp.dual_s = xstar[0];
          smp.dual_xi = Vec(xistar[0] + xstar[1] * s.a[0], xistar[1] + xstar[1] * s.a[1]);
        }
        // The chart projection absorbs the flow: every flow time must land on
        // the same chart dual as the unflowed point.
        if (t == out.flow_times.front()) {
          ref_dual_s = smp.dual_s;
          ref_dual_xi = smp.dual_xi;
        }
        assert(std::abs(smp.dual_s - ref_dual_s) < 1e-12);
        assert(norm(smp.dual_xi - ref_dual_xi) < 1e-12);
        out.samples.push_back(smp);
      }
    }
  }
  return out;
}

SigmaContainment wf_sigma_containment(const ModeSum& u, const HypersurfaceSpec& s,
                                      double threshold_rel) {
  if (u.n != 2 || s.kind != SurfaceKind::Vertical)
    throw std::invalid_argument("wf_sigma_containment: base-vertical chart required");
  const double h = u.h;
  const SliceChart ch = vertical_chart(s);
  const double L = ch.length;
  const size_t nm = u.modes.size();
  if (nm == 0) throw std::invalid_argument("wf_sigma_containment: empty mode sum");

  // The restricted field on the chart (slice coordinate sv, fiber xi) is
  //   T_Sigma u = sum_m c_m e^{i<k_m, x0>} e^{i sv kap_m} psi_m(xi),
  //   kap_m = <k_m, that>,  psi_m(xi) = prod_j e^{(khat_j xi_j - xi_j^2/2 - khat_j^2/2)/h},
  // with per-axis real Gaussian factors bounded by one. The model set puts no
  // constraint on the slice coordinate, so the slice direction is transformed
  // over its full period (no window, exact 1-D integral); the fiber axes get
  // bump windows across a lattice of centers.
  struct ModePre {
    std::complex<double> c;  // coefficient including the base-point phase
    double kap = 0.0;
    Vec khat;
  };
  std::vector<ModePre> pre(nm);
  for (size_t m = 0; m < nm; ++m) {
    const Vec k(static_cast<double>(u.modes[m].k[0]), static_cast<double>(u.modes[m].k[1]));
    pre[m].c = u.modes[m].coeff * std::polar(1.0, dot(k, ch.x0));
    pre[m].kap = dot(k, ch.that);
    pre[m].khat = h * k;
  }

  // Dual grids (shared step in every dual variable).
  const double dual_step = 0.05, dual_range = 1.5;
  const int nd = 2 * static_cast<int>(std::round(dual_range / dual_step)) + 1;
  const DualAxis dual{-dual_range, dual_step, nd};

  // Exact full-period slice transform of e^{i s kap}: kap * L is a multiple
  // of 2 pi, so the integral closed form needs only e^{-i s* L / h}.
  auto slice_line = [&](double kap, double sstar) -> std::complex<double> {
    const double mu = kap - sstar / h;
    if (std::abs(mu) * L < 1e-12) return {L, 0.0};
    return (std::polar(1.0, mu * L) - std::complex<double>{1.0, 0.0}) /
           std::complex<double>{0.0, mu};
  };
  std::vector<std::vector<std::complex<double>>> dline(nm,
                                                       std::vector<std::complex<double>>(nd));
  std::vector<double> dline_max(nm, 0.0);
  for (size_t m = 0; m < nm; ++m)
    for (int j = 0; j < nd; ++j) {
      dline[m][j] = slice_line(pre[m].kap, dual.coord(j));
      dline_max[m] = std::max(dline_max[m], std::abs(dline[m][j]));
    }

  // Fiber-axis windowed transforms: coherent-state windows of width
  // proportional to sqrt(h). A fixed window width would keep centers hot at
  // h-independent distances from the shell, since the bump value at the
  // Gaussian ridge does not decay with h once the ridge sits inside the
  // window support. The sample step resolves both the sqrt(h) Gaussian and
  // the fastest dual phase.
  const double ww = 1.5 * std::sqrt(h);
  const double dxi = std::min(std::sqrt(h) / 4.0, h / 2.0);
  const int nxw = 2 * static_cast<int>(std::ceil(ww / dxi)) + 1;
  auto fiber_profile = [&](double center, double khat_j,
                           std::vector<std::complex<double>>& prof) {
    const AxisGrid g{center - ww, 2.0 * ww / (nxw - 1), nxw};
    std::vector<std::complex<double>> samples(static_cast<size_t>(nxw));
    for (int i = 0; i < nxw; ++i) {
      const double t = g.coord(i);
      const double gexp = (khat_j * t - 0.5 * t * t - 0.5 * khat_j * khat_j) / h;
      samples[static_cast<size_t>(i)] = bump_window(t - center, ww) * std::exp(gexp);
    }
    prof.assign(static_cast<size_t>(nd), {0.0, 0.0});
    for (int jd = 0; jd < nd; ++jd) {
      const double f = dual.coord(jd);
      std::complex<double> acc{0.0, 0.0};
      for (int i = 0; i < nxw; ++i)
        acc += samples[static_cast<size_t>(i)] * std::polar(1.0, -g.coord(i) * f / h);
      prof[static_cast<size_t>(jd)] = acc * g.dt;
    }
  };

  // Window-center lattice scaled with the window width, so the center
  // granularity stays a fixed fraction of the containment scale; the field
  // of view covers the possible hot reach around the unit shell while the
  // window supports stay inside the fiber disc.
  const double cs = ww / 4.0;
  const double cmax = std::min(s.tau - ww - 0.05, 1.0 + 3.0 * std::sqrt(h));
  const int nc = static_cast<int>(std::floor(cmax / cs));
  const int nvals = 2 * nc + 1;

  // Profiles memoized per distinct 1-D center value: [axis][mode][center
  // index][dual index], with per-profile maxima alongside.
  std::array<std::vector<std::vector<std::vector<std::complex<double>>>>, 2> prof;
  std::array<std::vector<std::vector<double>>, 2> prof_max;
  for (int a = 0; a < 2; ++a) {
    prof[static_cast<size_t>(a)].resize(nm);
    prof_max[static_cast<size_t>(a)].resize(nm);
    for (size_t m = 0; m < nm; ++m) {
      prof[static_cast<size_t>(a)][m].resize(static_cast<size_t>(nvals));
      prof_max[static_cast<size_t>(a)][m].assign(static_cast<size_t>(nvals), 0.0);
      for (int iv = 0; iv < nvals; ++iv) {
        std::vector<std::complex<double>>& p =
            prof[static_cast<size_t>(a)][m][static_cast<size_t>(iv)];
        fiber_profile(cs * (iv - nc), pre[m].khat[a], p);
        double mx = 0.0;
        for (int j = 0; j < nd; ++j) mx = std::max(mx, std::abs(p[static_cast<size_t>(j)]));
        prof_max[static_cast<size_t>(a)][m][static_cast<size_t>(iv)] = mx;
      }
    }
  }

  struct WindowEval {
    int iv1 = 0, iv2 = 0;  // lattice indices into the memoized profiles
    double bound = 0.0;    // >= true transform peak
    double peak = 0.0;     // exact for one mode, else set on demand
  };
  std::vector<WindowEval> evals;
  std::vector<Vec> centers;
  for (int i1 = -nc; i1 <= nc; ++i1)
    for (int i2 = -nc; i2 <= nc; ++i2) {
      const double c1 = cs * i1, c2 = cs * i2;
      if (c1 * c1 + c2 * c2 > cmax * cmax + 1e-12) continue;
      WindowEval we;
      we.iv1 = i1 + nc;
      we.iv2 = i2 + nc;
      for (size_t m = 0; m < nm; ++m)
        we.bound += std::abs(pre[m].c) * dline_max[m] *
                    prof_max[0][m][static_cast<size_t>(we.iv1)] *
                    prof_max[1][m][static_cast<size_t>(we.iv2)];
      if (nm == 1) we.peak = we.bound;  // separable: the bound is attained
      evals.push_back(we);
      centers.push_back(Vec(c1, c2));
    }

  auto cube_value = [&](const WindowEval& we, int j0, int j1, int j2) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t m = 0; m < nm; ++m)
      acc += pre[m].c * dline[m][static_cast<size_t>(j0)] *
             prof[0][m][static_cast<size_t>(we.iv1)][static_cast<size_t>(j1)] *
             prof[1][m][static_cast<size_t>(we.iv2)][static_cast<size_t>(j2)];
    return acc;
  };

  // Global peak: exact per window in the separable case; otherwise evaluate
  // cubes in descending bound order and prune once bounds fall below the
  // running peak.
  double peak = 0.0;
  std::vector<size_t> order(centers.size());
  for (size_t i = 0; i < centers.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return evals[a].bound > evals[b].bound; });
  if (nm == 1) {
    for (const WindowEval& we : evals) peak = std::max(peak, we.peak);
  } else {
    for (size_t oi : order) {
      WindowEval& we = evals[oi];
      if (we.bound < peak) {
        we.peak = 0.0;
        continue;
      }
      double p = 0.0;
      for (int j0 = 0; j0 < nd; ++j0)
        for (int j1 = 0; j1 < nd; ++j1)
          for (int j2 = 0; j2 < nd; ++j2) p = std::max(p, std::abs(cube_value(we, j0, j1, j2)));
      we.peak = p;
      peak = std::max(peak, p);
    }
  }

  SigmaContainment out;
  out.peak_mag = peak;
  const double cut = threshold_rel * peak;
  double sum_d = 0.0, max_d = 0.0;
  long cnt = 0;
  for (size_t wi = 0; wi < centers.size(); ++wi) {
    const WindowEval& we = evals[wi];
    if (we.bound < cut) continue;
    bool hot = false;
    for (int j0 = 0; j0 < nd; ++j0)
      for (int j1 = 0; j1 < nd; ++j1)
        for (int j2 = 0; j2 < nd; ++j2) {
          const double mag = std::abs(cube_value(we, j0, j1, j2));
          if (mag < cut) continue;
          hot = true;
          const Vec xistar(dual.coord(j1), dual.coord(j2));
          const double d =
              dist_to_surface_wavefront_set(ch.that, centers[wi], dual.coord(j0), xistar);
          sum_d += d;
          max_d = std::max(max_d, d);
          ++cnt;
        }
    if (hot)
      out.max_base_shell_dist =
          std::max(out.max_base_shell_dist, std::abs(norm(centers[wi]) - 1.0));
  }
  out.dual_stats.count = static_cast<int>(cnt);
  out.dual_stats.max_dist = max_d;
  out.dual_stats.mean_dist = cnt ? sum_d / cnt : 0.0;
  out.points = cnt;
  return out;
}

// ---------------------------------------------------------------------------
// Scaling experiments.

int surface_res_for(double h, int res_scale) {
  int r = static_cast<int>(std::ceil(res_scale / std::sqrt(h)));
  r = std::max(64, r);
  if (r % 2) ++r;
  return r;
}

QERReport scaling_experiment(const ScalingInput& in, const HypersurfaceSpec& s,
                             const SurfaceWeight& a) {
  if (in.hs.size() < 2) throw std::invalid_argument("scaling_experiment: need an h sweep");
  for (size_t i = 1; i < in.hs.size(); ++i)
    if (!(in.hs[i] < in.hs[i - 1]))
      throw std::invalid_argument("scaling_experiment: h list must decrease");

  QERReport rep;
  rep.ensemble = in.ensemble;
  if (in.ensemble) rep.rhs_liouville = qer_rhs(s, a, 192);

  std::vector<std::array<int, 2>> shell_basis;
  for (double h : in.hs) {
    const std::vector<ModeSum> draws = in.family(h);
    if (draws.empty()) throw std::invalid_argument("scaling_experiment: empty draw list");
    const int n = draws[0].n;

    std::vector<std::array<int, 2>> ks;
    for (const ModeSum& d : draws)
      for (const Mode& m : d.modes) ks.push_back(m.k);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    shell_basis = ks;

    const int res = surface_res_for(h, in.res_scale);
    const CauchyGram g = cauchy_gram(ks, n, h, s, a, res, true);

    std::complex<double> mean_t1{0.0, 0.0}, mean_t2{0.0, 0.0};
    double mean_norm = 0.0;
    for (const ModeSum& d : draws) {
      const auto c = mode_coefficients(d, ks);
      mean_t1 += gram_apply(g.t1, c);
      mean_t2 += gram_apply(g.t2, c);
      const double nrm = std::sqrt(std::max(0.0, gram_apply(g.norm, c).real()));
      rep.all_norms.push_back(nrm);
      mean_norm += nrm;
    }
    const double nd = static_cast<double>(draws.size());
    mean_t1 /= nd;
    mean_t2 /= nd;
    mean_norm /= nd;

    QERRow row;
    row.h = h;
    const std::complex<double> tot = mean_t1 + mean_t2;
    row.scaled_lhs = tot.real();
    row.imag_rel = std::abs(tot.imag()) / (std::abs(tot.real()) + 1e-300);
    const double back = 1.0 / h + 0.5 * n * std::log(h);
    row.term1_log = (std::abs(mean_t1) > 0.0) ? std::log(std::abs(mean_t1)) + back : kNegInf;
    row.term2_log = (std::abs(mean_t2) > 0.0) ? std::log(std::abs(mean_t2)) + back : kNegInf;
    row.norm = mean_norm;
    row.weighted_norm_log = weighted_norm_log(draws[0], s, res);
    row.rhs = in.ensemble ? rep.rhs_liouville : qer_rhs_defect(s, a, draws[0]);
    row.ratio = (row.rhs != 0.0) ? row.scaled_lhs / row.rhs : 0.0;
    rep.rows.push_back(row);
  }

  // Shell average of the slice references (the reference an ensemble mean
  // actually tracks); curved-fiber members have no slice reference.
  if (in.ensemble && s.kind != SurfaceKind::TubeGraph && !shell_basis.empty()) {
    const int n = 2;
    const double cmag = std::pow(kTwoPi, -0.5 * n) / std::sqrt(static_cast<double>(shell_basis.size()));
    double sum = 0.0;
    for (const auto& k : shell_basis) {
      ModeSum um;
      um.n = n;
      um.h = in.hs.front();
      um.modes.push_back({k, {cmag, 0.0}});
      const double kk = std::sqrt(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
      if (kk > 0.0) um.h = 1.0 / kk;
      sum += qer_rhs_defect(s, a, um);
    }
    rep.rhs_defect_avg = sum;
  }

  std::vector<double> lx, ly;
  for (const QERRow& r : rep.rows)
    if (r.norm > 0.0) {
      lx.push_back(std::log(r.h));
      ly.push_back(std::log(r.norm));
    }
  if (lx.size() >= 2) rep.norm_fit = fit_line(lx, ly);

  rep.gap_monotone = rep.rows.size() >= 2;
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    const double g0 = std::abs(rep.rows[i - 1].ratio - 1.0);
    const double g1 = std::abs(rep.rows[i].ratio - 1.0);
    if (!(g1 <= g0 + 1e-12)) rep.gap_monotone = false;
  }
  if (!rep.rows.empty()) rep.final_gap = std::abs(rep.rows.back().ratio - 1.0);

  if (!rep.all_norms.empty()) {
    std::vector<double> sorted = rep.all_norms;
    std::sort(sorted.begin(), sorted.end());
    rep.min_norm = sorted.front();
    rep.median_norm = sorted[sorted.size() / 2];
  }
  return rep;
}

}  // namespace tube
