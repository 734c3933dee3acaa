#include "tube/fbi.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace tube {

namespace {

// Visit a quadrature grid over the tube: uniform midpoints in x, and in xi
// either uniform midpoints (n = 1) or polar midpoint-radius / uniform-angle
// (n = 2). The callback receives (x, xi, weight).
template <typename Fn>
void for_each_tube_node(int n, double tau, int res, Fn&& fn) {
  if (n == 1) {
    const double dx = kTwoPi / res;
    const double dxi = 2.0 * tau / res;
    for (int i = 0; i < res; ++i) {
      const Vec x((i + 0.5) * dx);
      for (int j = 0; j < res; ++j) {
        const Vec xi(-tau + (j + 0.5) * dxi);
        fn(x, xi, dx * dxi);
      }
    }
    return;
  }
  const double dx = kTwoPi / res;
  const double dr = tau / res;
  const double da = kTwoPi / res;
  for (int i0 = 0; i0 < res; ++i0)
    for (int i1 = 0; i1 < res; ++i1) {
      const Vec x((i0 + 0.5) * dx, (i1 + 0.5) * dx);
      for (int jr = 0; jr < res; ++jr) {
        const double r = (jr + 0.5) * dr;
        const double w_r = dx * dx * dr * da * r;
        for (int ja = 0; ja < res; ++ja) {
          const double a = ja * da;
          fn(x, Vec(r * std::cos(a), r * std::sin(a)), w_r);
        }
      }
    }
}

}  // namespace

LogComplex eval_T(const ModeSum& u, const TubePoint& p) {
  LogComplex uc = ModeEval(u).at(p);
  uc.logmag += -0.5 / u.h - rho(p) / u.h;
  return uc;
}

double heat_normalization(int n, double h) { return std::pow(h, -0.25 * n); }

LogComplex eval_T_heat(const ModeSum& u, const TubePoint& p, int res) {
  const ModeEval ev(u);
  const int n = u.n;
  const double h = u.h;
  const double dy = kTwoPi / res;
  LogAccumulator acc;
  auto add_point = [&](const Vec& y) {
    LogComplex t = ev(y, zero_vec(n));
    if (t.is_zero()) return;
    double mag = 0.0, ph = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = nearest_image(p.x[j] - y[j]);
      mag += -0.5 * d * d / h;
      ph += d * p.xi[j] / h;
    }
    t.logmag += mag;
    t.phase += ph;
    acc.add(t);
  };
  if (n == 1) {
    for (int i = 0; i < res; ++i) add_point(Vec(i * dy));
  } else {
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j) add_point(Vec(i * dy, j * dy));
  }
  LogComplex total = acc.total();
  total.logmag += -0.25 * n * std::log(h) - 0.5 * n * std::log(kTwoPi * h) + n * std::log(dy);
  return total;
}

double ambient_norm(const ModeSum& u, double tau, int res) {
  const ModeEval ev(u);
  const double h = u.h;
  LogAccumulator acc;
  for_each_tube_node(u.n, tau, res, [&](const Vec& x, const Vec& xi, double w) {
    const LogComplex uc = ev(x, xi);
    if (uc.is_zero()) return;
    const double r2 = 0.5 * (norm2(xi));
    acc.add(LogComplex{2.0 * (uc.logmag - 0.5 / h - r2 / h), 0.0}, w);
  });
  const LogComplex total = acc.total();
  if (total.is_zero()) return 0.0;
  return std::exp(0.5 * (total.logmag - 0.5 * u.n * std::log(h)));
}

double energy_mass_off_shell(const ModeSum& u, double eps, double tau, int res) {
  const ModeEval ev(u);
  const double h = u.h;
  LogAccumulator off, tot;
  for_each_tube_node(u.n, tau, res, [&](const Vec& x, const Vec& xi, double w) {
    const LogComplex uc = ev(x, xi);
    if (uc.is_zero()) return;
    const double r2 = 0.5 * norm2(xi);
    const LogComplex density{2.0 * (uc.logmag - 0.5 / h - r2 / h), 0.0};
    tot.add(density, w);
    if (std::abs(norm(xi) - 1.0) > eps) off.add(density, w);
  });
  const LogComplex o = off.total(), t = tot.total();
  if (t.is_zero()) return 0.0;
  if (o.is_zero()) return 0.0;
  return std::exp(o.logmag - t.logmag);
}

double holomorphy_residual(const ModeSum& u, const TubePoint& p, Continuation cont) {
  const Jet2 j = eval_jet2(u, p, cont);
  const int n = j.n;
  const double h = u.h;
  std::complex<double> lap{0.0, 0.0};
  for (int a = 0; a < 2 * n; ++a) lap += j.d2(a, a);
  double cr = 0.0;
  for (int i = 0; i < n; ++i)
    cr += std::abs(j.du[static_cast<size_t>(i)] -
                   std::complex<double>{0.0, 1.0} * j.du[static_cast<size_t>(n + i)]);
  const double denom = std::abs(j.u) + 1e-300;
  return (h * h * std::abs(lap) + h * cr) / denom;
}

// ---------------------------------------------------------------------------

double bump_window(double t, double width, double flat) {
  const double a = std::abs(t);
  if (a <= flat) return 1.0;
  if (a >= width) return 0.0;
  const double s = (a - flat) / (width - flat);
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

Tensor windowed_ft_nd(const Tensor& field, const std::vector<AxisGrid>& axes,
                      const std::vector<double>& center, double window_width,
                      const std::vector<DualAxis>& dual, double h, double window_flat) {
  const size_t rank = axes.size();
  if (field.dims.size() != rank || center.size() != rank || dual.size() != rank)
    throw std::invalid_argument("windowed_ft_nd: rank mismatch");
  // Apply the separable window in place on a copy.
  Tensor work = field;
  std::vector<std::vector<double>> wts(rank);
  for (size_t a = 0; a < rank; ++a) {
    wts[a].resize(static_cast<size_t>(axes[a].count));
    for (int i = 0; i < axes[a].count; ++i)
      wts[a][static_cast<size_t>(i)] = bump_window(axes[a].coord(i) - center[a], window_width,
                                                   window_flat);
  }
  apply_separable(work, wts);
  // Transform one axis at a time.
  for (size_t a = 0; a < rank; ++a)
    work = dft_axis(work, static_cast<int>(a), axes[a], dual[a].f0, dual[a].df, dual[a].count, h);
  return work;
}

std::vector<std::vector<std::complex<double>>> separable_windowed_ft(
    const std::vector<AxisGrid>& axes,
    const std::vector<std::function<std::complex<double>(double)>>& factors,
    const std::vector<double>& center, double window_width, const std::vector<DualAxis>& dual,
    double h, double window_flat) {
  const size_t rank = axes.size();
  if (factors.size() != rank || center.size() != rank || dual.size() != rank)
    throw std::invalid_argument("separable_windowed_ft: rank mismatch");
  std::vector<std::vector<std::complex<double>>> out(rank);
  for (size_t a = 0; a < rank; ++a) {
    const AxisGrid& g = axes[a];
    // Windowed samples of this axis factor.
    std::vector<std::complex<double>> vals(static_cast<size_t>(g.count));
    for (int i = 0; i < g.count; ++i) {
      const double t = g.coord(i);
      vals[static_cast<size_t>(i)] = factors[a](t) * bump_window(t - center[a], window_width,
                                                                 window_flat);
    }
    out[a].assign(static_cast<size_t>(dual[a].count), {0.0, 0.0});
    for (int m = 0; m < dual[a].count; ++m) {
      const double f = dual[a].coord(m);
      std::complex<double> s{0.0, 0.0};
      for (int i = 0; i < g.count; ++i) {
        const double ph = -g.coord(i) * f / h;
        s += vals[static_cast<size_t>(i)] * std::complex<double>{std::cos(ph), std::sin(ph)};
      }
      out[a][static_cast<size_t>(m)] = s * g.dt;
    }
  }
  return out;
}

void scan_superthreshold(const std::vector<std::vector<double>>& mags, double threshold_rel,
                         const std::function<void(const std::vector<int>&, double)>& fn) {
  const size_t rank = mags.size();
  std::vector<double> axis_max(rank, 0.0);
  for (size_t a = 0; a < rank; ++a)
    for (double m : mags[a]) axis_max[a] = std::max(axis_max[a], m);
  double peak = 1.0;
  for (double m : axis_max) peak *= m;
  if (peak <= 0.0) return;
  const double cut = threshold_rel * peak;
  // suffix_best[a] = product of axis maxima for axes > a.
  std::vector<double> suffix_best(rank + 1, 1.0);
  for (size_t a = rank; a-- > 0;) suffix_best[a] = suffix_best[a + 1] * axis_max[a];

  std::vector<int> idx(rank, 0);
  std::function<void(size_t, double)> rec = [&](size_t a, double prod) {
    if (a == rank) {
      fn(idx, prod);
      return;
    }
    const double need = cut / suffix_best[a + 1];
    const auto& m = mags[a];
    for (size_t i = 0; i < m.size(); ++i) {
      const double p = prod * m[i];
      if (p < need) continue;
      idx[a] = static_cast<int>(i);
      rec(a + 1, p);
    }
  };
  rec(0, 1.0);
}

double dist_to_wavefront_set(const Vec& xi_center, const Vec& x_star, const Vec& xi_star) {
  const int n = xi_center.n;
  double best;
  if (n == 1) {
    const double plus = (xi_center[0] - 1.0) * (xi_center[0] - 1.0) +
                        (x_star[0] - 1.0) * (x_star[0] - 1.0);
    const double minus = (xi_center[0] + 1.0) * (xi_center[0] + 1.0) +
                         (x_star[0] + 1.0) * (x_star[0] + 1.0);
    best = std::min(plus, minus);
  } else {
    const Vec s = xi_center + x_star;
    const double m = norm(s);
    best = norm2(xi_center) + norm2(x_star) + 2.0 - 2.0 * m;
  }
  return std::sqrt(std::max(0.0, best) + norm2(xi_star));
}

double dist_to_crude_set(const Vec& xi_center, const Vec& x_star, const Vec& xi_star) {
  const double a = norm(xi_center) - 1.0;
  const double b = norm(x_star) - 1.0;
  return std::sqrt(a * a + b * b + norm2(xi_star));
}

double dist_to_surface_wavefront_set(const Vec& that_hat, const Vec& xi_center, double s_star,
                                     const Vec& xi_star) {
  if (xi_center.n != 2) throw std::invalid_argument("surface wavefront model needs n=2");
  const int kGrid = 512;
  double best = kNegInf;
  auto value = [&](double ang) {
    const Vec xt(std::cos(ang), std::sin(ang));
    const Vec d = xi_center - xt;
    const double c = s_star - dot(xt, that_hat);
    return norm2(d) + c * c;
  };
  int best_i = 0;
  best = value(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double v = value(kTwoPi * i / kGrid);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  // One parabolic refinement around the grid minimum.
  const double da = kTwoPi / kGrid;
  const double a0 = kTwoPi * best_i / kGrid;
  const double vm = value(a0 - da), vp = value(a0 + da);
  const double denom = vm - 2.0 * best + vp;
  if (denom > 1e-18) {
    const double shift = 0.5 * (vm - vp) / denom;
    best = std::min(best, value(a0 + shift * da));
  }
  return std::sqrt(std::max(0.0, best) + norm2(xi_star));
}

ContainmentStats wf_containment(const std::vector<WFPoint>& pts,
                                const std::function<double(const WFPoint&)>& dist) {
  ContainmentStats st;
  double sum = 0.0;
  for (const WFPoint& p : pts) {
    const double d = dist(p);
    st.max_dist = std::max(st.max_dist, d);
    sum += d;
    ++st.count;
  }
  st.mean_dist = st.count ? sum / st.count : 0.0;
  return st;
}

}  // namespace tube
