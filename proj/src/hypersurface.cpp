#include "tube/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tube {

double TrigPoly::eval(const Vec& x) const {
  double s = 0.0;
  for (const auto& t : terms) {
    double ph = t.m[0] * x[0] + (x.n > 1 ? t.m[1] * x[1] : 0.0);
    s += t.cos_c * std::cos(ph) + t.sin_c * std::sin(ph);
  }
  return s;
}

Vec TrigPoly::grad(const Vec& x) const {
  Vec g(x.n);
  for (const auto& t : terms) {
    double ph = t.m[0] * x[0] + (x.n > 1 ? t.m[1] * x[1] : 0.0);
    double d = -t.cos_c * std::sin(ph) + t.sin_c * std::cos(ph);
    for (int i = 0; i < x.n; ++i) g[i] += d * t.m[static_cast<size_t>(i)];
  }
  return g;
}

double TrigPoly::hess(const Vec& x, const Vec& a, const Vec& b) const {
  double s = 0.0;
  for (const auto& t : terms) {
    double ph = t.m[0] * x[0] + (x.n > 1 ? t.m[1] * x[1] : 0.0);
    double d2 = -t.cos_c * std::cos(ph) - t.sin_c * std::sin(ph);
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < x.n; ++i) {
      ma += t.m[static_cast<size_t>(i)] * a[i];
      mb += t.m[static_cast<size_t>(i)] * b[i];
    }
    s += d2 * ma * mb;
  }
  return s;
}

double TrigPoly::laplacian(const Vec& x) const {
  double s = 0.0;
  for (const auto& t : terms) {
    double ph = t.m[0] * x[0] + (x.n > 1 ? t.m[1] * x[1] : 0.0);
    double d2 = -t.cos_c * std::cos(ph) - t.sin_c * std::sin(ph);
    double mm = static_cast<double>(t.m[0]) * t.m[0] + static_cast<double>(t.m[1]) * t.m[1];
    s += d2 * mm;
  }
  return s;
}

TrigPoly cosine_poly(std::array<int, 2> m, double amplitude) {
  TrigPoly g;
  g.terms.push_back({m, amplitude, 0.0});
  return g;
}

std::string HypersurfaceSpec::describe() const {
  char buf[160];
  switch (kind) {
    case SurfaceKind::Vertical:
      std::snprintf(buf, sizeof(buf), "vertical(e=(%d,%d),c=%.3f,n=%d)", e[0], e[1], c, n);
      break;
    case SurfaceKind::Tilted:
      std::snprintf(buf, sizeof(buf), "tilted(a=(%.3f,%.3f),c=%.3f)", a[0], a[1], c);
      break;
    case SurfaceKind::TubeGraph:
      std::snprintf(buf, sizeof(buf), "tube_graph(delta=%.3f)", delta);
      break;
  }
  return buf;
}

HypersurfaceSpec vertical_surface(int n, std::array<int, 2> e, double c, double tau) {
  HypersurfaceSpec s;
  s.kind = SurfaceKind::Vertical;
  s.n = n;
  s.e = e;
  s.c = c;
  s.tau = tau;
  if (n == 1) s.e = {1, 0};
  double ee = std::sqrt(static_cast<double>(s.e[0]) * s.e[0] + static_cast<double>(s.e[1]) * s.e[1]);
  if (ee == 0.0) throw std::invalid_argument("vertical_surface: e must be nonzero");
  return s;
}

HypersurfaceSpec tilted_surface(Vec a, double c, double tau) {
  HypersurfaceSpec s;
  s.kind = SurfaceKind::Tilted;
  s.n = 2;
  s.a = a;
  s.c = c;
  s.tau = tau;
  return s;
}

HypersurfaceSpec tube_graph_surface(double delta, TrigPoly g, double tau) {
  HypersurfaceSpec s;
  s.kind = SurfaceKind::TubeGraph;
  s.n = 2;
  s.delta = delta;
  s.g = std::move(g);
  s.tau = tau;
  // The graph radius sqrt(1 + delta*g) must stay positive and inside the tube.
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      Vec x(kTwoPi * i / 64.0, kTwoPi * j / 64.0);
      double v = 1.0 + delta * s.g.eval(x);
      if (v < 0.05) throw std::invalid_argument("tube_graph_surface: radius degenerates");
      if (std::sqrt(v) > tau - 0.05)
        throw std::invalid_argument("tube_graph_surface: graph exits the tube");
    }
  }
  return s;
}

namespace {
// Level values of the flat members are defined modulo the base period; map
// them to the symmetric branch so on-surface points report zero on any sheet.
double wrap_branch(double v) { return v - kTwoPi * std::floor((v + kPi) / kTwoPi); }
}  // namespace

double surface_F(const HypersurfaceSpec& s, const TubePoint& p) {
  switch (s.kind) {
    case SurfaceKind::Vertical: {
      double v = -s.c;
      for (int i = 0; i < s.n; ++i) v += s.e[static_cast<size_t>(i)] * p.x[i];
      return wrap_branch(v);
    }
    case SurfaceKind::Tilted:
      return wrap_branch(p.x[1] - dot(s.a, p.xi) - s.c);
    case SurfaceKind::TubeGraph:
      return norm2(p.xi) - 1.0 - s.delta * s.g.eval(p.x);
  }
  return 0.0;
}

PhaseVec surface_gradF(const HypersurfaceSpec& s, const TubePoint& p) {
  const int n = s.n;
  PhaseVec g = zero_phase_vec(n);
  switch (s.kind) {
    case SurfaceKind::Vertical:
      for (int i = 0; i < n; ++i) g.x[i] = static_cast<double>(s.e[static_cast<size_t>(i)]);
      break;
    case SurfaceKind::Tilted:
      g.x[1] = 1.0;
      g.xi = -1.0 * s.a;
      break;
    case SurfaceKind::TubeGraph:
      g.x = -s.delta * s.g.grad(p.x);
      g.xi = 2.0 * p.xi;
      break;
  }
  return g;
}

double surface_hessF(const HypersurfaceSpec& s, const TubePoint& p, const PhaseVec& u,
                     const PhaseVec& v) {
  switch (s.kind) {
    case SurfaceKind::Vertical:
    case SurfaceKind::Tilted:
      return 0.0;
    case SurfaceKind::TubeGraph:
      return -s.delta * s.g.hess(p.x, u.x, v.x) + 2.0 * dot(u.xi, v.xi);
  }
  return 0.0;
}

double surface_laplacianF(const HypersurfaceSpec& s, const TubePoint& p) {
  switch (s.kind) {
    case SurfaceKind::Vertical:
    case SurfaceKind::Tilted:
      return 0.0;
    case SurfaceKind::TubeGraph:
      return -s.delta * s.g.laplacian(p.x) + 2.0 * s.n;
  }
  return 0.0;
}

PhaseVec normal(const HypersurfaceSpec& s, const TubePoint& p) {
  PhaseVec g = surface_gradF(s, p);
  double gn = norm(g);
  if (gn < 1e-12) throw std::domain_error("normal: |grad F| vanishes");
  return (s.orientation / gn) * g;
}

PhaseVec j_normal(const HypersurfaceSpec& s, const TubePoint& p) { return apply_J(normal(s, p)); }

std::array<double, 2> angles(const HypersurfaceSpec& s, const TubePoint& p) {
  PhaseVec gr = grad_rho(p);
  double gn = norm(gr);
  if (gn < 1e-14) throw std::domain_error("angles: point on the zero section");
  PhaseVec nu = normal(s, p);
  PhaseVec X = apply_J(nu);
  auto clamp1 = [](double v) { return std::max(-1.0, std::min(1.0, v)); };
  double ct = clamp1(dot(gr, nu) / gn);
  double cp = clamp1(dot(gr, X) / gn);
  return {std::acos(ct), std::acos(cp)};
}

double mean_curvature(const HypersurfaceSpec& s, const TubePoint& p) {
  PhaseVec g = surface_gradF(s, p);
  double gn = norm(g);
  if (gn < 1e-12) throw std::domain_error("mean_curvature: |grad F| vanishes");
  double lap = surface_laplacianF(s, p);
  double hgg = surface_hessF(s, p, g, g);
  return s.orientation * (lap - hgg / (gn * gn)) / gn;
}

bool admissible_check(double theta, double phi, double tol) {
  return std::abs(theta - 0.5 * kPi) + std::abs(phi - 0.5 * kPi) <= 0.5 * kPi + tol;
}

double f_value(double theta, double phi) {
  double ct = std::cos(theta), cp = std::cos(phi);
  return ct * ct - 2.0 + cp * cp + std::sin(theta);
}

namespace {

SurfaceNode make_node(const HypersurfaceSpec& s, const TubePoint& p, double w) {
  SurfaceNode node;
  node.p = p;
  node.w = w;
  PhaseVec g = surface_gradF(s, p);
  node.grad_norm = norm(g);
  node.nu = normal(s, p);
  node.X = apply_J(node.nu);
  auto th = angles(s, p);
  node.theta = th[0];
  node.phi = th[1];
  node.H = mean_curvature(s, p);
  return node;
}

struct VerticalChart {
  Vec x0;      // base solution of <e,x> = c
  Vec tangent; // unit tangent of the base slice
  double length = 0.0;
  double e_norm = 0.0;
};

VerticalChart vertical_chart(const HypersurfaceSpec& s) {
  VerticalChart ch;
  double e0 = s.e[0], e1 = s.e[1];
  ch.e_norm = std::sqrt(e0 * e0 + e1 * e1);
  ch.x0 = Vec(s.c * e0 / (ch.e_norm * ch.e_norm), s.c * e1 / (ch.e_norm * ch.e_norm));
  ch.tangent = Vec(-e1 / ch.e_norm, e0 / ch.e_norm);
  ch.length = kTwoPi * ch.e_norm;
  return ch;
}

}  // namespace

// Streams quadrature nodes without materializing the whole grid.
template <class Fn>
static void for_each_node_impl(const HypersurfaceSpec& s, int res, Fn&& fn) {
  if (res < 2) throw std::invalid_argument("surface grid: res too small");
  switch (s.kind) {
    case SurfaceKind::Vertical: {
      if (s.n == 1) {
        // One-point base slice; the surface is the xi segment (-tau, tau).
        int nr = 2 * res;
        double dxi = 2.0 * s.tau / nr;
        for (int i = 0; i < nr; ++i) {
          double xi = -s.tau + (i + 0.5) * dxi;
          if (std::abs(xi) < 1e-9) continue;  // angles undefined on the zero section
          TubePoint p{Vec(s.c), Vec(xi)};
          fn(make_node(s, p, dxi));
        }
        return;
      }
      VerticalChart ch = vertical_chart(s);
      double ds = ch.length / res;
      double dr = s.tau / res, da = kTwoPi / res;
      for (int is = 0; is < res; ++is) {
        Vec x = ch.x0 + (is * ds) * ch.tangent;
        x = Vec(wrap_angle(x[0]), wrap_angle(x[1]));
        for (int ir = 0; ir < res; ++ir) {
          double r = (ir + 0.5) * dr;
          for (int ia = 0; ia < res; ++ia) {
            double al = ia * da;
            TubePoint p{x, Vec(r * std::cos(al), r * std::sin(al))};
            fn(make_node(s, p, ds * dr * da * r));
          }
        }
      }
      return;
    }
    case SurfaceKind::Tilted: {
      double area_factor = std::sqrt(1.0 + norm2(s.a));
      double dx = kTwoPi / res, dr = s.tau / res, da = kTwoPi / res;
      for (int ix = 0; ix < res; ++ix) {
        double x1 = ix * dx;
        for (int ir = 0; ir < res; ++ir) {
          double r = (ir + 0.5) * dr;
          for (int ia = 0; ia < res; ++ia) {
            double al = ia * da;
            Vec xi(r * std::cos(al), r * std::sin(al));
            TubePoint p{Vec(x1, wrap_angle(dot(s.a, xi) + s.c)), xi};
            fn(make_node(s, p, dx * dr * da * r * area_factor));
          }
        }
      }
      return;
    }
    case SurfaceKind::TubeGraph: {
      double dx = kTwoPi / res, da = kTwoPi / res;
      for (int ix = 0; ix < res; ++ix) {
        for (int iy = 0; iy < res; ++iy) {
          Vec x(ix * dx, iy * dx);
          double r2 = 1.0 + s.delta * s.g.eval(x);
          double r = std::sqrt(r2);
          Vec gr = s.g.grad(x);
          Vec grad_r = (s.delta / (2.0 * r)) * gr;
          double jac = r * std::sqrt(1.0 + norm2(grad_r));
          for (int ia = 0; ia < res; ++ia) {
            double al = ia * da;
            TubePoint p{x, Vec(r * std::cos(al), r * std::sin(al))};
            fn(make_node(s, p, dx * dx * da * jac));
          }
        }
      }
      return;
    }
  }
}

SurfaceGrid build_surface_grid(const HypersurfaceSpec& s, int res) {
  SurfaceGrid grid;
  grid.spec = s;
  for_each_node_impl(s, res, [&](const SurfaceNode& node) {
    grid.nodes.push_back(node);
    grid.area += node.w;
  });
  return grid;
}

void for_each_surface_node(const HypersurfaceSpec& s, int res,
                           const std::function<void(const SurfaceNode&)>& fn) {
  for_each_node_impl(s, res, fn);
}

EnergyCurveGrid intersect_sphere_bundle(const HypersurfaceSpec& s, int res) {
  EnergyCurveGrid grid;
  grid.spec = s;
  auto push = [&](const TubePoint& p, double w) {
    grid.nodes.push_back(make_node(s, p, w));
    grid.measure += w;
  };
  switch (s.kind) {
    case SurfaceKind::Vertical: {
      if (s.n == 1) {
        // Two points x = c, xi = +-1; |P grad F| = 1.
        push({Vec(s.c), Vec(1.0)}, 1.0);
        push({Vec(s.c), Vec(-1.0)}, 1.0);
        return grid;
      }
      VerticalChart ch = vertical_chart(s);
      double ds = ch.length / res, da = kTwoPi / res;
      // grad F = (e;0) is tangent-to-fiber free: |P_{T S*M} grad F| = |e|.
      double w = ds * da / ch.e_norm;
      for (int is = 0; is < res; ++is) {
        Vec x = ch.x0 + (is * ds) * ch.tangent;
        x = Vec(wrap_angle(x[0]), wrap_angle(x[1]));
        for (int ia = 0; ia < res; ++ia) {
          double al = ia * da;
          push({x, Vec(std::cos(al), std::sin(al))}, w);
        }
      }
      return grid;
    }
    case SurfaceKind::Tilted: {
      // Induced measure reduces exactly to dx1 * dalpha (the surface-area and
      // projected-gradient factors cancel for every tilt vector).
      double dx = kTwoPi / res, da = kTwoPi / res;
      for (int ix = 0; ix < res; ++ix) {
        double x1 = ix * dx;
        for (int ia = 0; ia < res; ++ia) {
          double al = ia * da;
          Vec xi(std::cos(al), std::sin(al));
          push({Vec(x1, wrap_angle(dot(s.a, xi) + s.c)), xi}, dx * da);
        }
      }
      return grid;
    }
    case SurfaceKind::TubeGraph: {
      if (s.delta == 0.0)
        throw std::invalid_argument("intersect_sphere_bundle: delta=0 graph coincides with S*M");
      if (s.g.terms.size() != 1 || s.g.terms[0].sin_c != 0.0 || s.g.terms[0].cos_c <= 0.0)
        throw std::invalid_argument("intersect_sphere_bundle: need a single-cosine graph");
      auto term = s.g.terms[0];
      int mj = 0, mv = 0;
      if (term.m[0] != 0 && term.m[1] == 0) {
        mj = 0;
        mv = term.m[0];
      } else if (term.m[1] != 0 && term.m[0] == 0) {
        mj = 1;
        mv = term.m[1];
      } else {
        throw std::invalid_argument("intersect_sphere_bundle: cosine must be one-variable");
      }
      int mabs = std::abs(mv);
      double dx = kTwoPi / res, da = kTwoPi / res;
      // Sheets: cos(m t) = 0 at t = (pi/2 + l*pi)/m; there |grad g| = |A m|.
      for (int l = 0; l < 2 * mabs; ++l) {
        double t = (0.5 * kPi + l * kPi) / mabs;
        double w = dx * da / (s.delta * term.cos_c * mabs);
        for (int io = 0; io < res; ++io) {
          double other = io * dx;
          Vec x = (mj == 0) ? Vec(t, other) : Vec(other, t);
          for (int ia = 0; ia < res; ++ia) {
            double al = ia * da;
            push({x, Vec(std::cos(al), std::sin(al))}, w);
          }
        }
      }
      return grid;
    }
  }
  return grid;
}

ConditionA condition_a_check(const HypersurfaceSpec& s, double tol, int res) {
  EnergyCurveGrid curve = intersect_sphere_bundle(s, res);
  if (curve.nodes.empty()) throw std::domain_error("condition_a_check: empty intersection");
  double margin = 1.0;
  for (const auto& node : curve.nodes) margin = std::min(margin, std::abs(std::cos(node.theta)));
  return {margin > tol, margin};
}

bool local_condition_check(const HypersurfaceSpec& s, double delta, int res) {
  EnergyCurveGrid curve = intersect_sphere_bundle(s, res);
  if (curve.nodes.empty()) throw std::domain_error("local_condition_check: empty intersection");
  const double half_pi = 0.5 * kPi;
  for (const auto& node : curve.nodes) {
    double d1 = std::hypot(node.theta - half_pi, node.phi - 0.0);
    double d2 = std::hypot(node.theta - half_pi, node.phi - kPi);
    if (d1 <= delta || d2 <= delta) return false;
  }
  return true;
}

SurfaceNode sample_node(const HypersurfaceSpec& s, double u1, double u2, double u3) {
  double r = 0.3 + 1.4 * u2;
  double al = kTwoPi * u3;
  switch (s.kind) {
    case SurfaceKind::Vertical: {
      if (s.n == 1) {
        double xi = (u3 < 0.5 ? -1.0 : 1.0) * r;
        return make_node(s, {Vec(s.c), Vec(xi)}, 0.0);
      }
      VerticalChart ch = vertical_chart(s);
      Vec x = ch.x0 + (u1 * ch.length) * ch.tangent;
      x = Vec(wrap_angle(x[0]), wrap_angle(x[1]));
      return make_node(s, {x, Vec(r * std::cos(al), r * std::sin(al))}, 0.0);
    }
    case SurfaceKind::Tilted: {
      Vec xi(r * std::cos(al), r * std::sin(al));
      return make_node(s, {Vec(kTwoPi * u1, wrap_angle(dot(s.a, xi) + s.c)), xi}, 0.0);
    }
    case SurfaceKind::TubeGraph: {
      Vec x(kTwoPi * u1, kTwoPi * u2);
      double rr = std::sqrt(1.0 + s.delta * s.g.eval(x));
      return make_node(s, {x, Vec(rr * std::cos(al), rr * std::sin(al))}, 0.0);
    }
  }
  throw std::logic_error("sample_node: unreachable");
}

LogComplex tangential_laplacian(const SurfaceNode& node, const Jet2& field_jet) {
  LogAccumulator acc;
  acc.add(jet_laplacian(field_jet));
  acc.add(jet_hess(field_jet, node.nu, node.nu), -1.0);
  acc.add(jet_dir(field_jet, node.nu), -node.H);
  return acc.total();
}

}  // namespace tube
