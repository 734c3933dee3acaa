#include "tube/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tube/fbi.hpp"
#include "tube/fit.hpp"
#include "tube/io.hpp"
#include "tube/modes.hpp"
#include "tube/rng.hpp"

namespace tube {
namespace {

std::string path_join(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

double wrap_pi(double t) {
  double w = std::remainder(t, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// --------------------------------------------------------------------------
// Config parsing.

void check_known_fields(const OrderedJson& j, const std::string& where,
                        std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown field \"" + it.key() + "\" in " + where);
  }
}

double as_number(const OrderedJson& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("field \"" + name + "\" must be a number");
  return j.get<double>();
}

long as_integer(const OrderedJson& j, const std::string& name) {
  if (!j.is_number_integer()) throw ConfigError("field \"" + name + "\" must be an integer");
  return j.get<long>();
}

std::string as_string(const OrderedJson& j, const std::string& name) {
  if (!j.is_string()) throw ConfigError("field \"" + name + "\" must be a string");
  return j.get<std::string>();
}

std::array<int, 2> as_int_pair(const OrderedJson& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("field \"" + name + "\" must be an array of two integers");
  return {static_cast<int>(as_integer(j[0], name)), static_cast<int>(as_integer(j[1], name))};
}

HypersurfaceSpec parse_surface(const OrderedJson& j, int dim) {
  if (!j.is_object()) throw ConfigError("field \"surface\" must be an object");
  if (!j.contains("kind")) throw ConfigError("config missing field \"surface.kind\"");
  const std::string kind = as_string(j.at("kind"), "surface.kind");
  double tau = 2.0;
  if (j.contains("tau")) {
    tau = as_number(j.at("tau"), "surface.tau");
    if (!(tau > 0.0)) throw ConfigError("field \"surface.tau\" must be positive");
  }
  if (kind == "vertical") {
    check_known_fields(j, "surface", {"kind", "e", "c", "tau"});
    std::array<int, 2> e{1, 0};
    if (j.contains("e")) e = as_int_pair(j.at("e"), "surface.e");
    double c = 0.0;
    if (j.contains("c")) c = as_number(j.at("c"), "surface.c");
    return vertical_surface(dim == 0 ? 2 : dim, e, c, tau);
  }
  if (kind == "tilted") {
    check_known_fields(j, "surface", {"kind", "a", "c", "tau"});
    if (dim == 1) throw ConfigError("surface kind \"tilted\" requires dim = 2");
    if (!j.contains("a")) throw ConfigError("config missing field \"surface.a\"");
    const OrderedJson& ja = j.at("a");
    if (!ja.is_array() || ja.size() != 2)
      throw ConfigError("field \"surface.a\" must be an array of two numbers");
    const Vec a(as_number(ja[0], "surface.a"), as_number(ja[1], "surface.a"));
    double c = 0.0;
    if (j.contains("c")) c = as_number(j.at("c"), "surface.c");
    return tilted_surface(a, c, tau);
  }
  if (kind == "tube-graph") {
    check_known_fields(j, "surface", {"kind", "delta", "g", "tau"});
    if (dim == 1) throw ConfigError("surface kind \"tube-graph\" requires dim = 2");
    if (!j.contains("delta")) throw ConfigError("config missing field \"surface.delta\"");
    const double delta = as_number(j.at("delta"), "surface.delta");
    TrigPoly g = cosine_poly({1, 0}, 1.0);
    if (j.contains("g")) {
      const OrderedJson& jg = j.at("g");
      if (!jg.is_array() || jg.empty())
        throw ConfigError("field \"surface.g\" must be a non-empty array of terms");
      g.terms.clear();
      for (const OrderedJson& jt : jg) {
        if (!jt.is_object()) throw ConfigError("entries of \"surface.g\" must be objects");
        check_known_fields(jt, "surface.g term", {"k", "amp"});
        if (!jt.contains("k")) throw ConfigError("config missing field \"surface.g[].k\"");
        if (!jt.contains("amp")) throw ConfigError("config missing field \"surface.g[].amp\"");
        TrigTerm term;
        term.m = as_int_pair(jt.at("k"), "surface.g[].k");
        term.cos_c = as_number(jt.at("amp"), "surface.g[].amp");
        term.sin_c = 0.0;
        g.terms.push_back(term);
      }
    }
    return tube_graph_surface(delta, g, tau);
  }
  throw ConfigError("unknown surface kind \"" + kind + "\"");
}

// --------------------------------------------------------------------------
// Per-kind parameter resolution.

std::vector<double> hs_or_default(const ExperimentConfig& cfg, std::vector<double> def) {
  return cfg.h_list.empty() ? std::move(def) : cfg.h_list;
}

// Frequencies are integer multiples of a pinned base mode, so admissible h
// values are constrained per kind; reject anything else loudly.
long integer_scale(double h, double base, const std::string& kind) {
  const double raw = 1.0 / (base * h);
  const long m = std::lround(raw);
  if (m < 1 || std::abs(raw - static_cast<double>(m)) > 1e-9 * std::max(1.0, raw))
    throw ConfigError("kind \"" + kind + "\" needs h = 1/(" +
                      (base == 1.0 ? std::string("integer")
                                   : std::to_string(static_cast<long>(base)) + " * integer") +
                      "), got h = " + format_full(h));
  return m;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "circle-example",  "wavefront",        "qer-convergence", "bounds-scaling",
      "ellipticity-scan", "general-position", "multiplier"};
  return kinds;
}

void apply_config_json(const std::string& json_text, ExperimentConfig& cfg,
                       bool require_kind) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_known_fields(j, "config",
                     {"kind", "dim", "h_list", "resolution", "seed", "out_dir", "ensemble",
                      "surface"});
  if (j.contains("kind")) {
    cfg.kind = as_string(j.at("kind"), "kind");
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
      throw ConfigError("unknown experiment kind \"" + cfg.kind + "\"");
  } else if (require_kind) {
    throw ConfigError("config missing field \"kind\"");
  }
  if (j.contains("dim")) {
    cfg.dim = static_cast<int>(as_integer(j.at("dim"), "dim"));
    if (cfg.dim != 1 && cfg.dim != 2)
      throw ConfigError("field \"dim\" must be 1 or 2");
  }
  if (j.contains("h_list")) {
    const OrderedJson& jh = j.at("h_list");
    if (!jh.is_array() || jh.empty())
      throw ConfigError("field \"h_list\" must be a non-empty array of numbers");
    cfg.h_list.clear();
    for (const OrderedJson& v : jh) cfg.h_list.push_back(as_number(v, "h_list"));
    for (size_t i = 0; i < cfg.h_list.size(); ++i) {
      if (!(cfg.h_list[i] > 0.0)) throw ConfigError("field \"h_list\" entries must be positive");
      if (i && !(cfg.h_list[i] < cfg.h_list[i - 1]))
        throw ConfigError("field \"h_list\" must be strictly decreasing");
    }
  }
  if (j.contains("resolution")) {
    cfg.resolution = static_cast<int>(as_integer(j.at("resolution"), "resolution"));
    if (cfg.resolution < 0) throw ConfigError("field \"resolution\" must be non-negative");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ConfigError("field \"seed\" must be a non-negative integer");
    const long long sv = j.at("seed").get<long long>();
    if (sv < 0) throw ConfigError("field \"seed\" must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("out_dir")) cfg.out_dir = as_string(j.at("out_dir"), "out_dir");
  if (j.contains("ensemble")) {
    const OrderedJson& je = j.at("ensemble");
    if (!je.is_object()) throw ConfigError("field \"ensemble\" must be an object");
    check_known_fields(je, "ensemble", {"shell_r2", "draws", "seed"});
    if (je.contains("shell_r2")) {
      cfg.ensemble.shell_r2 = as_integer(je.at("shell_r2"), "ensemble.shell_r2");
      if (cfg.ensemble.shell_r2 < 1)
        throw ConfigError("field \"ensemble.shell_r2\" must be positive");
    }
    if (je.contains("draws")) {
      cfg.ensemble.draws = static_cast<int>(as_integer(je.at("draws"), "ensemble.draws"));
      if (cfg.ensemble.draws < 1) throw ConfigError("field \"ensemble.draws\" must be positive");
    }
    if (je.contains("seed"))
      cfg.ensemble.seed = static_cast<std::uint64_t>(as_integer(je.at("seed"), "ensemble.seed"));
  }
  if (j.contains("surface")) {
    cfg.surface = parse_surface(j.at("surface"), cfg.dim);
    cfg.has_surface = true;
  }
}

void load_config_file(const std::string& path, ExperimentConfig& cfg, bool require_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_json(ss.str(), cfg, require_kind);
}

std::string resolve_out_dir(const std::string& out_dir) {
  const char* root = std::getenv("TUBELAB_OUT_ROOT");
  if (root && root[0] != '\0' && !out_dir.empty() && out_dir.front() != '/')
    return path_join(root, out_dir);
  return out_dir;
}

void ExperimentOutcome::add(const std::string& name, bool pass, const std::string& detail) {
  criteria.push_back({name, pass, detail});
  ok = ok && pass;
}

void emit_report(const QERReport& rep, const std::string& csv_path,
                 const std::string& json_path) {
  CsvWriter csv({"h", "term1_log", "term2_log", "scaled_lhs", "rhs", "norm",
                 "weighted_norm_log", "ratio", "imag_rel", "norm_slope", "norm_r2",
                 "norm_accepted"});
  for (const QERRow& r : rep.rows) {
    csv.add_row_raw({format_full(r.h), format_full(r.term1_log), format_full(r.term2_log),
                     format_full(r.scaled_lhs), format_full(r.rhs), format_full(r.norm),
                     format_full(r.weighted_norm_log), format_full(r.ratio),
                     format_full(r.imag_rel), format_full(rep.norm_fit.slope),
                     format_full(rep.norm_fit.r2), rep.norm_fit.accepted ? "1" : "0"});
  }
  csv.write_file(csv_path);

  OrderedJson js;
  js["ensemble"] = rep.ensemble;
  js["points"] = rep.rows.size();
  js["norm_fit"] = {{"slope", rep.norm_fit.slope},
                    {"intercept", rep.norm_fit.intercept},
                    {"r2", rep.norm_fit.r2},
                    {"residual_norm", rep.norm_fit.residual_norm},
                    {"data_range", rep.norm_fit.data_range},
                    {"accepted", rep.norm_fit.accepted}};
  js["gap_monotone"] = rep.gap_monotone;
  js["final_gap"] = rep.final_gap;
  js["min_norm"] = rep.min_norm;
  js["median_norm"] = rep.median_norm;
  js["rhs_liouville"] = rep.rhs_liouville;
  js["rhs_defect_avg"] = rep.rhs_defect_avg;
  js["all_norms"] = rep.all_norms;
  write_json_file(json_path, js);
}

// ==========================================================================
// Closed-form transform table on the circle.

void circle_closed_form_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome) {
  ensure_dir(out);
  std::vector<long> ks;
  for (double h : hs_or_default(cfg, {0.1, 0.025}))
    ks.push_back(integer_scale(h, 1.0, "circle-example"));

  OrderedJson summary;
  const int nx = 200, nxi = 200;
  const double xi_lo = -2.7, xi_hi = 2.7;
  for (size_t ki = 0; ki < ks.size(); ++ki) {
    const long k = ks[ki];
    // Unit-coefficient mode of frequency -k; its transform magnitude is a
    // Gaussian ridge e^{-k(1+xi)^2/2} with linear phase -k x.
    ModeSum u = single_mode(1, {static_cast<int>(-k), 0}, false);
    double max_dlog = 0.0, max_dph = 0.0;
    CsvWriter table({"x", "xi", "logmag", "phase", "logmag_model", "phase_model"});
    for (int i = 0; i < nx; ++i) {
      const double x = 2.0 * kPi * i / nx;
      for (int jj = 0; jj < nxi; ++jj) {
        const double xi = xi_lo + (xi_hi - xi_lo) * jj / (nxi - 1);
        const LogComplex t = eval_T(u, TubePoint{Vec(x), Vec(xi)});
        const double lm_model = -0.5 * k * (1.0 + xi) * (1.0 + xi);
        const double ph_model = -static_cast<double>(k) * x;
        max_dlog = std::max(max_dlog,
                            std::abs(t.logmag - lm_model) / std::max(1.0, std::abs(lm_model)));
        max_dph = std::max(max_dph, std::abs(wrap_pi(t.phase - ph_model)) /
                                        std::max(1.0, std::abs(ph_model)));
        if (ki == 0)
          table.add_row({x, xi, t.logmag, wrap_pi(t.phase), lm_model, wrap_pi(ph_model)});
      }
    }
    if (ki == 0) table.write_file(path_join(out, "circle_table_k" + std::to_string(k) + ".csv"));
    summary["k" + std::to_string(k)] = {{"max_logmag_rel_err", max_dlog},
                                        {"max_phase_rel_err", max_dph}};
    outcome.add("closed_form.table_k" + std::to_string(k),
                max_dlog <= 1e-12 && max_dph <= 1e-12,
                "max logmag rel err " + format_full(max_dlog) + ", max phase rel err " +
                    format_full(max_dph));
  }
  write_json_file(path_join(out, "circle_table_summary.json"), summary);
}

// ==========================================================================
// Phase-space transform of the circle mode: peak location and Gaussian shape.

void circle_ft_section(const ExperimentConfig& cfg, const std::string& out,
                       ExperimentOutcome& outcome) {
  ensure_dir(out);
  std::vector<long> ks;
  for (double h : hs_or_default(cfg, {0.1, 0.025}))
    ks.push_back(integer_scale(h, 1.0, "circle-example"));

  OrderedJson summary;
  for (const long k : ks) {
    const double h = 1.0 / static_cast<double>(k);
    ModeSum u = single_mode(1, {static_cast<int>(-k), 0}, false);

    // Base-axis profile over the full period (the base direction is compact,
    // so no window is needed): X(x*) = sum_j e^{i(-k - x*/h) x_j} dx.
    const int nx = 200;
    const double dx = 2.0 * kPi / nx;
    const double dual_step = 0.05, dual_range = 1.5;
    const int nd = 2 * static_cast<int>(std::round(dual_range / dual_step)) + 1;
    const DualAxis dual{-dual_range, dual_step, nd};
    std::vector<double> xmag(static_cast<size_t>(nd), 0.0);
    for (int m = 0; m < nd; ++m) {
      const double freq = -static_cast<double>(k) - dual.coord(m) / h;
      std::complex<double> acc{0.0, 0.0};
      for (int j = 0; j < nx; ++j) acc += std::polar(dx, freq * (dx * j));
      xmag[static_cast<size_t>(m)] = std::abs(acc);
    }

    // Fiber-axis profile: transform magnitudes taken from the actual
    // evaluator along x = 0, rescaled by the running maximum so the window
    // quadrature stays in double range. The window is centered on the
    // concentration point xi = -1.
    const double wc = -1.0, ww = 1.5, wflat = 1.0;
    const double dt = std::min(std::sqrt(h) / 4.0, h);
    const int nt = static_cast<int>(std::ceil(2.0 * ww / dt)) + 1;
    std::vector<double> tg(static_cast<size_t>(nt)), lm(static_cast<size_t>(nt));
    double lm_max = kNegInf;
    for (int i = 0; i < nt; ++i) {
      tg[static_cast<size_t>(i)] = wc - ww + 2.0 * ww * i / (nt - 1);
      const LogComplex v = eval_T(u, TubePoint{Vec(0.0), Vec(tg[static_cast<size_t>(i)])});
      lm[static_cast<size_t>(i)] = v.logmag;
      lm_max = std::max(lm_max, v.logmag);
    }
    auto xi_profile = [&](double xistar) {
      std::complex<double> acc{0.0, 0.0};
      for (int i = 0; i < nt; ++i) {
        const double t = tg[static_cast<size_t>(i)];
        const double w = bump_window(t - wc, ww, wflat);
        if (w == 0.0) continue;
        acc += std::polar(w * std::exp(lm[static_cast<size_t>(i)] - lm_max) * dt,
                          -t * xistar / h);
      }
      return acc;
    };
    std::vector<double> ximag(static_cast<size_t>(nd), 0.0);
    for (int m = 0; m < nd; ++m) ximag[static_cast<size_t>(m)] = std::abs(xi_profile(dual.coord(m)));

    // Peak cell of the separable product on the coarse dual grid.
    int ix_peak = 0, ixi_peak = 0;
    for (int m = 1; m < nd; ++m) {
      if (xmag[static_cast<size_t>(m)] > xmag[static_cast<size_t>(ix_peak)]) ix_peak = m;
      if (ximag[static_cast<size_t>(m)] > ximag[static_cast<size_t>(ixi_peak)]) ixi_peak = m;
    }
    const double xstar_peak = dual.coord(ix_peak);
    const double xistar_peak = dual.coord(ixi_peak);
    const bool peak_ok = std::abs(xstar_peak - (-1.0)) <= dual_step + 1e-12 &&
                         std::abs(xistar_peak) <= dual_step + 1e-12;
    outcome.add("ft.peak_cell_k" + std::to_string(k), peak_ok,
                "peak at x* = " + format_full(xstar_peak) +
                    ", xi* = " + format_full(xistar_peak));

    // Gaussian shape of the fiber profile on a fine sqrt(h)-scaled grid.
    const int nfine = 81;
    CsvWriter prof({"xi_star", "mag_rel", "model_rel"});
    double num = 0.0, den = 0.0, mmax = 0.0;
    std::vector<double> fine(static_cast<size_t>(nfine));
    for (int m = 0; m < nfine; ++m) {
      const double xistar = -4.0 * std::sqrt(h) + 8.0 * std::sqrt(h) * m / (nfine - 1);
      fine[static_cast<size_t>(m)] = std::abs(xi_profile(xistar));
      mmax = std::max(mmax, fine[static_cast<size_t>(m)]);
    }
    for (int m = 0; m < nfine; ++m) {
      const double xistar = -4.0 * std::sqrt(h) + 8.0 * std::sqrt(h) * m / (nfine - 1);
      const double p = fine[static_cast<size_t>(m)] / mmax;
      const double g = std::exp(-xistar * xistar / (2.0 * h));
      num += (p - g) * (p - g);
      den += g * g;
      prof.add_row({xistar, p, g});
    }
    const double shape_err = std::sqrt(num / den);
    prof.write_file(path_join(out, "circle_ft_profile_k" + std::to_string(k) + ".csv"));
    outcome.add("ft.gaussian_shape_k" + std::to_string(k), shape_err < 0.02,
                "fiber profile L2 shape error " + format_full(shape_err));
    summary["k" + std::to_string(k)] = {{"xstar_peak", xstar_peak},
                                        {"xistar_peak", xistar_peak},
                                        {"shape_err", shape_err}};
  }
  write_json_file(path_join(out, "circle_ft_summary.json"), summary);
}

// ==========================================================================
// Holomorphy residual suite with conjugate-continuation negative control.

void holomorphy_section(const ExperimentConfig& cfg, const std::string& out,
                        ExperimentOutcome& outcome) {
  ensure_dir(out);
  const CounterRng root(cfg.seed, 0x484F4C4FULL);
  const int cases = 240;
  double max_res = 0.0, min_ctrl = 1e300;
  CsvWriter csv({"case", "n", "modes", "h", "residual", "control"});
  for (int t = 0; t < cases; ++t) {
    const CounterRng rng = root.split(static_cast<std::uint64_t>(t));
    std::uint64_t ctr = 0;
    auto U = [&]() { return rng.uniform(ctr++); };
    const int n = (cfg.dim == 1 || cfg.dim == 2) ? cfg.dim : (t % 2) + 1;

    ModeSum u;
    if (t % 2 == 0) {
      // Single random nonzero mode.
      std::array<int, 2> k{0, 0};
      do {
        k[0] = static_cast<int>(std::floor(U() * 17.0)) - 8;
        k[1] = n == 2 ? static_cast<int>(std::floor(U() * 17.0)) - 8 : 0;
      } while (k[0] == 0 && k[1] == 0);
      u = single_mode(n, k);
    } else {
      // One random draw from a fixed lattice shell.
      EnsembleSpec spec;
      spec.n = n;
      spec.r2 = n == 2 ? 25 : 49;
      spec.draws = 1;
      spec.seed = rng.bits(1000);
      u = make_shell_ensemble(spec).front();
    }
    const double r = 1.7 * U();
    const double ang = 2.0 * kPi * U();
    const Vec x = n == 2 ? Vec(2.0 * kPi * U(), 2.0 * kPi * U()) : Vec(2.0 * kPi * U());
    const Vec xi = n == 2 ? Vec(r * std::cos(ang), r * std::sin(ang)) : Vec(r * std::cos(ang));
    const TubePoint p{x, xi};
    const double res = holomorphy_residual(u, p);
    const double ctrl = holomorphy_residual(u, p, Continuation::ConjugateProbe);
    max_res = std::max(max_res, res);
    min_ctrl = std::min(min_ctrl, ctrl);
    csv.add_row({static_cast<double>(t), static_cast<double>(n),
                 static_cast<double>(u.modes.size()), u.h, res, ctrl});
  }
  csv.write_file(path_join(out, "holomorphy.csv"));
  write_json_file(path_join(out, "holomorphy_summary.json"),
                  OrderedJson{{"cases", cases},
                              {"max_residual", max_res},
                              {"min_control", min_ctrl}});
  outcome.add("holomorphy.residual", max_res < 1e-12,
              "max residual " + format_full(max_res) + " over " + std::to_string(cases) +
                  " random evaluations");
  outcome.add("holomorphy.conjugate_control", min_ctrl >= 1e-2,
              "min conjugate-probe residual " + format_full(min_ctrl));
}

// ==========================================================================
// Wavefront containment: ambient windowed transforms and the restricted
// transform on a base-vertical member.

namespace {

struct ContainRadii {
  double max_dist = 0.0;
  double mean_dist = 0.0;
  long points = 0;
  double crude_max = 0.0;
};

// Separable ambient scan for one lattice mode: full-period profiles on the
// base axes, bump-windowed profiles on the fiber axes across a lattice of
// fiber window centers.
ContainRadii ambient_scan(const ModeSum& u, double threshold_rel) {
  const double h = u.h;
  const std::array<int, 2> k = u.modes.front().k;
  const Vec khat(h * k[0], h * k[1]);

  const double dual_step = 0.05, dual_range = 1.5;
  const int nd = 2 * static_cast<int>(std::round(dual_range / dual_step)) + 1;
  const DualAxis dual{-dual_range, dual_step, nd};

  // Base-axis profiles over the full period.
  const int nx = static_cast<int>(std::ceil(6.0 / h));
  const double dx = 2.0 * kPi / nx;
  std::array<std::vector<double>, 2> xmag;
  for (int a = 0; a < 2; ++a) {
    xmag[static_cast<size_t>(a)].assign(static_cast<size_t>(nd), 0.0);
    for (int m = 0; m < nd; ++m) {
      const double freq = k[static_cast<size_t>(a)] - dual.coord(m) / h;
      std::complex<double> acc{0.0, 0.0};
      for (int j = 0; j < nx; ++j) acc += std::polar(dx, freq * (dx * j));
      xmag[static_cast<size_t>(a)][static_cast<size_t>(m)] = std::abs(acc);
    }
  }
  const auto vmax = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  };

  // Fiber-axis profiles: coherent-state windows of width proportional to
  // sqrt(h) (a fixed width would keep far centers hot at h-independent
  // distances, since the bump value at the Gaussian ridge does not decay
  // with h), memoized per distinct 1-D center value. The center lattice
  // scales with the window width, and the field of view covers the hot
  // reach around the unit shell while window supports stay inside the
  // fiber disc.
  const double ww = 1.5 * std::sqrt(h);
  const double cs = ww / 4.0;
  const double cmax = std::min(2.0 - ww - 0.05, 1.0 + 3.0 * std::sqrt(h));
  const int nc = static_cast<int>(std::floor(cmax / cs));
  const int nvals = 2 * nc + 1;
  const double dt = std::min(std::sqrt(h) / 4.0, h / 2.0);
  const int ntw = 2 * static_cast<int>(std::ceil(ww / dt)) + 1;
  std::array<std::vector<std::vector<double>>, 2> pmag;
  for (int a = 0; a < 2; ++a) {
    pmag[static_cast<size_t>(a)].assign(static_cast<size_t>(nvals),
                                        std::vector<double>(static_cast<size_t>(nd), 0.0));
    for (int iv = 0; iv < nvals; ++iv) {
      const double c = cs * (iv - nc);
      for (int m = 0; m < nd; ++m) {
        const double f = dual.coord(m);
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < ntw; ++i) {
          const double t = c - ww + 2.0 * ww * i / (ntw - 1);
          const double w = bump_window(t - c, ww);
          if (w == 0.0) continue;
          const double gexp =
              (khat[a] * t - 0.5 * t * t - 0.5 * khat[a] * khat[a]) / h;
          acc += std::polar(w * std::exp(gexp) * (2.0 * ww / (ntw - 1)), -t * f / h);
        }
        pmag[static_cast<size_t>(a)][static_cast<size_t>(iv)][static_cast<size_t>(m)] =
            std::abs(acc);
      }
    }
  }

  // Window peaks are exact products of per-axis maxima (separable field).
  const double mx = vmax(xmag[0]) * vmax(xmag[1]);
  std::vector<double> p1max(static_cast<size_t>(nvals)), p2max(static_cast<size_t>(nvals));
  for (int iv = 0; iv < nvals; ++iv) {
    p1max[static_cast<size_t>(iv)] = vmax(pmag[0][static_cast<size_t>(iv)]);
    p2max[static_cast<size_t>(iv)] = vmax(pmag[1][static_cast<size_t>(iv)]);
  }
  double peak = 0.0;
  for (int i1 = -nc; i1 <= nc; ++i1)
    for (int i2 = -nc; i2 <= nc; ++i2) {
      const double c1 = cs * i1, c2 = cs * i2;
      if (c1 * c1 + c2 * c2 > cmax * cmax + 1e-12) continue;
      peak = std::max(peak, mx * p1max[static_cast<size_t>(i1 + nc)] *
                                p2max[static_cast<size_t>(i2 + nc)]);
    }

  ContainRadii out;
  const double cut = threshold_rel * peak;
  double sum_d = 0.0;
  for (int i1 = -nc; i1 <= nc; ++i1)
    for (int i2 = -nc; i2 <= nc; ++i2) {
      const double c1 = cs * i1, c2 = cs * i2;
      if (c1 * c1 + c2 * c2 > cmax * cmax + 1e-12) continue;
      const double wpeak =
          mx * p1max[static_cast<size_t>(i1 + nc)] * p2max[static_cast<size_t>(i2 + nc)];
      if (wpeak < cut) continue;
      const Vec xic(c1, c2);
      scan_superthreshold(
          {xmag[0], xmag[1], pmag[0][static_cast<size_t>(i1 + nc)],
           pmag[1][static_cast<size_t>(i2 + nc)]},
          cut / wpeak,
          [&](const std::vector<int>& idx, double) {
            const Vec xstar(dual.coord(idx[0]), dual.coord(idx[1]));
            const Vec xistar(dual.coord(idx[2]), dual.coord(idx[3]));
            const double d = dist_to_wavefront_set(xic, xstar, xistar);
            out.max_dist = std::max(out.max_dist, d);
            out.crude_max = std::max(out.crude_max, dist_to_crude_set(xic, xstar, xistar));
            sum_d += d;
            ++out.points;
          });
    }
  if (out.points) out.mean_dist = sum_d / static_cast<double>(out.points);
  return out;
}

}  // namespace

void wavefront_containment_section(const ExperimentConfig& cfg, const std::string& out,
                                   ExperimentOutcome& outcome) {
  ensure_dir(out);
  const std::vector<double> hs_in = hs_or_default(cfg, {0.05, 0.025, 0.0125, 0.00625});
  if (hs_in.size() < 2)
    throw ConfigError("kind \"wavefront\" needs at least two h values for the exponent fit");
  std::vector<long> mults;
  std::vector<double> hs;
  for (double h : hs_in) {
    const long m = integer_scale(h, 10.0, "wavefront");
    mults.push_back(m);
    hs.push_back(1.0 / (10.0 * static_cast<double>(m)));
  }
  const HypersurfaceSpec vs =
      (cfg.has_surface && cfg.surface.kind == SurfaceKind::Vertical)
          ? cfg.surface
          : vertical_surface(2, {1, 0}, 0.0);
  const double bound_c = 4.2;  // containment radius bound, units of sqrt(h)

  CsvWriter csv({"h", "tube_radius", "tube_mean", "tube_points", "tube_radius_1pct",
                 "crude_radius", "sigma_radius", "sigma_mean", "sigma_points",
                 "sigma_base_dist", "sigma_peak"});
  std::vector<double> log_h, log_tube, log_sigma;
  bool tube_bound_ok = true, sigma_bound_ok = true, base_ok = true;
  for (size_t i = 0; i < hs.size(); ++i) {
    const double h = hs[i];
    const ModeSum u =
        single_mode(2, {static_cast<int>(6 * mults[i]), static_cast<int>(8 * mults[i])});
    const ContainRadii tube = ambient_scan(u, 0.1);
    const ContainRadii tube01 = ambient_scan(u, 0.01);
    const SigmaContainment sc = wf_sigma_containment(u, vs, 0.1);
    csv.add_row({h, tube.max_dist, tube.mean_dist, static_cast<double>(tube.points),
                 tube01.max_dist, tube.crude_max, sc.dual_stats.max_dist,
                 sc.dual_stats.mean_dist, static_cast<double>(sc.points),
                 sc.max_base_shell_dist, sc.peak_mag});
    log_h.push_back(std::log(h));
    log_tube.push_back(std::log(tube.max_dist));
    log_sigma.push_back(std::log(sc.dual_stats.max_dist));
    tube_bound_ok = tube_bound_ok && tube.max_dist <= bound_c * std::sqrt(h);
    sigma_bound_ok = sigma_bound_ok && sc.dual_stats.max_dist <= bound_c * std::sqrt(h);
    base_ok = base_ok && sc.max_base_shell_dist <= bound_c * std::sqrt(h);
  }
  csv.write_file(path_join(out, "wavefront_containment.csv"));

  const LineFit tube_fit = fit_line(log_h, log_tube);
  const LineFit sigma_fit = fit_line(log_h, log_sigma);
  write_json_file(
      path_join(out, "wavefront_summary.json"),
      OrderedJson{{"radius_bound_sqrt_h", bound_c},
                  {"tube_fit",
                   {{"slope", tube_fit.slope}, {"r2", tube_fit.r2},
                    {"accepted", tube_fit.accepted}}},
                  {"sigma_fit",
                   {{"slope", sigma_fit.slope}, {"r2", sigma_fit.r2},
                    {"accepted", sigma_fit.accepted}}}});

  outcome.add("wavefront.tube_radius_bound", tube_bound_ok,
              "ambient containment radii within " + format_full(bound_c) + " sqrt(h)");
  outcome.add("wavefront.tube_exponent",
              tube_fit.accepted && tube_fit.slope >= 0.4 && tube_fit.slope <= 0.6,
              "ambient radius exponent " + format_full(tube_fit.slope));
  outcome.add("wavefront.sigma_radius_bound", sigma_bound_ok,
              "restricted containment radii within " + format_full(bound_c) + " sqrt(h)");
  outcome.add("wavefront.sigma_exponent",
              sigma_fit.accepted && sigma_fit.slope >= 0.4 && sigma_fit.slope <= 0.6,
              "restricted radius exponent " + format_full(sigma_fit.slope));
  outcome.add("wavefront.sigma_base_shell", base_ok,
              "hot window centers within " + format_full(bound_c) +
                  " sqrt(h) of the unit shell");

  // Flowed projections of the model set: the chart projection absorbs the
  // flow on flat members (asserted inside flow_out_set); record the samples.
  CsvWriter fcsv({"surface", "sbase", "xi1", "xi2", "flow_time", "dual_s", "dual_xi1",
                  "dual_xi2"});
  const HypersurfaceSpec ts = tilted_surface(Vec(0.2, 0.1), 0.0);
  for (const HypersurfaceSpec* sp : {&vs, &ts}) {
    const FlowOutSet fo = flow_out_set(*sp, 12);
    for (const FlowOutSample& smp : fo.samples)
      fcsv.add_row_raw({sp->kind == SurfaceKind::Vertical ? "vertical" : "tilted",
                        format_full(smp.sbase), format_full(smp.xi[0]),
                        format_full(smp.xi[1]), format_full(smp.flow_time),
                        format_full(smp.dual_s), format_full(smp.dual_xi[0]),
                        format_full(smp.dual_xi[1])});
  }
  fcsv.write_file(path_join(out, "flow_out.csv"));
}

// ==========================================================================
// Off-shell energy decay of the calibrated transform.

void energy_localization_section(const ExperimentConfig& cfg, const std::string& out,
                                 ExperimentOutcome& outcome) {
  ensure_dir(out);
  const std::vector<double> hs_in = hs_or_default(cfg, {0.05, 0.025, 0.0125, 0.00625});
  if (hs_in.size() < 2)
    throw ConfigError("kind \"wavefront\" needs at least two h values for the decay fit");
  const int res = cfg.resolution > 0 ? cfg.resolution : 64;
  const double eps = 0.25;

  CsvWriter csv({"h", "off_shell_mass", "log_mass"});
  std::vector<double> inv_h, log_mass;
  for (double hreq : hs_in) {
    const long m = integer_scale(hreq, 10.0, "wavefront");
    const double h = 1.0 / (10.0 * static_cast<double>(m));
    const ModeSum u = single_mode(2, {static_cast<int>(6 * m), static_cast<int>(8 * m)});
    const double mass = energy_mass_off_shell(u, eps, 2.0, res);
    csv.add_row({h, mass, std::log(mass)});
    inv_h.push_back(1.0 / h);
    log_mass.push_back(std::log(mass));
  }
  csv.write_file(path_join(out, "energy_localization.csv"));
  const LineFit fit = fit_line(inv_h, log_mass);
  write_json_file(path_join(out, "energy_summary.json"),
                  OrderedJson{{"eps", eps},
                              {"slope", fit.slope},
                              {"intercept", fit.intercept},
                              {"r2", fit.r2},
                              {"accepted", fit.accepted}});
  outcome.add("energy.exponential_decay", fit.slope < 0.0 && fit.r2 > 0.99,
              "log off-shell mass vs 1/h: slope " + format_full(fit.slope) + ", R^2 " +
                  format_full(fit.r2));
}

// ==========================================================================
// Pointwise identity suite on random members, modes, and points.

void identity_suite_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome) {
  ensure_dir(out);
  const CounterRng root(cfg.seed, 0x49444E54ULL);
  const int tuples = 1000;
  const double tol = 1e-11;
  double max_cr = 0.0, max_r = 0.0, max_y = 0.0, max_norm = 0.0;
  CsvWriter csv({"tuple", "n", "surface", "h", "cr", "neumann", "commutator", "norm_identity"});

  const std::array<std::array<int, 2>, 5> ever{{{1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, -1}}};
  for (int t = 0; t < tuples; ++t) {
    const CounterRng rng = root.split(static_cast<std::uint64_t>(t));
    std::uint64_t ctr = 0;
    auto U = [&]() { return rng.uniform(ctr++); };
    const int n = (t % 2) + 1;

    // Random mode content on one shell.
    ModeSum u;
    const int variant = t % 3;
    if (variant == 0) {
      std::array<int, 2> k{0, 0};
      do {
        k[0] = static_cast<int>(std::floor(U() * 13.0)) - 6;
        k[1] = n == 2 ? static_cast<int>(std::floor(U() * 13.0)) - 6 : 0;
      } while (k[0] == 0 && k[1] == 0);
      u = single_mode(n, k);
      u.modes[0].coeff = std::complex<double>(2.0 * U() - 1.0, 2.0 * U() - 1.0);
    } else if (variant == 1) {
      std::array<int, 2> k{1 + static_cast<int>(std::floor(U() * 5.0)), 0};
      if (n == 2) k[1] = static_cast<int>(std::floor(U() * 5.0)) - 2;
      u = single_mode(n, k);
      u.modes[0].coeff = std::complex<double>(2.0 * U() - 1.0, 2.0 * U() - 1.0);
      Mode m2;
      m2.k = {-k[0], -k[1]};
      m2.coeff = std::complex<double>(2.0 * U() - 1.0, 2.0 * U() - 1.0);
      u.modes.push_back(m2);
    } else {
      EnsembleSpec spec;
      spec.n = n;
      spec.r2 = n == 2 ? 25 : 16;
      spec.draws = 1;
      spec.seed = rng.bits(2000);
      u = make_shell_ensemble(spec).front();
    }
    // Independent random h, log-uniform on [1/80, 1/5].
    u.h = std::exp(std::log(1.0 / 80.0) + U() * std::log(16.0));

    // Random member of the family.
    HypersurfaceSpec s;
    std::string sname;
    if (n == 1) {
      s = vertical_surface(1, {1, 0}, 2.0 * kPi * U());
      sname = "vertical";
    } else {
      const int skind = (t / 2) % 3;
      if (skind == 0) {
        s = vertical_surface(2, ever[static_cast<size_t>(t) % ever.size()], 2.0 * kPi * U());
        sname = "vertical";
      } else if (skind == 1) {
        s = tilted_surface(Vec(0.7 * (U() - 0.5), 0.7 * (U() - 0.5)), 2.0 * kPi * U());
        sname = "tilted";
      } else {
        const std::array<std::array<int, 2>, 3> gs{{{1, 0}, {0, 1}, {1, 1}}};
        s = tube_graph_surface(0.9 * (U() - 0.5),
                               cosine_poly(gs[static_cast<size_t>(t / 6) % 3], 1.0));
        sname = "tube-graph";
      }
    }

    const SurfaceNode node = sample_node(s, U(), U(), U());
    const double rc = cr_residual(u, s, node.p);
    const double rr = r_identity_residual(u, s, node.p);
    const double ry = y_decomposition_residual(u, s, node.p);

    // Norm identity: the weighted and calibrated restriction norms agree
    // after removing the e^{1/h} scale, at any quadrature resolution.
    const int res = n == 2 ? 20 : 48;
    const double wlog = weighted_norm_log(u, s, res);
    const double rn = restriction_norm(u, s, res);
    const double nid =
        std::abs(wlog - (2.0 * std::log(rn) + 1.0 / u.h)) / std::max(1.0, std::abs(wlog));

    max_cr = std::max(max_cr, rc);
    max_r = std::max(max_r, rr);
    max_y = std::max(max_y, ry);
    max_norm = std::max(max_norm, nid);
    csv.add_row_raw({std::to_string(t), std::to_string(n), sname, format_full(u.h),
                     format_full(rc), format_full(rr), format_full(ry), format_full(nid)});
  }
  csv.write_file(path_join(out, "identity_residuals.csv"));
  write_json_file(path_join(out, "identity_summary.json"),
                  OrderedJson{{"tuples", tuples},
                              {"max_cr", max_cr},
                              {"max_neumann", max_r},
                              {"max_commutator", max_y},
                              {"max_norm_identity", max_norm}});
  outcome.add("identities.cauchy_riemann", max_cr < tol, "max residual " + format_full(max_cr));
  outcome.add("identities.neumann_factor", max_r < tol, "max residual " + format_full(max_r));
  outcome.add("identities.weight_commutator", max_y < tol,
              "max residual " + format_full(max_y));
  outcome.add("identities.norm_scale", max_norm < tol,
              "max relative defect " + format_full(max_norm));
}

// ==========================================================================
// Cauchy-data functional: single-mode convergence to the slice reference.

void defect_convergence_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome) {
  ensure_dir(out);
  const std::vector<double> hs_in = hs_or_default(cfg, {0.2, 0.1, 0.05, 0.025, 0.0125});
  if (hs_in.size() < 2)
    throw ConfigError("kind \"qer-convergence\" needs at least two h values");
  std::vector<double> hs;
  for (double h : hs_in) hs.push_back(1.0 / static_cast<double>(integer_scale(h, 1.0, "qer-convergence")));

  const HypersurfaceSpec s = (cfg.has_surface && cfg.surface.kind != SurfaceKind::TubeGraph)
                                 ? cfg.surface
                                 : vertical_surface(2, {1, 0}, 0.0);
  ScalingInput in;
  in.hs = hs;
  in.ensemble = false;
  in.family = [](double h) {
    const int m = static_cast<int>(std::lround(1.0 / h));
    return std::vector<ModeSum>{single_mode(2, {m, 0})};
  };
  const QERReport rep = scaling_experiment(in, s, unit_weight);
  emit_report(rep, path_join(out, "qer_single_mode.csv"),
              path_join(out, "qer_single_mode_summary.json"));
  outcome.add("qer.single_mode_gap_monotone", rep.gap_monotone,
              "|lhs/rhs - 1| decreasing across the h sweep");
  outcome.add("qer.single_mode_final_gap", rep.final_gap < 0.10,
              "final |lhs/rhs - 1| = " + format_full(rep.final_gap));
}

// ==========================================================================
// Cauchy-data functional: shell-ensemble mean against the energy-curve
// reference at fixed h.

void ensemble_reference_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome) {
  ensure_dir(out);
  const long r2 = cfg.ensemble.shell_r2 > 0 ? cfg.ensemble.shell_r2 : 25;
  const int draws = cfg.ensemble.draws > 0 ? cfg.ensemble.draws : 64;
  const HypersurfaceSpec s = (cfg.has_surface && cfg.surface.kind != SurfaceKind::TubeGraph)
                                 ? cfg.surface
                                 : vertical_surface(2, {1, 0}, 0.0);
  const std::vector<std::array<int, 2>> ks = shell_points(2, static_cast<int>(r2));
  if (ks.empty())
    throw ConfigError("ensemble.shell_r2 = " + std::to_string(r2) + " has no lattice points");
  const double h = 1.0 / std::sqrt(static_cast<double>(r2));

  EnsembleSpec spec;
  spec.n = 2;
  spec.r2 = static_cast<int>(r2);
  spec.draws = draws;
  spec.seed = cfg.ensemble.seed;
  const std::vector<ModeSum> ens = make_shell_ensemble(spec);

  const CauchyGram gram = cauchy_gram(ks, 2, h, s, unit_weight, surface_res_for(h));
  CsvWriter csv({"draw", "scaled_lhs", "restriction_norm"});
  double mean = 0.0;
  for (int d = 0; d < draws; ++d) {
    const std::vector<std::complex<double>> c = mode_coefficients(ens[static_cast<size_t>(d)], ks);
    const double lhs = (gram_apply(gram.t1, c) + gram_apply(gram.t2, c)).real();
    const double nrm = std::sqrt(std::max(0.0, gram_apply(gram.norm, c).real()));
    mean += lhs;
    csv.add_row({static_cast<double>(d), lhs, nrm});
  }
  mean /= static_cast<double>(draws);
  csv.write_file(path_join(out, "qer_ensemble_draws.csv"));

  const double rhs = qer_rhs(s, unit_weight, 192);
  // Shell average of the slice references: expected value of the scaled LHS
  // over coefficient draws (cross terms average to zero).
  double defect_avg = 0.0;
  for (const std::array<int, 2>& k : ks) {
    ModeSum uk = single_mode(2, k);
    uk.modes[0].coeff /= std::sqrt(static_cast<double>(ks.size()));
    defect_avg += qer_rhs_defect(s, unit_weight, uk);
  }
  const double gap = std::abs(mean / rhs - 1.0);
  write_json_file(path_join(out, "qer_ensemble.json"),
                  OrderedJson{{"shell_r2", r2},
                              {"draws", draws},
                              {"h", h},
                              {"mean_scaled_lhs", mean},
                              {"rhs_energy_curve", rhs},
                              {"rhs_slice_average", defect_avg},
                              {"gap", gap}});
  outcome.add("qer.ensemble_reference", gap <= 0.15,
              "ensemble mean " + format_full(mean) + " vs energy-curve reference " +
                  format_full(rhs) + " (gap " + format_full(gap) +
                  "); the shell-averaged slice reference is " + format_full(defect_avg));
}

// ==========================================================================
// Uniform restriction bounds on the curved member, plus the conormal sweep
// on the flat member and the degenerate-fiber demo.

void uniform_bounds_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome) {
  ensure_dir(out);
  const HypersurfaceSpec tg = (cfg.has_surface && cfg.surface.kind == SurfaceKind::TubeGraph)
                                  ? cfg.surface
                                  : tube_graph_surface(0.5, cosine_poly({1, 0}, 1.0));
  const ConditionA ca = condition_a_check(tg, 0.0, cfg.resolution > 0 ? cfg.resolution : 96);
  outcome.add("bounds.transversality_margin", ca.ok && ca.margin >= 0.97,
              "energy-curve angle margin " + format_full(ca.margin));

  const std::vector<double> hs_in = hs_or_default(cfg, {0.2, 0.1, 0.05, 0.025});
  if (hs_in.size() < 2)
    throw ConfigError("kind \"bounds-scaling\" needs at least two h values");
  std::vector<double> hs;
  std::vector<long> r2s;
  for (double h : hs_in) {
    const double raw = 1.0 / (h * h);
    const long r2 = std::lround(raw);
    if (r2 < 1 || std::abs(raw - static_cast<double>(r2)) > 1e-9 * raw)
      throw ConfigError("kind \"bounds-scaling\" needs h = 1/sqrt(integer), got h = " +
                        format_full(h));
    if (shell_points(2, static_cast<int>(r2)).empty())
      throw ConfigError("no lattice modes on shell |k|^2 = " + std::to_string(r2));
    r2s.push_back(r2);
    hs.push_back(1.0 / std::sqrt(static_cast<double>(r2)));
  }
  const int draws = cfg.ensemble.draws > 0 ? cfg.ensemble.draws : 16;
  const std::uint64_t eseed = cfg.ensemble.seed;

  ScalingInput in;
  in.hs = hs;
  in.ensemble = true;
  in.family = [draws, eseed](double h) {
    EnsembleSpec spec;
    spec.n = 2;
    spec.r2 = static_cast<int>(std::lround(1.0 / (h * h)));
    spec.draws = draws;
    spec.seed = eseed;
    return make_shell_ensemble(spec);
  };
  const QERReport rep = scaling_experiment(in, tg, unit_weight);
  emit_report(rep, path_join(out, "bounds_tube_graph.csv"),
              path_join(out, "bounds_tube_graph_summary.json"));
  outcome.add("bounds.norm_flat_in_h",
              rep.norm_fit.slope >= -0.1 && rep.norm_fit.slope <= 0.1,
              "restriction-norm exponent " + format_full(rep.norm_fit.slope));
  outcome.add("bounds.no_norm_collapse", rep.min_norm > 0.1 * rep.median_norm,
              "min norm " + format_full(rep.min_norm) + ", median " +
                  format_full(rep.median_norm));
}

void conormal_growth_section(const ExperimentConfig& cfg, const std::string& out,
                             ExperimentOutcome& outcome) {
  ensure_dir(out);
  (void)cfg;
  // Conormal-approaching single modes on the flat member: k = (m, 1), so the
  // mode direction tends to the conormal of {x_1 = c} as m grows.
  const HypersurfaceSpec vs = vertical_surface(2, {1, 0}, 0.0);
  const std::vector<int> ms{5, 10, 20, 40};
  ScalingInput in;
  for (int m : ms) in.hs.push_back(1.0 / std::sqrt(static_cast<double>(m * m + 1)));
  in.ensemble = false;
  in.family = [](double h) {
    const int m = static_cast<int>(std::lround(std::sqrt(1.0 / (h * h) - 1.0)));
    return std::vector<ModeSum>{single_mode(2, {m, 1})};
  };
  const QERReport rep = scaling_experiment(in, vs, unit_weight);
  emit_report(rep, path_join(out, "bounds_conormal.csv"),
              path_join(out, "bounds_conormal_summary.json"));
  outcome.add("bounds.conormal_growth_window",
              rep.norm_fit.accepted && rep.norm_fit.slope <= -0.25 &&
                  rep.norm_fit.slope >= -0.55,
              "conormal restriction-norm exponent " + format_full(rep.norm_fit.slope) +
                  " (flat-member norms are h-independent, see bounds_degenerate_demo.csv "
                  "for the degenerate-fiber member where the crude-bound rate appears)");

  // Degenerate-fiber demo: at delta = 0 the member collapses onto the unit
  // sphere bundle and the restriction norm grows like h^{-1/4}.
  const HypersurfaceSpec s0 = tube_graph_surface(0.0, cosine_poly({1, 0}, 1.0));
  CsvWriter dcsv({"h", "restriction_norm"});
  std::vector<double> lh, ln;
  for (int m : ms) {
    const double h = 1.0 / static_cast<double>(m);
    const ModeSum u = single_mode(2, {m, 0});
    const double nrm = restriction_norm(u, s0, surface_res_for(h));
    dcsv.add_row({h, nrm});
    lh.push_back(std::log(h));
    ln.push_back(std::log(nrm));
  }
  dcsv.write_file(path_join(out, "bounds_degenerate_demo.csv"));
  const LineFit dfit = fit_line(lh, ln);
  write_json_file(path_join(out, "bounds_degenerate_summary.json"),
                  OrderedJson{{"slope", dfit.slope},
                              {"r2", dfit.r2},
                              {"accepted", dfit.accepted}});
}

// ==========================================================================
// Admissible-region profile of the angle function.

void f_profile_grid_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome) {
  ensure_dir(out);
  const int res = cfg.resolution > 0 ? cfg.resolution : 2000;
  const double dth = kPi / (res - 1);

  // Corner values must vanish exactly in floating point (left-to-right
  // association of the profile's terms).
  const double f_c0 = f_value(kPi / 2.0, 0.0);
  const double f_c1 = f_value(kPi / 2.0, kPi);
  outcome.add("profile.corner_values", f_c0 == 0.0 && f_c1 == 0.0,
              "f(pi/2, 0) = " + format_full(f_c0) + ", f(pi/2, pi) = " + format_full(f_c1));

  // Grid scan: every admissible point with f >= 0 must lie within one cell
  // of a corner.
  CsvWriter offenders({"theta", "phi", "f"});
  long count_admissible = 0;
  bool offenders_ok = true;
  double max_f_interior = -1e300;
  for (int i = 0; i < res; ++i) {
    const double th = kPi * i / (res - 1);
    for (int j = 0; j < res; ++j) {
      const double ph = kPi * j / (res - 1);
      if (!admissible_check(th, ph)) continue;
      ++count_admissible;
      const double f = f_value(th, ph);
      const bool near_corner = std::abs(th - kPi / 2.0) <= dth + 1e-12 &&
                               (std::abs(ph) <= dth + 1e-12 ||
                                std::abs(ph - kPi) <= dth + 1e-12);
      if (!near_corner) max_f_interior = std::max(max_f_interior, f);
      if (f >= 0.0) {
        offenders.add_row({th, ph, f});
        if (!near_corner) offenders_ok = false;
      }
    }
  }
  offenders.write_file(path_join(out, "profile_offenders.csv"));
  write_json_file(path_join(out, "profile_summary.json"),
                  OrderedJson{{"grid", res},
                              {"admissible_points", count_admissible},
                              {"offenders", offenders.rows()},
                              {"max_f_away_from_corners", max_f_interior},
                              {"corner_f", {f_c0, f_c1}}});
  outcome.add("profile.negative_away_from_corners", offenders_ok && max_f_interior < 0.0,
              "max f away from corners " + format_full(max_f_interior) + " over " +
                  std::to_string(count_admissible) + " admissible grid points");
}

// ==========================================================================
// Operator-symbol scan over the energy curve.

void symbol_scan_section(const ExperimentConfig& cfg, const std::string& out,
                         ExperimentOutcome& outcome) {
  ensure_dir(out);
  const int res = cfg.resolution > 0 ? cfg.resolution : 96;
  const HypersurfaceSpec tg = (cfg.has_surface && cfg.surface.kind == SurfaceKind::TubeGraph)
                                  ? cfg.surface
                                  : tube_graph_surface(0.5, cosine_poly({1, 0}, 1.0));

  // Pre-condition: the member's energy-curve angles stay away from the
  // profile's corner points.
  const bool local_ok = local_condition_check(tg, 0.1, res);
  outcome.add("symbols.corner_clearance", local_ok,
              "energy-curve angles keep distance 0.1 from the profile corners");

  // Strict negativity with a quantitative margin on the curved member. The
  // margin floor comes from the profile range over the curve itself.
  const EnergyCurveGrid curve = intersect_sphere_bundle(tg, res);
  double max_f = -1e300, max_g2 = 0.0;
  for (const SurfaceNode& nd : curve.nodes) {
    max_f = std::max(max_f, f_value(nd.theta, nd.phi));
    max_g2 = std::max(max_g2, norm2(nd.p.xi));
  }
  const double floor = 0.5 * max_g2 * std::abs(max_f);
  const EllipticityScan scan = ellipticity_scan(tg, 1.5, res, 10);
  outcome.add("symbols.negative_on_curved_member", scan.max_symbol < 0.0,
              "max symbol " + format_full(scan.max_symbol) + " over " +
                  std::to_string(scan.pairs) + " samples");
  outcome.add("symbols.quantitative_margin", scan.margin >= floor,
              "margin " + format_full(scan.margin) + " vs floor " + format_full(floor));

  // Sharpness: on the flat member the symbol attains 0 (cotangent saturation
  // at the profile corners) while never crossing it.
  const HypersurfaceSpec vs = vertical_surface(2, {1, 0}, 0.0);
  const EllipticityScan vscan = ellipticity_scan(vs, 1.5, res, 10);
  outcome.add("symbols.sharp_on_flat_member",
              vscan.max_symbol <= 1e-12 && vscan.margin <= 0.02,
              "flat-member max symbol " + format_full(vscan.max_symbol) + ", margin " +
                  format_full(vscan.margin));

  write_json_file(path_join(out, "ellipticity_scan.json"),
                  OrderedJson{{"curved",
                               {{"min_symbol", scan.min_symbol},
                                {"max_symbol", scan.max_symbol},
                                {"margin", scan.margin},
                                {"pairs", scan.pairs},
                                {"margin_floor", floor},
                                {"max_profile_on_curve", max_f}}},
                              {"flat",
                               {{"min_symbol", vscan.min_symbol},
                                {"max_symbol", vscan.max_symbol},
                                {"margin", vscan.margin},
                                {"pairs", vscan.pairs}}}});
}

// ==========================================================================
// General-position certificate and the sign of the geometric reference.

void general_position_section(const ExperimentConfig& cfg, const std::string& out,
                              ExperimentOutcome& outcome) {
  ensure_dir(out);
  const int res = cfg.resolution > 0 ? cfg.resolution : 192;
  const HypersurfaceSpec vs = (cfg.has_surface && cfg.surface.kind != SurfaceKind::TubeGraph)
                                  ? cfg.surface
                                  : vertical_surface(2, {1, 0}, 0.0);

  const GeneralPosition gp = general_position_check(vs, res);
  outcome.add("reference.general_position", gp.ok, "integral " + format_full(gp.value));
  outcome.add("reference.negative_integral", gp.value < 0.0,
              "energy-curve integral " + format_full(gp.value));

  // Density against its closed form on the base-vertical member, in L^2 over
  // the energy curve.
  const EnergyCurveGrid curve = intersect_sphere_bundle(vs, res);
  double num = 0.0, den = 0.0;
  for (const SurfaceNode& nd : curve.nodes) {
    const double q = density_q(nd);
    const double model = -15.0 * nd.p.xi[0] * nd.p.xi[0];
    num += nd.w * (q - model) * (q - model);
    den += nd.w * model * model;
  }
  const double l2_err = std::sqrt(num / den);
  outcome.add("reference.density_closed_form", l2_err <= 0.05,
              "L2 mismatch " + format_full(l2_err));

  // Tilt sweep: the certificate and the sign are stable under small tilts.
  CsvWriter tcsv({"a1", "value", "measure", "ok"});
  bool sweep_ok = true;
  for (double a1 : {0.05, 0.10, 0.15, 0.20}) {
    const HypersurfaceSpec ts = tilted_surface(Vec(a1, 0.0), 0.0);
    const GeneralPosition g = general_position_check(ts, res);
    sweep_ok = sweep_ok && g.ok && g.value < 0.0;
    tcsv.add_row_raw({format_full(a1), format_full(g.value), format_full(g.measure),
                      g.ok ? "1" : "0"});
  }
  tcsv.write_file(path_join(out, "tilt_sweep.csv"));
  outcome.add("reference.tilt_stability", sweep_ok,
              "general position holds with a negative integral across the tilt sweep");

  write_json_file(path_join(out, "general_position.json"),
                  OrderedJson{{"value", gp.value},
                              {"measure", gp.measure},
                              {"ok", gp.ok},
                              {"density_l2_err", l2_err}});
}

// ==========================================================================
// Fourier-multiplier comparison on the restricted chart.

void multiplier_section(const ExperimentConfig& cfg, const std::string& out,
                        ExperimentOutcome& outcome) {
  ensure_dir(out);
  std::vector<long> ms;
  for (double h : hs_or_default(cfg, {0.125, 0.0625, 0.03125, 0.015625}))
    ms.push_back(integer_scale(h, 1.0, "multiplier"));
  if (ms.size() < 2) throw ConfigError("kind \"multiplier\" needs at least two h values");

  const HypersurfaceSpec vs = (cfg.has_surface && cfg.surface.kind != SurfaceKind::TubeGraph)
                                  ? cfg.surface
                                  : vertical_surface(2, {1, 0}, 0.0);
  // Smooth compactly supported multiplier with an anisotropic bias, so no
  // accidental symmetry hides chart-order errors.
  const auto Q = [](double b0, double b1, double b2) {
    const double d2 = (b0 - 0.6) * (b0 - 0.6) + (b1 - 0.2) * (b1 - 0.2) +
                      (b2 + 0.1) * (b2 + 0.1);
    return std::exp(-d2 / 8.0) * bump_window(std::sqrt(b0 * b0 + b1 * b1 + b2 * b2), 4.0);
  };

  CsvWriter csv({"h", "ns", "nxi", "residual"});
  bool decreasing = true;
  double prev = 1e300, final_res = 0.0;
  for (const long m : ms) {
    const double h = 1.0 / static_cast<double>(m);
    const ModeSum u = single_mode(2, {0, static_cast<int>(m)});
    const int ns = 2 * static_cast<int>(std::ceil(1.25 * static_cast<double>(m)));
    const int nxi = 2 * static_cast<int>(std::ceil(7.0 / std::sqrt(h)));
    const double r = multiplier_residual(u, vs, Q, ns, nxi);
    decreasing = decreasing && r < prev;
    prev = r;
    final_res = r;
    csv.add_row({h, static_cast<double>(ns), static_cast<double>(nxi), r});
  }
  csv.write_file(path_join(out, "multiplier_sweep.csv"));
  write_json_file(path_join(out, "multiplier_summary.json"),
                  OrderedJson{{"final_residual", final_res}, {"decreasing", decreasing}});
  outcome.add("multiplier.residual_decreasing", decreasing,
              "relative multiplier-vs-symbol residual decreases across the sweep");
  outcome.add("multiplier.final_residual", final_res < 0.10,
              "final residual " + format_full(final_res));
}

// ==========================================================================
// Kind dispatch.

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    throw ConfigError("unknown experiment kind \"" + cfg.kind + "\"");
  if (!cfg.h_list.empty() &&
      (cfg.kind == "ellipticity-scan" || cfg.kind == "general-position"))
    throw ConfigError("kind \"" + cfg.kind + "\" does not take \"h_list\"");
  const std::string out = resolve_out_dir(cfg.out_dir);
  ensure_dir(out);

  ExperimentOutcome outcome;
  if (cfg.kind == "circle-example") {
    circle_closed_form_section(cfg, out, outcome);
    circle_ft_section(cfg, out, outcome);
    holomorphy_section(cfg, out, outcome);
  } else if (cfg.kind == "wavefront") {
    wavefront_containment_section(cfg, out, outcome);
    energy_localization_section(cfg, out, outcome);
  } else if (cfg.kind == "qer-convergence") {
    identity_suite_section(cfg, out, outcome);
    defect_convergence_section(cfg, out, outcome);
    ensemble_reference_section(cfg, out, outcome);
  } else if (cfg.kind == "bounds-scaling") {
    uniform_bounds_section(cfg, out, outcome);
    conormal_growth_section(cfg, out, outcome);
  } else if (cfg.kind == "ellipticity-scan") {
    f_profile_grid_section(cfg, out, outcome);
    symbol_scan_section(cfg, out, outcome);
  } else if (cfg.kind == "general-position") {
    general_position_section(cfg, out, outcome);
  } else {
    multiplier_section(cfg, out, outcome);
  }

  OrderedJson js;
  js["kind"] = cfg.kind;
  js["ok"] = outcome.ok;
  OrderedJson arr = OrderedJson::array();
  for (const CriterionResult& c : outcome.criteria)
    arr.push_back(OrderedJson{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  js["criteria"] = arr;
  write_json_file(path_join(out, "outcome.json"), js);
  return outcome;
}

}  // namespace tube
