#pragma once

// Experiment drivers: named numerical studies with reproducible artifacts.
// Each experiment kind runs a fixed set of sections; every section appends
// labeled pass/fail results to an outcome and writes CSV/JSON artifacts under
// the configured output directory.

#include <stdexcept>
#include <string>
#include <vector>

#include "tube/hypersurface.hpp"
#include "tube/qer.hpp"

namespace tube {

// Configuration error (bad file, unknown field, invalid value). The CLI maps
// this to its configuration exit status.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnsembleConfig {
  long shell_r2 = 0;  // squared radius of the frequency shell; 0 = kind default
  int draws = 0;      // random phase draws per shell; 0 = kind default
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string kind;           // one of experiment_kinds()
  int dim = 0;                // base dimension; 0 = kind default
  bool has_surface = false;   // surface override present
  HypersurfaceSpec surface;   // used only when has_surface
  std::vector<double> h_list; // empty = kind default; must be strictly decreasing
  EnsembleConfig ensemble;
  int resolution = 0;         // quadrature override; 0 = kind default
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

// Names of the supported experiment kinds, in canonical order.
const std::vector<std::string>& experiment_kinds();

// Strict config-file loader: unknown fields are rejected by name, types are
// checked, and h lists must be strictly decreasing. Missing optional fields
// keep their defaults; a missing "kind" is an error when `require_kind`.
void load_config_file(const std::string& path, ExperimentConfig& cfg, bool require_kind);
void apply_config_json(const std::string& json_text, ExperimentConfig& cfg,
                       bool require_kind);

// Output directory resolution: when the TUBELAB_OUT_ROOT environment variable
// is set, relative output directories are placed under it.
std::string resolve_out_dir(const std::string& out_dir);

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentOutcome {
  bool ok = true;
  std::vector<CriterionResult> criteria;
  void add(const std::string& name, bool pass, const std::string& detail);
};

// Sections. Each writes its artifacts under `out` (created if needed) and
// appends its checks to `outcome`. Sections are composed into kinds by
// run_experiment and are also called individually by the acceptance suite.
void circle_closed_form_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome);
void circle_ft_section(const ExperimentConfig& cfg, const std::string& out,
                       ExperimentOutcome& outcome);
void holomorphy_section(const ExperimentConfig& cfg, const std::string& out,
                        ExperimentOutcome& outcome);
void wavefront_containment_section(const ExperimentConfig& cfg, const std::string& out,
                                   ExperimentOutcome& outcome);
void energy_localization_section(const ExperimentConfig& cfg, const std::string& out,
                                 ExperimentOutcome& outcome);
void identity_suite_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome);
void defect_convergence_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome);
void ensemble_reference_section(const ExperimentConfig& cfg, const std::string& out,
                                ExperimentOutcome& outcome);
void uniform_bounds_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome);
void conormal_growth_section(const ExperimentConfig& cfg, const std::string& out,
                             ExperimentOutcome& outcome);
void f_profile_grid_section(const ExperimentConfig& cfg, const std::string& out,
                            ExperimentOutcome& outcome);
void symbol_scan_section(const ExperimentConfig& cfg, const std::string& out,
                         ExperimentOutcome& outcome);
void general_position_section(const ExperimentConfig& cfg, const std::string& out,
                              ExperimentOutcome& outcome);
void multiplier_section(const ExperimentConfig& cfg, const std::string& out,
                        ExperimentOutcome& outcome);

// Runs the configured experiment kind. Throws ConfigError for configuration
// problems; numerical gate failures land in the returned outcome.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Writes a scaling report as a CSV with pinned column order plus a JSON
// summary with fit diagnostics. An empty report yields a header-only CSV.
void emit_report(const QERReport& rep, const std::string& csv_path,
                 const std::string& json_path);

}  // namespace tube
