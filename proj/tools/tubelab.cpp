// Command-line driver: one subcommand per experiment kind, flags override
// the JSON config file. Exit codes: 0 all checks passed, 2 at least one
// check failed, 1 configuration or I/O error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tube/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for transforms on flat phase-space tubes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<double> h_list;
  std::uint64_t seed = 0;
  int resolution = 0;
  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  auto* opt_out = app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* opt_seed = app.add_option("--seed", seed, "random seed (overrides config)");
  auto* opt_h = app.add_option("--h-list", h_list,
                               "comma-separated h values, strictly decreasing "
                               "(overrides config)")
                    ->delimiter(',');
  auto* opt_res =
      app.add_option("--resolution", resolution, "grid resolution (overrides config)");
  for (const std::string& kind : tube::experiment_kinds())
    app.add_subcommand(kind, "run the \"" + kind + "\" experiment")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    tube::ExperimentConfig cfg;
    if (opt_config->count()) tube::load_config_file(config_path, cfg, false);
    cfg.kind = app.get_subcommands().front()->get_name();
    if (opt_out->count()) cfg.out_dir = out_dir;
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_res->count()) {
      if (resolution < 0)
        throw tube::ConfigError("field \"resolution\" must be non-negative");
      cfg.resolution = resolution;
    }
    if (opt_h->count()) {
      for (size_t i = 0; i < h_list.size(); ++i) {
        if (!(h_list[i] > 0.0))
          throw tube::ConfigError("\"--h-list\" entries must be positive");
        if (i && !(h_list[i] < h_list[i - 1]))
          throw tube::ConfigError("\"--h-list\" must be strictly decreasing");
      }
      cfg.h_list = h_list;
    }

    const tube::ExperimentOutcome outcome = tube::run_experiment(cfg);
    int passed = 0;
    for (const tube::CriterionResult& c : outcome.criteria) {
      std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.detail.c_str());
      if (c.pass) ++passed;
    }
    std::printf("tubelab %s: %d/%zu checks passed\n", cfg.kind.c_str(), passed,
                outcome.criteria.size());
    return outcome.ok ? 0 : 2;
  } catch (const tube::ConfigError& e) {
    std::fprintf(stderr, "tubelab: config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tubelab: error: %s\n", e.what());
    return 1;
  }
}
