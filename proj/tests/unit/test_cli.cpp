#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "tube/experiments.hpp"

using namespace tube;

namespace {

// Applies the JSON onto a fresh config and returns the ConfigError message,
// or an empty string when parsing succeeds.
std::string config_error_of(const std::string& json, bool require_kind = false) {
  ExperimentConfig cfg;
  try {
    apply_config_json(json, cfg, require_kind);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& msg, const std::string& needle) {
  return msg.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("full configuration round trip") {
  ExperimentConfig cfg;
  apply_config_json(R"({
    "kind": "wavefront",
    "dim": 2,
    "h_list": [0.05, 0.025],
    "resolution": 32,
    "seed": 7,
    "out_dir": "artifacts",
    "ensemble": {"shell_r2": 25, "draws": 8, "seed": 3},
    "surface": {"kind": "tube-graph", "delta": 0.45, "tau": 1.8,
                "g": [{"k": [1, 0], "amp": 0.6}, {"k": [0, 2], "amp": -0.2}]}
  })",
                    cfg, true);
  CHECK(cfg.kind == "wavefront");
  CHECK(cfg.dim == 2);
  REQUIRE(cfg.h_list.size() == 2);
  CHECK(cfg.h_list[0] == 0.05);
  CHECK(cfg.h_list[1] == 0.025);
  CHECK(cfg.resolution == 32);
  CHECK(cfg.seed == 7);
  CHECK(cfg.out_dir == "artifacts");
  CHECK(cfg.ensemble.shell_r2 == 25);
  CHECK(cfg.ensemble.draws == 8);
  CHECK(cfg.ensemble.seed == 3);
  REQUIRE(cfg.has_surface);
  CHECK(cfg.surface.kind == SurfaceKind::TubeGraph);
  CHECK(cfg.surface.delta == 0.45);
  CHECK(cfg.surface.tau == 1.8);
  REQUIRE(cfg.surface.g.terms.size() == 2);
  CHECK(cfg.surface.g.terms[0].m[0] == 1);
  CHECK(cfg.surface.g.terms[0].cos_c == 0.6);
  CHECK(cfg.surface.g.terms[1].m[1] == 2);
  CHECK(cfg.surface.g.terms[1].cos_c == -0.2);

  // Defaults survive when fields are absent.
  ExperimentConfig sparse;
  apply_config_json(R"({"kind": "multiplier"})", sparse, true);
  CHECK(sparse.kind == "multiplier");
  CHECK(sparse.dim == 0);
  CHECK(sparse.h_list.empty());
  CHECK(sparse.out_dir == "out");
  CHECK(!sparse.has_surface);
}

TEST_CASE("unknown fields are rejected by name") {
  CHECK(mentions(config_error_of(R"({"kind": "wavefront", "bogus": 1})"),
                 "unknown field \"bogus\" in config"));
  CHECK(mentions(config_error_of(R"({"ensemble": {"extra": 1}})"),
                 "unknown field \"extra\" in ensemble"));
  CHECK(mentions(config_error_of(R"({"surface": {"kind": "vertical", "delta": 0.5}})"),
                 "unknown field \"delta\" in surface"));
}

TEST_CASE("missing or invalid required fields are reported") {
  CHECK(mentions(config_error_of(R"({})", true), "config missing field \"kind\""));
  CHECK(config_error_of(R"({})", false).empty());
  CHECK(mentions(config_error_of(R"({"kind": "frobnicate"})"),
                 "unknown experiment kind \"frobnicate\""));
  CHECK(mentions(config_error_of(R"({"surface": {}})"), "surface.kind"));
  CHECK(mentions(config_error_of(R"({"surface": {"kind": "tilted"}})"), "surface.a"));
  CHECK(mentions(config_error_of(R"({"surface": {"kind": "tube-graph"}})"), "surface.delta"));
  CHECK(mentions(config_error_of(R"({"surface": {"kind": "saddle"}})"),
                 "unknown surface kind \"saddle\""));
}

TEST_CASE("value validation") {
  CHECK(mentions(config_error_of(R"({"h_list": [0.1, 0.1]})"), "strictly decreasing"));
  CHECK(mentions(config_error_of(R"({"h_list": [0.1, -0.05]})"), "positive"));
  CHECK(mentions(config_error_of(R"({"h_list": []})"), "non-empty"));
  CHECK(mentions(config_error_of(R"({"h_list": 0.1})"), "non-empty"));
  CHECK(mentions(config_error_of(R"({"dim": 3})"), "must be 1 or 2"));
  CHECK(mentions(config_error_of(R"({"seed": -4})"), "non-negative"));
  CHECK(mentions(config_error_of(R"({"resolution": -1})"), "non-negative"));
  CHECK(mentions(config_error_of(R"({"ensemble": {"draws": 0}})"), "positive"));
  CHECK(mentions(config_error_of(R"({"kind": 3})"), "must be a string"));
  CHECK(mentions(config_error_of("{nonsense"), "config parse error"));
  // Fiber-coupled members need the two-dimensional base.
  CHECK(mentions(config_error_of(R"({"dim": 1, "surface": {"kind": "tilted", "a": [0.1, 0]}})"),
                 "requires dim = 2"));
  CHECK(mentions(
      config_error_of(R"({"dim": 1, "surface": {"kind": "tube-graph", "delta": 0.2}})"),
      "requires dim = 2"));
}

TEST_CASE("config files load with the same validation") {
  const std::string path = "unit_cli_config.json";
  {
    std::ofstream f(path, std::ios::binary);
    f << R"({"kind": "general-position", "resolution": 48})";
  }
  ExperimentConfig cfg;
  load_config_file(path, cfg, true);
  CHECK(cfg.kind == "general-position");
  CHECK(cfg.resolution == 48);

  ExperimentConfig other;
  CHECK_THROWS_AS(load_config_file("does_not_exist_12345.json", other, true), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("output root redirection applies to relative paths only") {
  unsetenv("TUBELAB_OUT_ROOT");
  CHECK(resolve_out_dir("runs") == "runs");
  setenv("TUBELAB_OUT_ROOT", "/tmp/tubelab_root", 1);
  CHECK(resolve_out_dir("runs") == "/tmp/tubelab_root/runs");
  CHECK(resolve_out_dir("/abs/path") == "/abs/path");
  setenv("TUBELAB_OUT_ROOT", "/tmp/tubelab_root/", 1);
  CHECK(resolve_out_dir("runs") == "/tmp/tubelab_root/runs");
  unsetenv("TUBELAB_OUT_ROOT");
}

TEST_CASE("outcome aggregation is a conjunction") {
  ExperimentOutcome outcome;
  CHECK(outcome.ok);
  outcome.add("first", true, "fine");
  CHECK(outcome.ok);
  outcome.add("second", false, "broken");
  CHECK(!outcome.ok);
  outcome.add("third", true, "fine again");
  CHECK(!outcome.ok);
  REQUIRE(outcome.criteria.size() == 3);
  CHECK(outcome.criteria[1].name == "second");
  CHECK(outcome.criteria[1].detail == "broken");
}

TEST_CASE("experiment-level configuration rejections") {
  // Fixed-grid kinds take no h sweep.
  for (const std::string kind : {"ellipticity-scan", "general-position"}) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.h_list = {0.1};
    cfg.out_dir = "unit_cli_scratch";
    try {
      run_experiment(cfg);
      FAIL("expected ConfigError for kind " << kind);
    } catch (const ConfigError& e) {
      CHECK(mentions(e.what(), "h_list"));
    }
  }
  // Frequency sweeps must hit exact integer mode numbers.
  {
    ExperimentConfig cfg;
    cfg.kind = "multiplier";
    cfg.h_list = {0.3};
    cfg.out_dir = "unit_cli_scratch";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
}

TEST_CASE("smallest experiment kind runs end to end") {
  unsetenv("TUBELAB_OUT_ROOT");
  ExperimentConfig cfg;
  cfg.kind = "general-position";
  cfg.out_dir = "unit_cli_gp_out";
  const ExperimentOutcome outcome = run_experiment(cfg);
  CHECK(outcome.ok);
  CHECK(!outcome.criteria.empty());
  std::ifstream f("unit_cli_gp_out/outcome.json");
  CHECK(f.good());
}
