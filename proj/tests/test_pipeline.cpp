#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "qjump/pipeline.hpp"
#include "support.hpp"

using namespace qjump;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

// Coarse run small enough for a unit test but with a healthy event count:
// raised branching gives lambda_eff ~ 8.3/s against tau_p0 = 0.14.
RunConfig quick_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.scheme.branch_p1_to_p0 = 1e-5;
  cfg.duration = 60.0;
  cfg.seed = seed;
  return cfg;
}

// Strip the manifest's created timestamp for byte comparisons.
std::string manifest_without_timestamp(const fs::path& path) {
  nlohmann::json m = read_json(path);
  m.erase("created");
  return m.dump();
}

}  // namespace

TEST_CASE("coarse pipeline produces the full artifact set") {
  testsupport::TempDir dir("pipe_coarse");
  const PipelineResult result = run_pipeline(quick_config(505), dir / "run");
  REQUIRE(result.outcome == "ok");
  REQUIRE(result.n_events > 50);
  REQUIRE(result.fit.has_value());
  REQUIRE(result.fit->tau_hat > 0.0);

  for (const char* name :
       {"config.txt", "intervals.csv", "bins.csv", "dark.csv", "report.json",
        "telegraph.svg", "telegraph.csv", "survival.svg", "survival.csv",
        "manifest.json"}) {
    INFO(name);
    REQUIRE(fs::exists(dir / "run" / name));
  }

  SECTION("report carries the fixed field names") {
    const nlohmann::json report = read_json(dir / "run" / "report.json");
    REQUIRE(report["method"] == "truncated_mean");
    REQUIRE(report.contains("tau_hat_s"));
    REQUIRE(report.contains("tau_stderr_s"));
    REQUIRE(report.contains("n_events"));
    REQUIRE(report.contains("t_s_s"));
    REQUIRE(report["grid"].is_array());
    REQUIRE(report["diagnostics"].contains("ks_statistic"));
    REQUIRE(report["diagnostics"]["conservation_ok"] == true);
    REQUIRE(report["n_events"] == result.n_events);
  }

  SECTION("manifest hashes verify and embed the config verbatim") {
    const nlohmann::json manifest = read_json(dir / "run" / "manifest.json");
    REQUIRE(manifest["outcome"] == "ok");
    REQUIRE(manifest["rng"] == std::string(kRngContract));
    for (const auto& f : manifest["files"]) {
      const fs::path p = dir / "run" / f["path"].get<std::string>();
      REQUIRE(fnv1a64_file(p) == f["fnv1a64"].get<std::string>());
      REQUIRE(fs::file_size(p) == f["bytes"].get<std::uintmax_t>());
    }
    const RunConfig round =
        parse_config(manifest["config_text"].get<std::string>());
    REQUIRE(round.seed == 505);
    REQUIRE(serialize_config(round) == manifest["config_text"].get<std::string>());
  }
}

TEST_CASE("reruns are byte-identical apart from the manifest timestamp") {
  testsupport::TempDir dir("pipe_rerun");
  run_pipeline(quick_config(606), dir / "a");
  run_pipeline(quick_config(606), dir / "b");
  for (const char* name :
       {"config.txt", "intervals.csv", "bins.csv", "dark.csv", "report.json",
        "telegraph.svg", "telegraph.csv", "survival.svg", "survival.csv"}) {
    INFO(name);
    REQUIRE(testsupport::files_identical(dir / "a" / name, dir / "b" / name));
  }
  REQUIRE(manifest_without_timestamp(dir / "a" / "manifest.json") ==
          manifest_without_timestamp(dir / "b" / "manifest.json"));
}

TEST_CASE("unreachable shelf reports a no_events outcome") {
  testsupport::TempDir dir("pipe_noevents");
  RunConfig cfg = quick_config(707);
  cfg.scheme.branch_p1_to_p0 = 0.0;
  cfg.scheme.direct_shelving_rate = 0.0;
  cfg.duration = 5.0;
  const PipelineResult result = run_pipeline(cfg, dir / "run");
  REQUIRE(result.outcome == "no_events");
  REQUIRE(result.n_events == 0);
  REQUIRE_FALSE(result.fit.has_value());
  REQUIRE_FALSE(fs::exists(dir / "run" / "report.json"));
  REQUIRE(fs::exists(dir / "run" / "telegraph.svg"));
  const nlohmann::json manifest = read_json(dir / "run" / "manifest.json");
  REQUIRE(manifest["outcome"] == "no_events");
  REQUIRE(manifest["n_events"] == 0);
}

TEST_CASE("full mode writes a trajectory and can render per photon") {
  testsupport::TempDir dir("pipe_full");
  RunConfig cfg;
  cfg.mode = SimMode::Full;
  cfg.scheme.tau_p1 = 1e-4;
  cfg.scheme.excitation_rate = 1e4;
  cfg.scheme.branch_p1_to_p0 = 0.02;
  cfg.scheme.tau_p0 = 0.5;
  cfg.duration = 120.0;
  cfg.seed = 808;
  cfg.detection.min_dark_duration = 0.07;
  cfg.t_s = 0.07;

  SECTION("rate-model rendering") {
    const PipelineResult result = run_pipeline(cfg, dir / "rate");
    REQUIRE(result.outcome == "ok");
    REQUIRE(fs::exists(dir / "rate" / "jumps.jsonl"));
    REQUIRE_FALSE(fs::exists(dir / "rate" / "intervals.csv"));
    const Trajectory t = read_trajectory_jsonl(dir / "rate" / "jumps.jsonl");
    REQUIRE_NOTHROW(validate(t));
  }

  SECTION("per-photon rendering") {
    cfg.detector.mode = DetectorMode::PerPhoton;
    cfg.detector.efficiency = 0.2;
    // detected bright rate = efficiency * A1 rate = 0.2 * 5000/s; the
    // threshold policy reads bright_count_rate, so it must match
    cfg.detector.bright_count_rate = 1000.0;
    const PipelineResult result = run_pipeline(cfg, dir / "photon");
    REQUIRE(result.outcome == "ok");
    REQUIRE(result.n_events > 10);
  }

  SECTION("per-photon requires full mode") {
    cfg.mode = SimMode::Coarse;
    cfg.detector.mode = DetectorMode::PerPhoton;
    REQUIRE_THROWS_AS(run_pipeline(cfg, dir / "bad"), InvalidConfig);
  }
}

TEST_CASE("seed fan-out writes per-seed directories") {
  testsupport::TempDir dir("pipe_seeds");
  RunConfig cfg = quick_config(0);
  cfg.duration = 20.0;
  const auto results = run_pipeline_seeds(cfg, {11, 12}, dir.path());
  REQUIRE(results.size() == 2);
  REQUIRE(fs::exists(dir / "seed-11" / "manifest.json"));
  REQUIRE(fs::exists(dir / "seed-12" / "manifest.json"));
  REQUIRE_FALSE(testsupport::files_identical(dir / "seed-11" / "bins.csv",
                                             dir / "seed-12" / "bins.csv"));
}

TEST_CASE("stage seeds decorrelate simulation and rendering") {
  REQUIRE(derive_seed(42, kStageSimulate) != derive_seed(42, kStageRender));
  REQUIRE(derive_seed(42, kStageSimulate) != 42);
}
