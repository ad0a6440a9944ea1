#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <string>

#include "qjump/config.hpp"
#include "qjump/io.hpp"
#include "qjump/telegraph.hpp"
#include "support.hpp"

using namespace qjump;
using Catch::Approx;

TEST_CASE("fnv1a64 known vectors") {
  REQUIRE(fnv1a64("", 0) == 0xcbf29ce484222325ull);
  REQUIRE(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  REQUIRE(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("interval files round-trip") {
  testsupport::TempDir dir("io_intervals");
  const ShelvingIntervals s = simulate_telegraph(5.0, 10.0, 20.0, 321);
  REQUIRE_FALSE(s.intervals.empty());
  write_intervals(dir / "i.csv", s);
  const ShelvingIntervals back = read_intervals(dir / "i.csv");
  REQUIRE(back.seed == s.seed);
  REQUIRE(back.duration == s.duration);
  REQUIRE(back.intervals.size() == s.intervals.size());
  for (std::size_t i = 0; i < s.intervals.size(); ++i) {
    REQUIRE(back.intervals[i].t0 ==
            Approx(s.intervals[i].t0).epsilon(1e-12));
    REQUIRE(back.intervals[i].t_end ==
            Approx(s.intervals[i].t_end).epsilon(1e-12));
    REQUIRE(back.intervals[i].censored == s.intervals[i].censored);
  }
}

TEST_CASE("bin files round-trip") {
  testsupport::TempDir dir("io_bins");
  const ShelvingIntervals s = simulate_telegraph(5.0, 10.0, 5.0, 11);
  DetectorParams params;
  const BinnedCounts bins = render_counts(s, params, 22);
  write_bins(dir / "b.csv", bins);
  const BinnedCounts back = read_bins(dir / "b.csv");
  REQUIRE(back.counts == bins.counts);
  REQUIRE(back.seed == 22);
  REQUIRE(back.bin_width == bins.bin_width);
  REQUIRE(back.params.bright_count_rate == params.bright_count_rate);
  REQUIRE(back.params.dark_count_rate == params.dark_count_rate);
}

TEST_CASE("dark files round-trip") {
  testsupport::TempDir dir("io_dark");
  const std::vector<DarkPeriod> periods = {{0.10, 0.20, 0.10},
                                           {0.55, 0.71, 0.16}};
  DetectorConfig cfg;
  cfg.threshold = 5.0;
  write_dark(dir / "d.csv", periods, cfg, "deadbeef00000000");
  const auto back = read_dark(dir / "d.csv");
  REQUIRE(back.size() == 2);
  REQUIRE(back[1].dt == Approx(0.16).epsilon(1e-12));
  const std::string text = testsupport::slurp(dir / "d.csv");
  REQUIRE(text.find("# source_fnv1a64 = deadbeef00000000") != std::string::npos);
  REQUIRE(text.find("t0,t_end,dt") != std::string::npos);
}

TEST_CASE("trajectory JSONL round-trips") {
  testsupport::TempDir dir("io_traj");
  LevelScheme scheme;
  scheme.tau_p1 = 1e-3;
  scheme.excitation_rate = 500.0;
  scheme.branch_p1_to_p0 = 0.02;
  scheme.tau_p0 = 0.03;
  const Trajectory t = simulate_full(scheme, 5.0, 808);
  REQUIRE_FALSE(t.jumps.empty());
  write_trajectory_jsonl(dir / "t.jsonl", t);
  const Trajectory back = read_trajectory_jsonl(dir / "t.jsonl");
  REQUIRE(back.seed == t.seed);
  REQUIRE(back.duration == t.duration);
  REQUIRE(back.scheme.tau_p0 == t.scheme.tau_p0);
  REQUIRE(back.jumps.size() == t.jumps.size());
  for (std::size_t i = 0; i < t.jumps.size(); ++i) {
    REQUIRE(back.jumps[i].t == Approx(t.jumps[i].t).epsilon(1e-12));
    REQUIRE(back.jumps[i].from == t.jumps[i].from);
    REQUIRE(back.jumps[i].to == t.jumps[i].to);
    REQUIRE(back.jumps[i].channel == t.jumps[i].channel);
  }
  REQUIRE_NOTHROW(validate(back));
}

TEST_CASE("readers reject foreign files, versions, and missing paths") {
  testsupport::TempDir dir("io_reject");

  SECTION("missing file") {
    REQUIRE_THROWS_AS(read_bins(dir / "nope.csv"), MissingInput);
    REQUIRE_THROWS_AS(read_trajectory_jsonl(dir / "nope.jsonl"), MissingInput);
  }

  SECTION("wrong kind") {
    const ShelvingIntervals s = simulate_telegraph(5.0, 10.0, 5.0, 1);
    write_intervals(dir / "i.csv", s);
    REQUIRE_THROWS_AS(read_bins(dir / "i.csv"), IoError);
  }

  SECTION("future version") {
    std::ofstream out(dir / "v9.csv");
    out << "# qjump.bins format_version=9\n# bin_width = 0.01\nt_start,counts\n0,1\n";
    out.close();
    REQUIRE_THROWS_AS(read_bins(dir / "v9.csv"), SchemaVersionMismatch);

    std::ofstream tout(dir / "v9.jsonl");
    tout << "{\"format\":\"qjump.trajectory\",\"version\":9}\n";
    tout.close();
    REQUIRE_THROWS_AS(read_trajectory_jsonl(dir / "v9.jsonl"),
                      SchemaVersionMismatch);
  }

  SECTION("not a qjump file at all") {
    std::ofstream out(dir / "junk.csv");
    out << "hello,world\n1,2\n";
    out.close();
    REQUIRE_THROWS_AS(read_bins(dir / "junk.csv"), IoError);
  }
}

TEST_CASE("config round-trips and validates") {
  RunConfig cfg;
  cfg.seed = 777;
  cfg.duration = 1234.5;
  cfg.mode = SimMode::Full;
  cfg.scheme.branch_p1_to_p0 = 3e-5;
  cfg.detector.bin_width = 0.005;
  cfg.detection.hysteresis_bins = 2;
  cfg.threshold_policy = ThresholdPolicy::Fixed;
  cfg.detection.threshold = 4.25;
  cfg.fit_method = FitMethod::LogLinear;

  const std::string text = serialize_config(cfg);
  const RunConfig back = parse_config(text);
  REQUIRE(back.seed == cfg.seed);
  REQUIRE(back.duration == cfg.duration);
  REQUIRE(back.mode == cfg.mode);
  REQUIRE(back.scheme.branch_p1_to_p0 == cfg.scheme.branch_p1_to_p0);
  REQUIRE(back.detector.bin_width == cfg.detector.bin_width);
  REQUIRE(back.detection.hysteresis_bins == 2);
  REQUIRE(back.threshold_policy == ThresholdPolicy::Fixed);
  REQUIRE(back.detection.threshold == 4.25);
  REQUIRE(back.fit_method == FitMethod::LogLinear);
  // serialization is a fixed point
  REQUIRE(serialize_config(back) == text);

  SECTION("threshold policies") {
    RunConfig c = parse_config("format_version = 1\nthreshold = auto\n");
    REQUIRE(c.threshold_policy == ThresholdPolicy::LikelihoodRatio);
    c = parse_config("format_version = 1\nthreshold = otsu\n");
    REQUIRE(c.threshold_policy == ThresholdPolicy::Otsu);
    c = parse_config("format_version = 1\nthreshold = 6\n");
    REQUIRE(c.threshold_policy == ThresholdPolicy::Fixed);
    REQUIRE(c.detection.threshold == 6.0);
  }

  SECTION("rejections") {
    REQUIRE_THROWS_AS(parse_config("foo = 1\n"), InvalidConfig);  // no version
    REQUIRE_THROWS_AS(parse_config("format_version = 2\n"),
                      SchemaVersionMismatch);
    REQUIRE_THROWS_AS(parse_config("format_version = 1\nbogus_key = 3\n"),
                      InvalidConfig);
    REQUIRE_THROWS_AS(parse_config("format_version = 1\nseed = 1\nseed = 2\n"),
                      InvalidConfig);
    REQUIRE_THROWS_AS(parse_config("format_version = 1\nmode = sideways\n"),
                      InvalidConfig);
    REQUIRE_THROWS_AS(parse_config("format_version = 1\nduration\n"),
                      InvalidConfig);
  }

  SECTION("comments and blank lines are fine") {
    const RunConfig c = parse_config(
        "# a comment\nformat_version = 1\n\nseed = 9\n# trailing\n");
    REQUIRE(c.seed == 9);
  }
}
