#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qjump/config.hpp"
#include "qjump/detect.hpp"
#include "qjump/errors.hpp"
#include "qjump/figures.hpp"
#include "qjump/io.hpp"
#include "qjump/photon.hpp"
#include "qjump/stats.hpp"
#include "qjump/telegraph.hpp"

namespace qjump {

// End-to-end run: simulate -> render -> detect -> fit -> figures, all
// artifacts in one directory plus a manifest listing every file with its
// FNV-1a hash. A run is a pure function of (config, seed); the only
// timestamp lives in the manifest's "created" field.

// Stage sub-seeds, derived so the render stream is unrelated to the
// simulation stream: one splitmix64 finalizer step on seed + stage*golden.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + stage * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kStageSimulate = 0;
inline constexpr std::uint64_t kStageRender = 1;

struct PipelineResult {
  std::filesystem::path dir;
  std::string outcome;  // "ok" or "no_events"
  std::size_t n_events = 0;
  std::optional<FitResult> fit;
  nlohmann::json report;  // empty object when outcome == "no_events"
};

namespace detail {

inline std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Fit report with the fixed field names. `grid` is the diagnostic grid the
// survival counts were evaluated on.
inline nlohmann::json make_fit_report(const FitResult& fit,
                                      const DurationSample& sample,
                                      const std::vector<double>& grid) {
  const SurvivalCounts counts = survival_counts(sample, grid);
  const ConservationReport conservation = conservation_check(counts);
  nlohmann::json diagnostics;
  diagnostics["conservation_ok"] = conservation.all_ok;
  if (sample.durations.size() >= 20) {
    diagnostics["ks_statistic"] =
        ks_exponential_test(sample, fit.tau_hat).statistic;
  } else {
    diagnostics["ks_statistic"] = nullptr;
  }
  return nlohmann::json{{"method", fit_method_name(fit.method)},
                        {"tau_hat_s", fit.tau_hat},
                        {"tau_stderr_s", fit.tau_stderr},
                        {"n_events", sample.durations.size()},
                        {"t_s_s", sample.t_s},
                        {"grid", grid},
                        {"diagnostics", diagnostics}};
}

inline FitResult run_fit(const DurationSample& sample, FitMethod method,
                         std::size_t grid_points) {
  switch (method) {
    case FitMethod::LogLinear:
      return loglinear_fit(sample, default_fit_grid(sample, grid_points));
    case FitMethod::WeightedAverage:
      return weighted_average_lifetime(sample);
    case FitMethod::TruncatedMean:
      break;
  }
  return truncated_mean_estimator(sample);
}

inline double resolve_threshold(const RunConfig& cfg, const BinnedCounts& bins) {
  switch (cfg.threshold_policy) {
    case ThresholdPolicy::Fixed: return cfg.detection.threshold;
    case ThresholdPolicy::Otsu: return suggest_threshold(bins);
    case ThresholdPolicy::LikelihoodRatio: break;
  }
  return likelihood_ratio_threshold(cfg.detector);
}

inline PipelineResult run_pipeline(const RunConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::string config_text = serialize_config(cfg);
  {
    std::ofstream out = detail::open_output(out_dir / "config.txt");
    out << config_text;
  }
  std::vector<std::string> files{"config.txt"};

  // simulate
  ShelvingIntervals intervals;
  std::optional<Trajectory> trajectory;
  const std::uint64_t sim_seed = derive_seed(cfg.seed, kStageSimulate);
  if (cfg.mode == SimMode::Full) {
    trajectory = simulate_full(cfg.scheme, cfg.duration, sim_seed);
    write_trajectory_jsonl(out_dir / "jumps.jsonl", *trajectory);
    files.push_back("jumps.jsonl");
    intervals = extract_shelving(*trajectory);
  } else {
    const double rate = effective_shelving_rate(cfg.scheme);
    if (rate > 0.0) {
      intervals = simulate_telegraph(rate, 1.0 / cfg.scheme.tau_p0,
                                     cfg.duration, sim_seed);
    } else {
      // no route onto the shelf: the record is bright throughout
      intervals.duration = cfg.duration;
      intervals.seed = sim_seed;
    }
    write_intervals(out_dir / "intervals.csv", intervals);
    files.push_back("intervals.csv");
  }

  // render
  const std::uint64_t render_seed = derive_seed(cfg.seed, kStageRender);
  BinnedCounts bins;
  if (cfg.detector.mode == DetectorMode::PerPhoton) {
    if (!trajectory)
      throw InvalidConfig("per_photon rendering requires mode = full");
    bins = render_counts_per_photon(*trajectory, cfg.detector, render_seed);
  } else {
    bins = render_counts(intervals, cfg.detector, render_seed);
  }
  write_bins(out_dir / "bins.csv", bins);
  files.push_back("bins.csv");

  // detect
  DetectorConfig detection = cfg.detection;
  detection.threshold = resolve_threshold(cfg, bins);
  const std::vector<DarkPeriod> periods = detect(bins, detection);
  write_dark(out_dir / "dark.csv", periods, detection,
             fnv1a64_file(out_dir / "bins.csv"));
  files.push_back("dark.csv");

  // fit + figures
  PipelineResult result;
  result.dir = out_dir;
  DurationSample sample;
  sample.t_s = cfg.t_s;
  for (const DarkPeriod& p : periods)
    if (p.dt >= cfg.t_s) sample.durations.push_back(p.dt);
  result.n_events = sample.durations.size();

  write_telegraph_figure(bins, periods, out_dir / "telegraph.svg",
                         out_dir / "telegraph.csv");
  files.push_back("telegraph.svg");
  files.push_back("telegraph.csv");

  if (sample.durations.empty()) {
    result.outcome = "no_events";
    result.report = nlohmann::json::object();
  } else {
    result.outcome = "ok";
    const FitResult fit = run_fit(sample, cfg.fit_method, cfg.grid_points);
    result.fit = fit;
    const std::vector<double> grid = default_fit_grid(sample, cfg.grid_points);
    result.report = make_fit_report(fit, sample, grid);
    write_json(out_dir / "report.json", result.report);
    files.push_back("report.json");

    // The survival figure needs a line in log space; use the log-linear
    // fit when the sample supports one, otherwise skip the figure.
    try {
      const SurvivalCounts counts = survival_counts(sample, grid);
      const FitResult line = loglinear_fit_counts(counts);
      write_survival_figure(counts, line, out_dir / "survival.svg",
                            out_dir / "survival.csv");
      files.push_back("survival.svg");
      files.push_back("survival.csv");
    } catch (const DegenerateFit&) {
    } catch (const EmptyInput&) {
    }
  }

  // manifest, hashed last
  nlohmann::json manifest{{"format", "qjump.manifest"},
                          {"version", kFormatVersion},
                          {"created", detail::iso8601_now()},
                          {"seed", cfg.seed},
                          {"rng", kRngContract},
                          {"outcome", result.outcome},
                          {"n_events", result.n_events},
                          {"config_text", config_text}};
  nlohmann::json file_list = nlohmann::json::array();
  for (const std::string& name : files) {
    const auto path = out_dir / name;
    file_list.push_back(
        {{"path", name},
         {"bytes", std::filesystem::file_size(path)},
         {"fnv1a64", fnv1a64_file(path)}});
  }
  manifest["files"] = file_list;
  write_json(out_dir / "manifest.json", manifest);
  return result;
}

// Fan-out over a seed list; each run writes to out_dir/seed-<n>/. Runs are
// independent and execute concurrently.
inline std::vector<PipelineResult> run_pipeline_seeds(
    const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
    const std::filesystem::path& out_dir) {
  std::vector<std::future<PipelineResult>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    RunConfig per_seed = cfg;
    per_seed.seed = seed;
    futures.push_back(std::async(
        std::launch::async,
        [per_seed, dir = out_dir / ("seed-" + std::to_string(seed))] {
          return run_pipeline(per_seed, dir);
        }));
  }
  std::vector<PipelineResult> results;
  results.reserve(seeds.size());
  for (auto& f : futures) results.push_back(f.get());
  return results;
}

}  // namespace qjump
