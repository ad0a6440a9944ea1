// qjump command-line front end.
//
// Subcommands: simulate, render, detect, fit, pipeline, report.
// Exit codes: 0 success, 2 usage/config, 3 io, 4 schema version,
// 5 missing input, 6 empty/degenerate data, 7 domain error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qjump/config.hpp"
#include "qjump/detect.hpp"
#include "qjump/figures.hpp"
#include "qjump/io.hpp"
#include "qjump/pipeline.hpp"
#include "qjump/stats.hpp"
#include "qjump/telegraph.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;  // key=value pairs
  int format_version = qjump::kFormatVersion;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required = true) {
  cmd->add_option("--config", opts.config_path, "run configuration file");
  cmd->add_option("--seed", opts.seed, "run seed (overrides the config)");
  auto* out = cmd->add_option("--out", opts.out, "output path");
  if (out_required) out->required();
  cmd->add_option("--set", opts.overrides,
                  "override any config key, e.g. --set tau_p0=0.2");
  cmd->add_option("--format-version", opts.format_version,
                  "expected file format version");
}

// File values, then --set overrides, then the dedicated flags.
void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

qjump::RunConfig load_config(const CommonOpts& opts) {
  qjump::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = qjump::read_config(opts.config_path);
  if (!opts.overrides.empty()) {
    std::string text = qjump::serialize_config(cfg);
    for (const std::string& kv : opts.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw qjump::InvalidConfig("--set expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq) + " = ";
      const auto pos = text.find("\n" + key);
      if (pos == std::string::npos && text.rfind(key, 0) != 0)
        throw qjump::InvalidConfig("--set: unknown key '" + kv.substr(0, eq) + "'");
      const auto start = pos == std::string::npos ? 0 : pos + 1;
      const auto line_end = text.find('\n', start);
      text.replace(start, line_end - start, key + kv.substr(eq + 1));
    }
    cfg = qjump::parse_config(text);
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.format_version != qjump::kFormatVersion)
    throw qjump::SchemaVersionMismatch(
        "this build writes format_version " +
        std::to_string(qjump::kFormatVersion));
  return cfg;
}

int cmd_simulate(const CommonOpts& opts, const std::optional<double>& duration,
                 const std::string& mode) {
  qjump::RunConfig cfg = load_config(opts);
  if (duration) cfg.duration = *duration;
  if (!mode.empty())
    cfg.mode = mode == "full" ? qjump::SimMode::Full : qjump::SimMode::Coarse;
  validate(cfg);

  const std::uint64_t sim_seed =
      qjump::derive_seed(cfg.seed, qjump::kStageSimulate);
  ensure_parent(opts.out);
  if (cfg.mode == qjump::SimMode::Full) {
    const qjump::Trajectory trajectory =
        qjump::simulate_full(cfg.scheme, cfg.duration, sim_seed);
    qjump::write_trajectory_jsonl(opts.out, trajectory);
    std::cout << "wrote " << opts.out << " (" << trajectory.jumps.size()
              << " jumps)\n";
  } else {
    const double rate = qjump::effective_shelving_rate(cfg.scheme);
    qjump::ShelvingIntervals intervals;
    if (rate > 0.0) {
      intervals = qjump::simulate_telegraph(rate, 1.0 / cfg.scheme.tau_p0,
                                            cfg.duration, sim_seed);
    } else {
      intervals.duration = cfg.duration;
      intervals.seed = sim_seed;
    }
    qjump::write_intervals(opts.out, intervals);
    std::cout << "wrote " << opts.out << " (" << intervals.intervals.size()
              << " intervals)\n";
  }
  return 0;
}

int cmd_render(const CommonOpts& opts, const std::string& input) {
  qjump::RunConfig cfg = load_config(opts);
  const std::uint64_t render_seed =
      opts.seed ? *opts.seed : qjump::derive_seed(cfg.seed, qjump::kStageRender);

  // Sniff the input kind from its first line.
  std::ifstream probe(input);
  if (!probe) throw qjump::MissingInput("no such file: " + input);
  std::string first;
  std::getline(probe, first);
  probe.close();

  qjump::BinnedCounts bins;
  if (first.rfind("# qjump.intervals", 0) == 0) {
    if (cfg.detector.mode == qjump::DetectorMode::PerPhoton)
      throw qjump::InvalidParams(
          "per_photon rendering needs a trajectory file, not intervals");
    bins = qjump::render_counts(qjump::read_intervals(input), cfg.detector,
                                render_seed);
  } else {
    const qjump::Trajectory trajectory = qjump::read_trajectory_jsonl(input);
    if (cfg.detector.mode == qjump::DetectorMode::PerPhoton)
      bins = qjump::render_counts_per_photon(trajectory, cfg.detector,
                                             render_seed);
    else
      bins = qjump::render_counts(qjump::extract_shelving(trajectory),
                                  cfg.detector, render_seed);
  }
  ensure_parent(opts.out);
  qjump::write_bins(opts.out, bins);
  std::cout << "wrote " << opts.out << " (" << bins.counts.size() << " bins)\n";
  return 0;
}

int cmd_detect(const CommonOpts& opts, const std::string& input,
               const std::string& threshold) {
  qjump::RunConfig cfg = load_config(opts);
  const qjump::BinnedCounts bins = qjump::read_bins(input);
  qjump::DetectorConfig detection = cfg.detection;
  if (!threshold.empty()) {
    if (threshold == "otsu")
      detection.threshold = qjump::suggest_threshold(bins);
    else if (threshold == "auto")
      detection.threshold = qjump::likelihood_ratio_threshold(bins.params);
    else
      detection.threshold = qjump::detail::parse_double(threshold, "threshold");
  } else {
    switch (cfg.threshold_policy) {
      case qjump::ThresholdPolicy::Fixed: break;
      case qjump::ThresholdPolicy::Otsu:
        detection.threshold = qjump::suggest_threshold(bins);
        break;
      case qjump::ThresholdPolicy::LikelihoodRatio:
        detection.threshold = qjump::likelihood_ratio_threshold(bins.params);
        break;
    }
  }
  const std::vector<qjump::DarkPeriod> periods = qjump::detect(bins, detection);
  ensure_parent(opts.out);
  qjump::write_dark(opts.out, periods, detection, qjump::fnv1a64_file(input));
  std::cout << "wrote " << opts.out << " (" << periods.size()
            << " dark periods)\n";
  return 0;
}

int cmd_fit(const CommonOpts& opts, const std::string& input,
            const std::string& method, const std::optional<double>& t_s) {
  qjump::RunConfig cfg = load_config(opts);
  if (!method.empty()) cfg.fit_method = qjump::parse_fit_method(method);
  if (t_s) cfg.t_s = *t_s;

  const std::vector<qjump::DarkPeriod> periods = qjump::read_dark(input);
  qjump::DurationSample sample;
  sample.t_s = cfg.t_s;
  for (const qjump::DarkPeriod& p : periods)
    if (p.dt >= cfg.t_s) sample.durations.push_back(p.dt);
  const qjump::FitResult fit =
      qjump::run_fit(sample, cfg.fit_method, cfg.grid_points);
  const std::vector<double> grid =
      qjump::default_fit_grid(sample, cfg.grid_points);
  const nlohmann::json report = qjump::make_fit_report(fit, sample, grid);
  ensure_parent(opts.out);
  qjump::write_json(opts.out, report);
  std::printf("tau_hat = %.6g s  (stderr %.3g, n = %zu, method %s)\n",
              fit.tau_hat, fit.tau_stderr, sample.durations.size(),
              qjump::fit_method_name(fit.method));
  std::cout << "wrote " << opts.out << "\n";
  return 0;
}

int cmd_pipeline(const CommonOpts& opts, const std::optional<double>& duration,
                 const std::string& mode, const std::string& seeds_csv) {
  qjump::RunConfig cfg = load_config(opts);
  if (duration) cfg.duration = *duration;
  if (!mode.empty())
    cfg.mode = mode == "full" ? qjump::SimMode::Full : qjump::SimMode::Coarse;

  auto print_result = [](const qjump::PipelineResult& r) {
    if (r.outcome == "no_events") {
      std::cout << r.dir.string() << ": no dark periods detected (outcome "
                << r.outcome << ")\n";
    } else {
      std::printf("%s: n_events = %zu, tau_hat = %.6g s (stderr %.3g)\n",
                  r.dir.string().c_str(), r.n_events, r.fit->tau_hat,
                  r.fit->tau_stderr);
    }
  };

  if (!seeds_csv.empty()) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= seeds_csv.size()) {
      auto comma = seeds_csv.find(',', start);
      if (comma == std::string::npos) comma = seeds_csv.size();
      seeds.push_back(qjump::detail::parse_u64(
          seeds_csv.substr(start, comma - start), "seeds"));
      start = comma + 1;
    }
    const auto results = qjump::run_pipeline_seeds(cfg, seeds, opts.out);
    for (const auto& r : results) print_result(r);
    return 0;
  }
  const qjump::PipelineResult result = qjump::run_pipeline(cfg, opts.out);
  print_result(result);
  return 0;
}

int cmd_report(const CommonOpts& opts, const std::string& kind,
               const std::string& bins_path, const std::string& dark_path,
               const std::optional<double>& t_s) {
  qjump::RunConfig cfg = load_config(opts);
  if (t_s) cfg.t_s = *t_s;
  const fs::path svg = opts.out;
  ensure_parent(svg);
  fs::path csv = svg;
  csv.replace_extension(".csv");

  if (kind == "telegraph") {
    const qjump::BinnedCounts bins = qjump::read_bins(bins_path);
    const std::vector<qjump::DarkPeriod> periods =
        dark_path.empty() ? std::vector<qjump::DarkPeriod>{}
                          : qjump::read_dark(dark_path);
    qjump::write_telegraph_figure(bins, periods, svg, csv);
  } else if (kind == "survival") {
    const std::vector<qjump::DarkPeriod> periods = qjump::read_dark(dark_path);
    qjump::DurationSample sample;
    sample.t_s = cfg.t_s;
    for (const qjump::DarkPeriod& p : periods)
      if (p.dt >= cfg.t_s) sample.durations.push_back(p.dt);
    if (sample.durations.empty())
      throw qjump::EmptySample("report: no dark periods above t_s");
    const std::vector<double> grid =
        qjump::default_fit_grid(sample, cfg.grid_points);
    const qjump::SurvivalCounts counts = qjump::survival_counts(sample, grid);
    const qjump::FitResult line = qjump::loglinear_fit_counts(counts);
    qjump::write_survival_figure(counts, line, svg, csv);
  } else {
    throw qjump::InvalidConfig("report kind must be telegraph or survival");
  }
  std::cout << "wrote " << svg.string() << " and " << csv.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-ion quantum-jump telegraph simulator and lifetime fitter"};
  app.require_subcommand(1);

  CommonOpts sim_opts, render_opts, detect_opts, fit_opts, pipe_opts, report_opts;
  std::optional<double> sim_duration, pipe_duration, fit_ts, report_ts;
  std::string sim_mode, pipe_mode, pipe_seeds;
  std::string render_input, detect_input, detect_threshold, fit_input, fit_method;
  std::string report_kind, report_bins, report_dark;

  auto* sim = app.add_subcommand("simulate", "simulate shelving dynamics");
  add_common(sim, sim_opts);
  sim->add_option("--duration", sim_duration, "simulated time, s");
  sim->add_option("--mode", sim_mode, "full or coarse")
      ->check(CLI::IsMember({"full", "coarse"}));

  auto* render = app.add_subcommand("render", "render photon counts");
  add_common(render, render_opts);
  render->add_option("--input", render_input, "intervals CSV or trajectory JSONL")
      ->required();

  auto* det = app.add_subcommand("detect", "detect dark periods");
  add_common(det, detect_opts);
  det->add_option("--input", detect_input, "bins CSV")->required();
  det->add_option("--threshold", detect_threshold,
                  "counts per bin, or 'auto' (rate-based) or 'otsu'");

  auto* fit = app.add_subcommand("fit", "estimate the shelf lifetime");
  add_common(fit, fit_opts);
  fit->add_option("--input", fit_input, "dark-period CSV")->required();
  fit->add_option("--method", fit_method,
                  "mle|truncated_mean|loglinear|weighted_average");
  fit->add_option("--t-s", fit_ts, "truncation threshold, s");

  auto* pipe = app.add_subcommand("pipeline", "run the full chain");
  add_common(pipe, pipe_opts);
  pipe->add_option("--duration", pipe_duration, "simulated time, s");
  pipe->add_option("--mode", pipe_mode, "full or coarse")
      ->check(CLI::IsMember({"full", "coarse"}));
  pipe->add_option("--seeds", pipe_seeds,
                   "comma-separated seed list; runs fan out to seed-<n>/");

  auto* rep = app.add_subcommand("report", "emit SVG figure + data CSV");
  add_common(rep, report_opts);
  rep->add_option("--kind", report_kind, "telegraph or survival")->required();
  rep->add_option("--bins", report_bins, "bins CSV (telegraph)");
  rep->add_option("--dark", report_dark, "dark-period CSV");
  rep->add_option("--t-s", report_ts, "truncation threshold, s");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_opts, sim_duration, sim_mode);
    if (render->parsed()) return cmd_render(render_opts, render_input);
    if (det->parsed()) return cmd_detect(detect_opts, detect_input, detect_threshold);
    if (fit->parsed()) return cmd_fit(fit_opts, fit_input, fit_method, fit_ts);
    if (pipe->parsed())
      return cmd_pipeline(pipe_opts, pipe_duration, pipe_mode, pipe_seeds);
    if (rep->parsed())
      return cmd_report(report_opts, report_kind, report_bins, report_dark,
                        report_ts);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(qjump::exit_code::usage);
  } catch (const qjump::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
