#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "qjump/detect.hpp"
#include "qjump/errors.hpp"
#include "qjump/io.hpp"
#include "qjump/photon.hpp"
#include "qjump/scheme.hpp"
#include "qjump/stats.hpp"

namespace qjump {

// Run configuration: a flat "key = value" text file, one key per line,
// '#' comments, with a mandatory format_version key. Unknown keys are
// rejected so typos cannot silently fall back to defaults. The same keys
// are exposed as CLI flags; flags override file values.

enum class SimMode : std::uint8_t { Full, Coarse };

// How the detection threshold is chosen when none is given explicitly:
// from the detector rates (likelihood_ratio) or from the count histogram
// (otsu, which needs both populations well represented).
enum class ThresholdPolicy : std::uint8_t { Fixed, LikelihoodRatio, Otsu };

struct RunConfig {
  LevelScheme scheme;
  DetectorParams detector;
  DetectorConfig detection;
  ThresholdPolicy threshold_policy = ThresholdPolicy::LikelihoodRatio;
  double duration = 30000.0;  // s
  std::uint64_t seed = 42;
  SimMode mode = SimMode::Coarse;
  double t_s = 0.070;  // stats truncation threshold, s
  FitMethod fit_method = FitMethod::TruncatedMean;
  std::size_t grid_points = 20;
};

inline void validate(const RunConfig& cfg) {
  validate(cfg.scheme);
  validate(cfg.detector);
  validate(cfg.detection);
  if (!(cfg.duration > 0.0)) throw InvalidConfig("duration must be > 0");
  if (!(cfg.t_s >= 0.0)) throw InvalidConfig("t_s must be >= 0");
  if (cfg.grid_points < 2) throw InvalidConfig("grid_points must be >= 2");
}

inline std::string serialize_config(const RunConfig& cfg) {
  using detail::fmt_double_exact;
  std::string threshold;
  switch (cfg.threshold_policy) {
    case ThresholdPolicy::Fixed:
      threshold = fmt_double_exact(cfg.detection.threshold);
      break;
    case ThresholdPolicy::LikelihoodRatio: threshold = "auto"; break;
    case ThresholdPolicy::Otsu: threshold = "otsu"; break;
  }
  std::string out;
  out += "format_version = " + std::to_string(kFormatVersion) + "\n";
  out += "mode = " + std::string(cfg.mode == SimMode::Full ? "full" : "coarse") + "\n";
  out += "duration = " + fmt_double_exact(cfg.duration) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "tau_p1 = " + fmt_double_exact(cfg.scheme.tau_p1) + "\n";
  out += "tau_p0 = " + fmt_double_exact(cfg.scheme.tau_p0) + "\n";
  out += "branch_p1_to_p0 = " + fmt_double_exact(cfg.scheme.branch_p1_to_p0) + "\n";
  out += "excitation_rate = " + fmt_double_exact(cfg.scheme.excitation_rate) + "\n";
  out += "direct_shelving_rate = " +
         fmt_double_exact(cfg.scheme.direct_shelving_rate) + "\n";
  out += "bright_count_rate = " +
         fmt_double_exact(cfg.detector.bright_count_rate) + "\n";
  out += "dark_count_rate = " + fmt_double_exact(cfg.detector.dark_count_rate) + "\n";
  out += "bin_width = " + fmt_double_exact(cfg.detector.bin_width) + "\n";
  out += "detector_mode = " +
         std::string(cfg.detector.mode == DetectorMode::PerPhoton ? "per_photon"
                                                                  : "rate_model") +
         "\n";
  out += "efficiency = " + fmt_double_exact(cfg.detector.efficiency) + "\n";
  out += "threshold = " + threshold + "\n";
  out += "min_dark_duration = " +
         fmt_double_exact(cfg.detection.min_dark_duration) + "\n";
  out += "hysteresis_bins = " + std::to_string(cfg.detection.hysteresis_bins) + "\n";
  out += "t_s = " + fmt_double_exact(cfg.t_s) + "\n";
  out += "fit_method = " + std::string(fit_method_name(cfg.fit_method)) + "\n";
  out += "grid_points = " + std::to_string(cfg.grid_points) + "\n";
  return out;
}

inline FitMethod parse_fit_method(const std::string& name) {
  if (name == "loglinear") return FitMethod::LogLinear;
  if (name == "truncated_mean" || name == "mle") return FitMethod::TruncatedMean;
  if (name == "weighted_average") return FitMethod::WeightedAverage;
  throw InvalidConfig("unknown fit_method '" + name + "'");
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("line " + std::to_string(line_no) +
                          " is not 'key = value': '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (kv.count(key))
      throw InvalidConfig("duplicate key '" + key + "'");
    kv[key] = value;
  }

  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_double = [&take](const char* key, double& slot) {
    if (auto v = take(key)) slot = detail::parse_double(*v, key);
  };

  if (auto v = take("format_version")) {
    if (detail::parse_u64(*v, "format_version") != kFormatVersion)
      throw SchemaVersionMismatch("config format_version " + *v);
  } else {
    throw InvalidConfig("missing format_version key");
  }
  if (auto v = take("mode")) {
    if (*v == "full")
      cfg.mode = SimMode::Full;
    else if (*v == "coarse")
      cfg.mode = SimMode::Coarse;
    else
      throw InvalidConfig("mode must be 'full' or 'coarse', got '" + *v + "'");
  }
  take_double("duration", cfg.duration);
  if (auto v = take("seed")) cfg.seed = detail::parse_u64(*v, "seed");
  take_double("tau_p1", cfg.scheme.tau_p1);
  take_double("tau_p0", cfg.scheme.tau_p0);
  take_double("branch_p1_to_p0", cfg.scheme.branch_p1_to_p0);
  take_double("excitation_rate", cfg.scheme.excitation_rate);
  take_double("direct_shelving_rate", cfg.scheme.direct_shelving_rate);
  take_double("bright_count_rate", cfg.detector.bright_count_rate);
  take_double("dark_count_rate", cfg.detector.dark_count_rate);
  take_double("bin_width", cfg.detector.bin_width);
  if (auto v = take("detector_mode")) {
    if (*v == "rate_model")
      cfg.detector.mode = DetectorMode::RateModel;
    else if (*v == "per_photon")
      cfg.detector.mode = DetectorMode::PerPhoton;
    else
      throw InvalidConfig("detector_mode must be rate_model or per_photon");
  }
  take_double("efficiency", cfg.detector.efficiency);
  if (auto v = take("threshold")) {
    if (*v == "auto") {
      cfg.threshold_policy = ThresholdPolicy::LikelihoodRatio;
    } else if (*v == "otsu") {
      cfg.threshold_policy = ThresholdPolicy::Otsu;
    } else {
      cfg.threshold_policy = ThresholdPolicy::Fixed;
      cfg.detection.threshold = detail::parse_double(*v, "threshold");
    }
  }
  take_double("min_dark_duration", cfg.detection.min_dark_duration);
  if (auto v = take("hysteresis_bins"))
    cfg.detection.hysteresis_bins =
        static_cast<int>(detail::parse_u64(*v, "hysteresis_bins"));
  take_double("t_s", cfg.t_s);
  if (auto v = take("fit_method")) cfg.fit_method = parse_fit_method(*v);
  if (auto v = take("grid_points"))
    cfg.grid_points = static_cast<std::size_t>(detail::parse_u64(*v, "grid_points"));

  if (!kv.empty()) throw InvalidConfig("unknown key '" + kv.begin()->first + "'");
  return cfg;
}

inline RunConfig read_config(const std::filesystem::path& path) {
  return parse_config(read_file_bytes(path));
}

}  // namespace qjump
