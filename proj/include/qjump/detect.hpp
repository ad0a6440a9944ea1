#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qjump/errors.hpp"
#include "qjump/photon.hpp"

namespace qjump {

// Dark-period detection on a binned count record.

struct DetectorConfig {
  double threshold = 0.0;           // counts per bin; dark means counts <= threshold
  double min_dark_duration = 0.070; // s; shorter periods are discarded
  int hysteresis_bins = 1;          // consecutive bins required to switch state
};

inline void validate(const DetectorConfig& cfg) {
  if (!(cfg.threshold >= 0.0)) throw InvalidParams("threshold must be >= 0");
  if (!(cfg.min_dark_duration >= 0.0))
    throw InvalidParams("min_dark_duration must be >= 0");
  if (cfg.hysteresis_bins < 1)
    throw InvalidParams("hysteresis_bins must be >= 1");
}

struct DarkPeriod {
  double t0;     // onset, s
  double t_end;  // s
  double dt;     // t_end - t0
};

// Threshold scan of the record. A dark period opens at the left edge of the
// first of >= hysteresis_bins consecutive bins with counts <= threshold and
// closes at the left edge of the first of >= hysteresis_bins consecutive
// bins with counts > threshold. Onset and end are quantized to bin edges.
// Periods shorter than min_dark_duration are dropped, as are periods
// touching either end of the record (their true extent is censored).
inline std::vector<DarkPeriod> detect(const BinnedCounts& bins,
                                      const DetectorConfig& cfg) {
  validate(cfg);
  if (bins.counts.empty()) throw EmptyInput("detect: no bins");
  const std::size_t n = bins.counts.size();
  const std::size_t h = static_cast<std::size_t>(cfg.hysteresis_bins);
  const double w = bins.bin_width;

  auto low = [&](std::size_t i) {
    return static_cast<double>(bins.counts[i]) <= cfg.threshold;
  };
  auto run_length = [&](std::size_t i, bool want_low) {
    std::size_t j = i;
    while (j < n && low(j) == want_low) ++j;
    return j - i;
  };

  std::vector<DarkPeriod> periods;
  bool dark = false;
  double onset = 0.0;
  bool onset_at_start = false;
  std::size_t i = 0;
  while (i < n) {
    const bool is_low = low(i);
    const std::size_t run = run_length(i, is_low);
    if (!dark && is_low && run >= h) {
      dark = true;
      onset = bins.t_start + static_cast<double>(i) * w;
      onset_at_start = (i == 0);
    } else if (dark && !is_low && run >= h) {
      const double end = bins.t_start + static_cast<double>(i) * w;
      if (!onset_at_start) periods.push_back({onset, end, end - onset});
      dark = false;
    }
    i += run;
  }
  // A period still open at the end of the record is censored; drop it.

  std::erase_if(periods, [&](const DarkPeriod& p) {
    return p.dt < cfg.min_dark_duration;
  });
  return periods;
}

// Threshold suggested by the count histogram itself, for records where both
// populations are substantially represented:
//   1. split the integer histogram at the threshold maximizing the
//      between-class variance w0*w1*(mu1-mu0)^2 (exhaustive scan; of tied
//      maxima the middle one is taken, which for two well-separated spikes
//      lands mid-valley);
//   2. reject unless mu1 - mu0 >= 2 * pooled within-class sigma;
//   3. return the midpoint of the two class modes.
inline double suggest_threshold(const BinnedCounts& bins) {
  if (bins.counts.empty()) throw EmptyInput("suggest_threshold: no bins");
  const std::uint32_t vmax =
      *std::max_element(bins.counts.begin(), bins.counts.end());
  const std::uint32_t vmin =
      *std::min_element(bins.counts.begin(), bins.counts.end());
  if (vmax == vmin)
    throw NotBimodal("suggest_threshold: all counts identical");

  std::vector<std::uint64_t> hist(static_cast<std::size_t>(vmax) + 1, 0);
  for (std::uint32_t c : bins.counts) ++hist[c];
  const double total = static_cast<double>(bins.counts.size());

  // Prefix sums over the histogram give every split in one pass each.
  double best = -1.0;
  std::vector<std::uint32_t> achievers;
  double n0 = 0.0, sum0 = 0.0;
  double sum_all = 0.0;
  for (std::size_t v = 0; v < hist.size(); ++v)
    sum_all += static_cast<double>(hist[v]) * static_cast<double>(v);
  for (std::uint32_t t = vmin; t < vmax; ++t) {
    n0 += static_cast<double>(hist[t]);
    sum0 += static_cast<double>(hist[t]) * static_cast<double>(t);
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double mu0 = sum0 / n0;
    const double mu1 = (sum_all - sum0) / n1;
    const double variance =
        (n0 / total) * (n1 / total) * (mu1 - mu0) * (mu1 - mu0);
    if (variance > best * (1.0 + 1e-12)) {
      best = variance;
      achievers.assign(1, t);
    } else if (variance >= best * (1.0 - 1e-12)) {
      achievers.push_back(t);
    }
  }
  const std::uint32_t split = achievers[achievers.size() / 2];

  double cls_n[2] = {0.0, 0.0}, cls_sum[2] = {0.0, 0.0};
  for (std::size_t v = 0; v < hist.size(); ++v) {
    const int c = v <= split ? 0 : 1;
    cls_n[c] += static_cast<double>(hist[v]);
    cls_sum[c] += static_cast<double>(hist[v]) * static_cast<double>(v);
  }
  const double mu0 = cls_sum[0] / cls_n[0];
  const double mu1 = cls_sum[1] / cls_n[1];
  double ss_within = 0.0;
  std::size_t mode[2] = {0, 0};
  std::uint64_t mode_count[2] = {0, 0};
  for (std::size_t v = 0; v < hist.size(); ++v) {
    if (hist[v] == 0) continue;
    const int c = v <= split ? 0 : 1;
    const double d = static_cast<double>(v) - (c == 0 ? mu0 : mu1);
    ss_within += static_cast<double>(hist[v]) * d * d;
    if (hist[v] > mode_count[c]) {
      mode_count[c] = hist[v];
      mode[c] = v;
    }
  }
  const double sigma_within = std::sqrt(ss_within / total);
  if (mu1 - mu0 < 2.0 * sigma_within)
    throw NotBimodal("suggest_threshold: class separation below 2 sigma");
  return 0.5 * (static_cast<double>(mode[0]) + static_cast<double>(mode[1]));
}

// Default threshold when detector rates are known: the crossing point of
// the two Poisson likelihoods with means mu_dark = dark_rate*w and
// mu_bright = (bright_rate+dark_rate)*w, namely
//   (mu_bright - mu_dark) / ln(mu_bright/mu_dark).
// Robust at any bright/dark bin ratio, unlike the histogram split.
inline double likelihood_ratio_threshold(const DetectorParams& params) {
  validate(params);
  const double w = params.bin_width;
  const double mu_dark = params.dark_count_rate * w;
  const double mu_bright = (params.bright_count_rate + params.dark_count_rate) * w;
  if (mu_dark <= 0.0) return 0.0;  // noiseless: any nonzero count is bright
  return (mu_bright - mu_dark) / std::log(mu_bright / mu_dark);
}

}  // namespace qjump
