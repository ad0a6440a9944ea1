#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qjump/errors.hpp"
#include "qjump/rng.hpp"
#include "qjump/scheme.hpp"

namespace qjump {

// Detector model turning shelving intervals (or a full trajectory) into a
// binned photon-count time series, the observable telegraph signal.

enum class DetectorMode : std::uint8_t { RateModel, PerPhoton };

struct DetectorParams {
  double bright_count_rate = 2000.0;  // detected counts/s while cycling
  double dark_count_rate = 40.0;      // background counts/s
  double bin_width = 0.01;            // s
  DetectorMode mode = DetectorMode::RateModel;
  double efficiency = 0.1;            // per-photon mode only
};

inline void validate(const DetectorParams& p) {
  if (!(p.bin_width > 0.0)) throw InvalidParams("bin_width must be > 0");
  if (!(p.dark_count_rate >= 0.0))
    throw InvalidParams("dark_count_rate must be >= 0");
  if (!(p.bright_count_rate > p.dark_count_rate))
    throw InvalidParams("bright_count_rate must exceed dark_count_rate");
  // efficiency 0 is allowed: a blind detector renders background only
  if (!(p.efficiency >= 0.0) || !(p.efficiency <= 1.0))
    throw InvalidParams("efficiency must lie in [0, 1]");
}

struct BinnedCounts {
  double t_start = 0.0;  // left edge of the first bin, s
  double bin_width = 0.0;
  std::vector<std::uint32_t> counts;
  std::uint64_t seed = 0;
  DetectorParams params;
};

// Fraction of [lo, hi) not covered by a shelving interval. Accumulated
// overlap can overshoot the bin width by rounding, so the result is
// clamped into [0, 1].
inline double bin_bright_fraction(const ShelvingIntervals& s, double lo,
                                  double hi) {
  double covered = 0.0;
  for (const Interval& iv : s.intervals) {
    if (iv.t_end <= lo) continue;
    if (iv.t0 >= hi) break;
    covered += std::min(iv.t_end, hi) - std::max(iv.t0, lo);
  }
  return std::min(1.0, std::max(0.0, 1.0 - covered / (hi - lo)));
}

namespace detail {

inline std::size_t bin_count(double duration, double bin_width) {
  return static_cast<std::size_t>(std::ceil(duration / bin_width));
}

}  // namespace detail

// Rate-model rendering: each bin's count is Poisson with mean
//   bin_width * (bright_count_rate * f_bright + dark_count_rate),
// where f_bright is the exact fraction of the bin not covered by a
// shelving interval (partial overlaps resolved analytically, no
// sub-sampling). The trailing partial bin, when the duration is not a
// whole number of bins, is filled as if bright past the end of the record.
// One Poisson draw per bin, in bin order.
inline BinnedCounts render_counts(const ShelvingIntervals& intervals,
                                  const DetectorParams& params,
                                  std::uint64_t seed) {
  validate(params);
  if (params.mode != DetectorMode::RateModel)
    throw InvalidParams("render_counts requires rate_model mode");
  if (!(intervals.duration > 0.0))
    throw InvalidParams("render_counts: empty time range");

  BinnedCounts out;
  out.bin_width = params.bin_width;
  out.seed = seed;
  out.params = params;
  const std::size_t n = detail::bin_count(intervals.duration, params.bin_width);
  out.counts.resize(n);

  Rng rng(seed);
  const double w = params.bin_width;
  std::size_t next_interval = 0;  // first interval that can still overlap
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = static_cast<double>(k) * w;
    const double hi = lo + w;
    while (next_interval < intervals.intervals.size() &&
           intervals.intervals[next_interval].t_end <= lo)
      ++next_interval;
    double covered = 0.0;
    for (std::size_t i = next_interval; i < intervals.intervals.size(); ++i) {
      const Interval& iv = intervals.intervals[i];
      if (iv.t0 >= hi) break;
      covered += std::min(iv.t_end, hi) - std::max(iv.t0, lo);
    }
    const double f_bright = std::min(1.0, std::max(0.0, 1.0 - covered / w));
    const double mean =
        w * (params.bright_count_rate * f_bright + params.dark_count_rate);
    out.counts[k] = static_cast<std::uint32_t>(rng.poisson(mean));
  }
  return out;
}

// Per-photon rendering: every fluorescence (A1) jump is detected
// independently with probability `efficiency` and histogrammed into its
// bin; Poisson background with mean dark_count_rate*bin_width is then added
// per bin. Draw order: one Bernoulli word per A1 record in time order,
// then one Poisson draw per bin.
inline BinnedCounts render_counts_per_photon(const Trajectory& trajectory,
                                             const DetectorParams& params,
                                             std::uint64_t seed) {
  validate(params);
  if (params.mode != DetectorMode::PerPhoton)
    throw InvalidParams("render_counts_per_photon requires per_photon mode");
  if (!(trajectory.duration > 0.0))
    throw InvalidParams("render_counts_per_photon: empty time range");

  BinnedCounts out;
  out.bin_width = params.bin_width;
  out.seed = seed;
  out.params = params;
  const std::size_t n =
      detail::bin_count(trajectory.duration, params.bin_width);
  out.counts.resize(n);

  Rng rng(seed);
  for (const JumpRecord& j : trajectory.jumps) {
    if (j.channel != Channel::A1) continue;
    if (!rng.bernoulli(params.efficiency)) continue;
    const auto k = static_cast<std::size_t>(j.t / params.bin_width);
    if (k < n) ++out.counts[k];
  }
  const double background = params.dark_count_rate * params.bin_width;
  for (std::size_t k = 0; k < n; ++k)
    out.counts[k] += static_cast<std::uint32_t>(rng.poisson(background));
  return out;
}

}  // namespace qjump
