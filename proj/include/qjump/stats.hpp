#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qjump/errors.hpp"

namespace qjump {

// Lifetime statistics for left-truncated dwell durations.
//
// The data are dark-period durations dt_i, every one at least the
// detection floor t_s (durations below it are unobservable). Under an
// exponential law with mean tau, memorylessness makes dt_i - t_s again
// exponential with mean tau, which is what all three estimators exploit:
//
//   truncated_mean        tau_hat = mean(dt) - t_s, the maximum-likelihood
//                         estimator; stderr tau_hat/sqrt(n).
//   weighted_average      the integral of the empirical survival function
//                         from t_s up, accumulated as a Riemann sum over
//                         the sorted sample; algebraically identical to the
//                         truncated mean but computed by the survival route.
//   loglinear             least squares on (t_k, ln N(t_k: dt > t_k));
//                         tau_hat = -1/slope. The Fig.-3-style check that
//                         the survival counts actually fall on a line.

struct DurationSample {
  std::vector<double> durations;  // each >= t_s
  double t_s = 0.070;             // left-truncation threshold, s
};

struct SurvivalCounts {
  std::vector<double> grid;                  // strictly increasing times
  std::vector<std::uint64_t> n_dark_longer;  // #(dt >  t_k)
  std::vector<std::uint64_t> n_decayed;      // #(dt <= t_k)
  std::uint64_t total = 0;
};

enum class FitMethod : std::uint8_t { LogLinear, TruncatedMean, WeightedAverage };

inline const char* fit_method_name(FitMethod m) {
  switch (m) {
    case FitMethod::LogLinear: return "loglinear";
    case FitMethod::TruncatedMean: return "truncated_mean";
    case FitMethod::WeightedAverage: return "weighted_average";
  }
  return "?";
}

struct FitResult {
  double tau_hat = 0.0;     // s
  double tau_stderr = 0.0;  // s
  double intercept = 0.0;   // loglinear only; 0 otherwise
  std::size_t n_points = 0; // grid points used (loglinear) or sample size
  FitMethod method = FitMethod::TruncatedMean;
};

namespace detail {

inline void require_nonempty(const DurationSample& s, const char* who) {
  if (s.durations.empty()) throw EmptySample(std::string(who) + ": no durations");
}

inline void require_at_least_ts(const DurationSample& s, const char* who) {
  for (double d : s.durations)
    if (d < s.t_s)
      throw InvalidSample(std::string(who) + ": duration below t_s");
}

struct OlsLine {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // 0 when the fit has no residual degrees of freedom
};

inline OlsLine ols_line(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("ols_line: x values coincide");
  OlsLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (line.intercept + line.slope * xs[i]);
    ss_res += r * r;
  }
  line.slope_se =
      n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
  return line;
}

}  // namespace detail

// Exact integer counts of the sample against a strictly increasing grid:
// "dark longer" uses the strict inequality dt > t_k, "decayed" the weak
// dt <= t_k, so ties land on the decayed side and the two columns always
// sum to the sample size.
inline SurvivalCounts survival_counts(const DurationSample& sample,
                                      const std::vector<double>& grid) {
  detail::require_nonempty(sample, "survival_counts");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      throw UnsortedGrid("survival_counts: grid must be strictly increasing");

  std::vector<double> sorted = sample.durations;
  std::sort(sorted.begin(), sorted.end());
  SurvivalCounts out;
  out.grid = grid;
  out.total = sorted.size();
  out.n_dark_longer.reserve(grid.size());
  out.n_decayed.reserve(grid.size());
  for (double t : grid) {
    const auto decayed = static_cast<std::uint64_t>(
        std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    out.n_decayed.push_back(decayed);
    out.n_dark_longer.push_back(out.total - decayed);
  }
  return out;
}

inline std::vector<double> survival_ratio(const SurvivalCounts& counts) {
  std::vector<double> r(counts.grid.size());
  for (std::size_t k = 0; k < r.size(); ++k)
    r[k] = static_cast<double>(counts.n_dark_longer[k]) /
           static_cast<double>(counts.total);
  return r;
}

struct ConservationReport {
  bool all_ok = true;
  std::vector<bool> point_ok;
};

// Checks n_decayed + n_dark_longer == total at every grid point, in integer
// arithmetic. Holds by construction for survival_counts output; the point
// of the check is counts that arrived from elsewhere.
inline ConservationReport conservation_check(const SurvivalCounts& counts) {
  ConservationReport report;
  report.point_ok.reserve(counts.grid.size());
  for (std::size_t k = 0; k < counts.grid.size(); ++k) {
    const bool ok =
        counts.n_decayed[k] + counts.n_dark_longer[k] == counts.total;
    report.point_ok.push_back(ok);
    report.all_ok = report.all_ok && ok;
  }
  return report;
}

// Least-squares line through (t_k, ln n_dark_longer_k) for the grid points
// with n_dark_longer >= grid_floor; tau_hat = -1/slope, with the slope's
// ordinary least-squares standard error propagated through. Points below
// grid_floor are dropped to keep log-of-small-count noise out of the fit.
inline FitResult loglinear_fit_counts(const SurvivalCounts& counts,
                                      std::uint64_t grid_floor = 5) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < counts.grid.size(); ++k) {
    if (counts.n_dark_longer[k] < grid_floor) continue;
    xs.push_back(counts.grid[k]);
    ys.push_back(std::log(static_cast<double>(counts.n_dark_longer[k])));
  }
  const std::size_t n = xs.size();
  if (n < 2) throw DegenerateFit("loglinear_fit: fewer than 2 usable grid points");

  const detail::OlsLine line = detail::ols_line(xs, ys);
  if (line.slope >= 0.0)
    throw NonDecayingSample("loglinear_fit: survival counts do not decay");

  FitResult fit;
  fit.method = FitMethod::LogLinear;
  fit.tau_hat = -1.0 / line.slope;
  fit.tau_stderr = line.slope_se / (line.slope * line.slope);
  fit.intercept = line.intercept;
  fit.n_points = n;
  return fit;
}

inline FitResult loglinear_fit(const DurationSample& sample,
                               const std::vector<double>& grid,
                               std::uint64_t grid_floor = 5) {
  detail::require_at_least_ts(sample, "loglinear_fit");
  return loglinear_fit_counts(survival_counts(sample, grid), grid_floor);
}

// Default fit grid: 20 equally spaced points from t_s to the 90th
// percentile duration (nearest-rank), mirroring the usable range of a
// survival plot without over-weighting the sparse tail.
inline std::vector<double> default_fit_grid(const DurationSample& sample,
                                            std::size_t n_points = 20) {
  detail::require_nonempty(sample, "default_fit_grid");
  std::vector<double> sorted = sample.durations;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank =
      (9 * sorted.size() + 9) / 10;  // ceil(0.9 n), 1-based nearest rank
  const double q90 = sorted[rank - 1];
  std::vector<double> grid;
  if (!(q90 > sample.t_s) || n_points < 2) {
    grid.push_back(sample.t_s);
    return grid;
  }
  grid.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k)
    grid.push_back(sample.t_s + (q90 - sample.t_s) * static_cast<double>(k) /
                                    static_cast<double>(n_points - 1));
  return grid;
}

// Riemann-sum integral of the empirical survival function above t_s:
// with the sample sorted ascending and dt_(0) = t_s, accumulates
// sum_k (dt_(k) - dt_(k-1)) * (n-k+1)/n. Telescoping makes this equal to
// mean(dt) - t_s; it is kept in integral form as the survival-function
// route to the same number.
inline FitResult weighted_average_lifetime(const DurationSample& sample) {
  detail::require_nonempty(sample, "weighted_average_lifetime");
  detail::require_at_least_ts(sample, "weighted_average_lifetime");
  std::vector<double> sorted = sample.durations;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  double integral = 0.0;
  double prev = sample.t_s;
  for (std::size_t k = 0; k < n; ++k) {
    integral += (sorted[k] - prev) *
                (static_cast<double>(n - k) / static_cast<double>(n));
    prev = sorted[k];
  }
  FitResult fit;
  fit.method = FitMethod::WeightedAverage;
  fit.tau_hat = integral;
  fit.tau_stderr = integral / std::sqrt(static_cast<double>(n));
  fit.n_points = n;
  return fit;
}

// Maximum-likelihood estimator for the left-truncated exponential:
// tau_hat = mean(dt) - t_s, stderr tau_hat/sqrt(n).
inline FitResult truncated_mean_estimator(const DurationSample& sample) {
  detail::require_nonempty(sample, "truncated_mean_estimator");
  detail::require_at_least_ts(sample, "truncated_mean_estimator");
  double sum = 0.0;
  for (double d : sample.durations) sum += d;
  const double n = static_cast<double>(sample.durations.size());
  const double tau = sum / n - sample.t_s;
  if (!(tau > 0.0))
    throw NonPositiveEstimate("truncated_mean_estimator: mean(dt) <= t_s");
  FitResult fit;
  fit.method = FitMethod::TruncatedMean;
  fit.tau_hat = tau;
  fit.tau_stderr = tau / std::sqrt(n);
  fit.n_points = sample.durations.size();
  return fit;
}

// Complementary CDF of the Kolmogorov distribution,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_cdf_complement(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    if (term < 1e-18) break;
    sum += (k % 2 == 1 ? term : -term);
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// K with Q(K) = alpha, by bisection (Q is strictly decreasing).
inline double kolmogorov_critical_value(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InvalidParams("kolmogorov_critical_value: alpha must lie in (0,1)");
  double lo = 1e-6, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_cdf_complement(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct KsResult {
  double statistic = 0.0;       // D_n
  double critical_value = 0.0;  // asymptotic, K(alpha)/sqrt(n)
  double p_value = 0.0;         // asymptotic, Q(sqrt(n) D_n)
  bool pass = false;            // statistic <= critical_value
};

// One-sample Kolmogorov-Smirnov test of the shifted durations dt - t_s
// against Exp(tau), using the asymptotic critical value at `alpha`.
inline KsResult ks_exponential_test(const DurationSample& sample, double tau,
                                    double alpha = 0.01) {
  if (!(tau > 0.0)) throw InvalidRate("ks_exponential_test: tau must be > 0");
  if (sample.durations.size() < 20)
    throw SampleTooSmall("ks_exponential_test: need at least 20 durations");
  detail::require_at_least_ts(sample, "ks_exponential_test");

  std::vector<double> sorted = sample.durations;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = 1.0 - std::exp(-(sorted[i] - sample.t_s) / tau);
    const double upper = (static_cast<double>(i) + 1.0) / n - f;
    const double lower = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(upper, lower));
  }
  KsResult result;
  result.statistic = d;
  result.critical_value = kolmogorov_critical_value(alpha) / std::sqrt(n);
  result.p_value = kolmogorov_cdf_complement(std::sqrt(n) * d);
  result.pass = d <= result.critical_value;
  return result;
}

}  // namespace qjump
