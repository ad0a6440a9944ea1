#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qjump/detect.hpp"
#include "qjump/rng.hpp"
#include "qjump/telegraph.hpp"
#include "support.hpp"

using namespace qjump;
using Catch::Approx;

namespace {

BinnedCounts make_bins(const std::vector<std::uint32_t>& counts,
                       double bin_width = 0.01) {
  BinnedCounts b;
  b.bin_width = bin_width;
  b.counts = counts;
  return b;
}

}  // namespace

TEST_CASE("all-bright record has no dark periods") {
  std::vector<std::uint32_t> counts(100, 20);
  DetectorConfig cfg;
  cfg.threshold = 5.0;
  REQUIRE(detect(make_bins(counts), cfg).empty());
}

TEST_CASE("a single interior low run is one period") {
  std::vector<std::uint32_t> counts;
  for (int i = 0; i < 10; ++i) counts.push_back(20);
  for (int i = 0; i < 10; ++i) counts.push_back(0);
  for (int i = 0; i < 10; ++i) counts.push_back(20);
  DetectorConfig cfg;
  cfg.threshold = 5.0;
  cfg.min_dark_duration = 0.07;
  const auto periods = detect(make_bins(counts), cfg);
  REQUIRE(periods.size() == 1);
  REQUIRE(periods[0].t0 == Approx(0.10).margin(1e-12));
  REQUIRE(periods[0].t_end == Approx(0.20).margin(1e-12));
  REQUIRE(periods[0].dt == Approx(0.10).margin(1e-12));
}

TEST_CASE("detection edge handling") {
  DetectorConfig cfg;
  cfg.threshold = 5.0;
  cfg.min_dark_duration = 0.02;

  SECTION("empty input") {
    REQUIRE_THROWS_AS(detect(make_bins({}), cfg), EmptyInput);
  }

  SECTION("periods touching the record edges are censored away") {
    // dark at the very start and dark at the very end
    std::vector<std::uint32_t> counts = {0, 0, 0, 20, 20, 0, 0, 0, 20, 20,
                                         20, 0, 0, 0};
    const auto periods = detect(make_bins(counts), cfg);
    REQUIRE(periods.size() == 1);
    REQUIRE(periods[0].t0 == Approx(0.05).margin(1e-12));
    REQUIRE(periods[0].t_end == Approx(0.08).margin(1e-12));
  }

  SECTION("short periods are dropped by min_dark_duration") {
    std::vector<std::uint32_t> counts = {20, 20, 0, 20, 20, 0, 0, 0, 20, 20};
    cfg.min_dark_duration = 0.02;
    const auto periods = detect(make_bins(counts), cfg);
    REQUIRE(periods.size() == 1);  // the single low bin is too short
    REQUIRE(periods[0].dt == Approx(0.03).margin(1e-12));
  }

  SECTION("hysteresis bridges single-bin noise") {
    std::vector<std::uint32_t> counts = {20, 20, 0, 0, 0, 9, 0, 0, 0, 20, 20};
    cfg.min_dark_duration = 0.0;
    cfg.hysteresis_bins = 1;
    REQUIRE(detect(make_bins(counts), cfg).size() == 2);
    cfg.hysteresis_bins = 2;
    const auto bridged = detect(make_bins(counts), cfg);
    REQUIRE(bridged.size() == 1);
    REQUIRE(bridged[0].t0 == Approx(0.02).margin(1e-12));
    REQUIRE(bridged[0].t_end == Approx(0.09).margin(1e-12));
  }

  SECTION("config validation") {
    cfg.hysteresis_bins = 0;
    REQUIRE_THROWS_AS(detect(make_bins({1, 2}), cfg), InvalidParams);
  }
}

TEST_CASE("raising min_dark_duration never adds periods") {
  Rng rng(606);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::uint32_t> counts(400);
    for (auto& c : counts)
      c = static_cast<std::uint32_t>(rng.poisson(rng.bernoulli(0.3) ? 0.5 : 15.0));
    DetectorConfig cfg;
    cfg.threshold = 4.0;
    std::size_t previous = SIZE_MAX;
    for (double min_dark : {0.0, 0.02, 0.05, 0.1, 0.2}) {
      cfg.min_dark_duration = min_dark;
      const auto periods = detect(make_bins(counts), cfg);
      // emitted periods are sorted, disjoint, and all above the floor
      for (std::size_t i = 0; i < periods.size(); ++i) {
        REQUIRE(periods[i].dt >= min_dark);
        REQUIRE(periods[i].t_end > periods[i].t0);
        if (i > 0) REQUIRE(periods[i].t0 >= periods[i - 1].t_end);
      }
      REQUIRE(periods.size() <= previous);
      previous = periods.size();
    }
  }
}

TEST_CASE("noiseless recovery of ground-truth intervals") {
  // intervals all longer than min_dark + 2 bins, separated by long gaps
  Rng rng(808);
  ShelvingIntervals truth;
  truth.seed = 1;
  double t = 0.0;
  for (int i = 0; i < 120; ++i) {
    t += 0.3 + rng.exponential(1.0);                   // bright gap
    const double len = 0.09 + rng.exponential(1.0 / 0.14);  // > 0.07 + 2*0.01
    truth.intervals.push_back({t, t + len, false});
    t += len;
  }
  truth.duration = t + 0.5;

  DetectorParams params;
  params.bright_count_rate = 2000.0;
  params.dark_count_rate = 0.0;
  params.bin_width = 0.01;
  const BinnedCounts bins = render_counts(truth, params, 909);

  DetectorConfig cfg;
  cfg.threshold = 0.0;  // noiseless: dark bins are exactly zero
  cfg.min_dark_duration = 0.07;
  const auto periods = detect(bins, cfg);

  REQUIRE(periods.size() == truth.intervals.size());
  for (std::size_t i = 0; i < periods.size(); ++i) {
    REQUIRE(std::abs(periods[i].t0 - truth.intervals[i].t0) <=
            params.bin_width + 1e-12);
    REQUIRE(std::abs(periods[i].t_end - truth.intervals[i].t_end) <=
            params.bin_width + 1e-12);
    const double dt_true = truth.intervals[i].t_end - truth.intervals[i].t0;
    REQUIRE(std::abs(periods[i].dt - dt_true) <= 2.0 * params.bin_width);
  }
}

TEST_CASE("histogram threshold suggestion") {
  SECTION("bimodal Poisson mixture lands in the valley") {
    Rng rng(2406);
    std::vector<std::uint32_t> counts;
    for (int i = 0; i < 4000; ++i)
      counts.push_back(static_cast<std::uint32_t>(rng.poisson(0.4)));
    for (int i = 0; i < 4000; ++i)
      counts.push_back(static_cast<std::uint32_t>(rng.poisson(20.0)));
    const BinnedCounts bins = make_bins(counts);
    const double suggested = suggest_threshold(bins);
    REQUIRE(suggested > 2.0);
    REQUIRE(suggested < 10.0);

    // oracle: exhaustive scan for the maximum between-class variance,
    // then the same mode-midpoint construction, reimplemented directly
    std::uint32_t vmax = 0;
    for (auto c : counts) vmax = std::max(vmax, c);
    std::vector<double> hist(vmax + 1, 0.0);
    for (auto c : counts) hist[c] += 1.0;
    const double total = static_cast<double>(counts.size());
    double best = -1.0;
    std::vector<std::uint32_t> ties;
    for (std::uint32_t t = 0; t < vmax; ++t) {
      double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
      for (std::uint32_t v = 0; v <= vmax; ++v) {
        if (v <= t) {
          n0 += hist[v];
          s0 += hist[v] * v;
        } else {
          n1 += hist[v];
          s1 += hist[v] * v;
        }
      }
      if (n0 == 0 || n1 == 0) continue;
      const double var =
          (n0 / total) * (n1 / total) * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1);
      if (var > best * (1 + 1e-12)) {
        best = var;
        ties.assign(1, t);
      } else if (var >= best * (1 - 1e-12)) {
        ties.push_back(t);
      }
    }
    const std::uint32_t split = ties[ties.size() / 2];
    std::uint32_t mode0 = 0, mode1 = split + 1;
    for (std::uint32_t v = 0; v <= split; ++v)
      if (hist[v] > hist[mode0]) mode0 = v;
    for (std::uint32_t v = split + 1; v <= vmax; ++v)
      if (hist[v] > hist[mode1]) mode1 = v;
    REQUIRE(suggested == Approx(0.5 * (mode0 + mode1)).margin(1e-12));
  }

  SECTION("identical counts are not bimodal") {
    REQUIRE_THROWS_AS(suggest_threshold(make_bins({7, 7, 7, 7, 7})),
                      NotBimodal);
  }

  SECTION("two spikes split at the midpoint") {
    std::vector<std::uint32_t> counts;
    for (int i = 0; i < 300; ++i) counts.push_back(0);
    for (int i = 0; i < 300; ++i) counts.push_back(100);
    const double suggested = suggest_threshold(make_bins(counts));
    REQUIRE(std::abs(suggested - 50.0) <= 1.0);
  }
}

TEST_CASE("likelihood-ratio threshold from detector rates") {
  DetectorParams p;  // 2000/40 at 10 ms
  const double thr = likelihood_ratio_threshold(p);
  const double mu_d = 0.4, mu_b = 20.4;
  REQUIRE(thr == Approx((mu_b - mu_d) / std::log(mu_b / mu_d)).epsilon(1e-12));
  REQUIRE(thr > mu_d);
  REQUIRE(thr < mu_b);

  p.dark_count_rate = 0.0;
  REQUIRE(likelihood_ratio_threshold(p) == 0.0);
}
