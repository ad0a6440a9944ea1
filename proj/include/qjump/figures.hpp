#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "qjump/detect.hpp"
#include "qjump/errors.hpp"
#include "qjump/io.hpp"
#include "qjump/photon.hpp"
#include "qjump/stats.hpp"

namespace qjump {

// Static SVG figures with the plotted points mirrored into a companion
// CSV. Two kinds: the telegraph trace (counts per bin, detected dark
// periods shaded) and the survival plot (ln of the dark-longer count
// against time, with the fitted line).

namespace detail {

struct Frame {
  // plot area in pixel space
  double left = 70, right = 870, top = 30, bottom = 300;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // data ranges

  double px(double x) const {
    return left + (x - x0) / (x1 - x0) * (right - left);
  }
  double py(double y) const {
    return bottom - (y - y0) / (y1 - y0) * (bottom - top);
  }
};

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void svg_open(std::string& s, int width, int height) {
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!-- qjump.figure format_version=" + std::to_string(kFormatVersion) +
       " -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(width) + "\" height=\"" + std::to_string(height) +
       "\" viewBox=\"0 0 " + std::to_string(width) + " " +
       std::to_string(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
       "\" height=\"" + std::to_string(height) + "\" fill=\"white\"/>\n";
}

inline void svg_axes(std::string& s, const Frame& f, const std::string& xlabel,
                     const std::string& ylabel, const std::string& title) {
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" +
       num(f.right) + "\" y2=\"" + num(f.bottom) + "\"/>\n";
  s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" +
       num(f.left) + "\" y2=\"" + num(f.top) + "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double fy = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<line stroke=\"black\" x1=\"" + num(f.px(fx)) + "\" y1=\"" +
         num(f.bottom) + "\" x2=\"" + num(f.px(fx)) + "\" y2=\"" +
         num(f.bottom + 5) + "\"/>\n";
    s += "<text text-anchor=\"middle\" x=\"" + num(f.px(fx)) + "\" y=\"" +
         num(f.bottom + 18) + "\">" + num(fx) + "</text>\n";
    s += "<line stroke=\"black\" x1=\"" + num(f.left - 5) + "\" y1=\"" +
         num(f.py(fy)) + "\" x2=\"" + num(f.left) + "\" y2=\"" + num(f.py(fy)) +
         "\"/>\n";
    s += "<text text-anchor=\"end\" x=\"" + num(f.left - 8) + "\" y=\"" +
         num(f.py(fy) + 4) + "\">" + num(fy) + "</text>\n";
  }
  s += "<text text-anchor=\"middle\" x=\"" + num((f.left + f.right) / 2) +
       "\" y=\"" + num(f.bottom + 38) + "\">" + xlabel + "</text>\n";
  s += "<text text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num((f.top + f.bottom) / 2) + ")\" x=\"18\" y=\"" +
       num((f.top + f.bottom) / 2) + "\">" + ylabel + "</text>\n";
  s += "<text text-anchor=\"middle\" x=\"" + num((f.left + f.right) / 2) +
       "\" y=\"18\">" + title + "</text>\n";
  s += "</g>\n";
}

}  // namespace detail

// Telegraph trace. Very long records are windowed to the neighbourhood of
// the first detected dark period (the CSV mirrors exactly the plotted
// bins); records up to `max_plot_bins` are drawn whole.
inline void write_telegraph_figure(const BinnedCounts& bins,
                                   const std::vector<DarkPeriod>& periods,
                                   const std::filesystem::path& svg_path,
                                   const std::filesystem::path& csv_path,
                                   std::size_t max_plot_bins = 20000) {
  if (bins.counts.empty()) throw EmptyInput("write_telegraph_figure: no bins");
  std::size_t first = 0, count = bins.counts.size();
  if (count > max_plot_bins) {
    count = max_plot_bins;
    if (!periods.empty()) {
      const auto onset_bin = static_cast<std::size_t>(
          (periods.front().t0 - bins.t_start) / bins.bin_width);
      first = onset_bin > count / 4 ? onset_bin - count / 4 : 0;
    }
    first = std::min(first, bins.counts.size() - count);
  }

  const double w = bins.bin_width;
  const double t_lo = bins.t_start + static_cast<double>(first) * w;
  const double t_hi = t_lo + static_cast<double>(count) * w;
  std::uint32_t cmax = 1;
  for (std::size_t k = first; k < first + count; ++k)
    cmax = std::max(cmax, bins.counts[k]);

  detail::Frame f;
  f.x0 = t_lo;
  f.x1 = t_hi;
  f.y0 = 0;
  f.y1 = static_cast<double>(cmax) * 1.05;

  std::string s;
  detail::svg_open(s, 900, 360);
  detail::svg_axes(s, f, "time (s)", "counts per bin", "fluorescence telegraph");
  for (const DarkPeriod& p : periods) {
    if (p.t_end <= t_lo || p.t0 >= t_hi) continue;
    const double a = std::max(p.t0, t_lo), b = std::min(p.t_end, t_hi);
    s += "<rect fill=\"#c8d8f0\" x=\"" + detail::num(f.px(a)) + "\" y=\"" +
         detail::num(f.top) + "\" width=\"" + detail::num(f.px(b) - f.px(a)) +
         "\" height=\"" + detail::num(f.bottom - f.top) + "\"/>\n";
  }
  s += "<polyline fill=\"none\" stroke=\"#1a3a6b\" stroke-width=\"1\" points=\"";
  for (std::size_t k = first; k < first + count; ++k) {
    const double t = bins.t_start + (static_cast<double>(k) + 0.5) * w;
    s += detail::num(f.px(t)) + "," +
         detail::num(f.py(static_cast<double>(bins.counts[k]))) + " ";
  }
  s += "\"/>\n</svg>\n";

  std::ofstream svg = detail::open_output(svg_path);
  svg << s;

  std::ofstream csv = detail::open_output(csv_path);
  csv << "# qjump.figure format_version=" << kFormatVersion << "\n";
  csv << "t_start,counts\n";
  for (std::size_t k = first; k < first + count; ++k)
    csv << detail::fmt_double(bins.t_start + static_cast<double>(k) * w) << ','
        << bins.counts[k] << "\n";
}

// Survival plot: ln n_dark_longer against t for grid points with a nonzero
// count, plus the fitted line exp(intercept - t/tau).
inline void write_survival_figure(const SurvivalCounts& counts,
                                  const FitResult& fit,
                                  const std::filesystem::path& svg_path,
                                  const std::filesystem::path& csv_path) {
  std::vector<double> ts, lns;
  for (std::size_t k = 0; k < counts.grid.size(); ++k) {
    if (counts.n_dark_longer[k] == 0) continue;
    ts.push_back(counts.grid[k]);
    lns.push_back(std::log(static_cast<double>(counts.n_dark_longer[k])));
  }
  if (ts.size() < 2) throw EmptyInput("write_survival_figure: nothing to plot");

  const double slope = -1.0 / fit.tau_hat;
  detail::Frame f;
  f.x0 = ts.front();
  f.x1 = ts.back();
  const auto [ymin, ymax] = std::minmax_element(lns.begin(), lns.end());
  f.y0 = *ymin - 0.2;
  f.y1 = *ymax + 0.2;

  std::string s;
  detail::svg_open(s, 900, 360);
  detail::svg_axes(s, f, "time (s)", "ln N(dt &gt; t)", "dark-period survival");
  s += "<line stroke=\"#b03030\" stroke-width=\"1.5\" x1=\"" +
       detail::num(f.px(f.x0)) + "\" y1=\"" +
       detail::num(f.py(fit.intercept + slope * f.x0)) + "\" x2=\"" +
       detail::num(f.px(f.x1)) + "\" y2=\"" +
       detail::num(f.py(fit.intercept + slope * f.x1)) + "\"/>\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    s += "<circle fill=\"#1a3a6b\" r=\"3\" cx=\"" + detail::num(f.px(ts[i])) +
         "\" cy=\"" + detail::num(f.py(lns[i])) + "\"/>\n";
  s += "</svg>\n";

  std::ofstream svg = detail::open_output(svg_path);
  svg << s;

  std::ofstream csv = detail::open_output(csv_path);
  csv << "# qjump.figure format_version=" << kFormatVersion << "\n";
  csv << "t,ln_n_dark_longer,fit\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    csv << detail::fmt_double(ts[i]) << ',' << detail::fmt_double(lns[i])
        << ',' << detail::fmt_double(fit.intercept + slope * ts[i]) << "\n";
}

}  // namespace qjump
