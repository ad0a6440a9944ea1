#pragma once

// Shared test helpers: independent statistical oracles, scratch
// directories, and a tiny XML well-formedness check for the SVG output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

// Two-sample Kolmogorov-Smirnov test at significance alpha, using the
// asymptotic critical value c(alpha) * sqrt((n+m)/(n*m)).
struct TwoSampleKs {
  double statistic;
  double critical_value;
  bool pass;
};

inline TwoSampleKs two_sample_ks(std::vector<double> a, std::vector<double> b,
                                 double c_alpha = 1.6276 /* alpha = 0.01 */) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  TwoSampleKs r;
  r.statistic = d;
  r.critical_value = c_alpha * std::sqrt((na + nb) / (na * nb));
  r.pass = d <= r.critical_value;
  return r;
}

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Regularized upper incomplete gamma via series/continued fraction would be
// overkill; the Poisson CDF used by tests only needs modest k and mean.
inline double poisson_cdf(std::uint64_t k, double mean) {
  double term = std::exp(-mean);
  double sum = term;
  for (std::uint64_t i = 1; i <= k; ++i) {
    term *= mean / static_cast<double>(i);
    sum += term;
  }
  return std::min(1.0, sum);
}

// Scratch directory, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("qjump_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path operator/(const std::string& name) const {
    return dir_ / name;
  }

private:
  std::filesystem::path dir_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool files_identical(const std::filesystem::path& a,
                            const std::filesystem::path& b) {
  return slurp(a) == slurp(b);
}

// Runs the CLI binary; returns the exit code, captures stdout+stderr.
struct CliResult {
  int exit_code;
  std::string output;
};

inline CliResult run_cli([[maybe_unused]] const std::string& args,
                         const std::filesystem::path& scratch) {
  const std::filesystem::path log = scratch / "cli_output.log";
#ifdef QJUMP_CLI_PATH
  const std::string cmd =
      std::string(QJUMP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
#else
  const std::string cmd = "true";
#endif
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = slurp(log);
  return r;
}

// Minimal XML well-formedness check: tag nesting, quoting, one root.
inline bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  bool seen_root = false;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      const auto end = text.find("?>", i);
      if (end == std::string::npos) return false;
      i = end + 2;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const auto end = text.find("-->", i);
      if (end == std::string::npos) return false;
      i = end + 3;
      continue;
    }
    // find the matching '>' outside quotes
    std::size_t j = i + 1;
    char quote = 0;
    while (j < text.size() && (quote != 0 || text[j] != '>')) {
      if (quote == 0 && (text[j] == '"' || text[j] == '\'')) quote = text[j];
      else if (text[j] == quote) quote = 0;
      ++j;
    }
    if (j >= text.size()) return false;
    const std::string tag = text.substr(i + 1, j - i - 1);
    if (tag.empty()) return false;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      if (stack.empty()) seen_root = true;
    } else if (tag.back() != '/') {
      const auto sp = tag.find_first_of(" \t\r\n");
      const std::string name = sp == std::string::npos ? tag : tag.substr(0, sp);
      if (stack.empty()) {
        if (seen_root) return false;
        ++roots;
      }
      stack.push_back(name);
    } else if (stack.empty()) {
      if (seen_root) return false;
      ++roots;
      seen_root = true;
    }
    i = j + 1;
  }
  return stack.empty() && roots == 1;
}

}  // namespace testsupport
