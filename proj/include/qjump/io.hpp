#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qjump/detect.hpp"
#include "qjump/errors.hpp"
#include "qjump/photon.hpp"
#include "qjump/rng.hpp"
#include "qjump/scheme.hpp"

namespace qjump {

// File formats. Every file opens with a tagged first line carrying the
// format version; readers refuse anything but an exact version match.
//
//   intervals CSV   "# qjump.intervals format_version=N" + metadata
//                   comments, then header "t0,t_end,censored"
//   bins CSV        "# qjump.bins format_version=N" + metadata, then
//                   header "t_start,counts", one row per bin
//   dark CSV        "# qjump.dark format_version=N" + metadata (detector
//                   config, source file hash), then header "t0,t_end,dt"
//   trajectory      JSON lines; header object with scheme/duration/seed,
//                   then one {"t","from","to","channel"} object per jump
//
// Times are written with 15 significant digits. All text is UTF-8 with LF
// line endings and '.' as the decimal separator.

inline constexpr int kFormatVersion = 1;

namespace detail {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

// Shortest representation that round-trips exactly through strtod.
inline std::string fmt_double_exact(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("cannot parse number for ") + what + ": '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("cannot parse integer for ") + what + ": '" + s + "'");
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw MissingInput("no such file: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Validates "# qjump.<kind> format_version=N" and returns after consuming
// leading metadata comments, which are collected into `meta`.
inline void read_csv_preamble(std::ifstream& in, const std::string& kind,
                              std::map<std::string, std::string>& meta,
                              std::string& header_line,
                              const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line))
    throw IoError("empty file: " + path.string());
  const std::string want = "# qjump." + kind + " format_version=";
  if (line.rfind("# qjump.", 0) != 0)
    throw IoError(path.string() + " is not a qjump file");
  if (line.rfind(want, 0) != 0) {
    // Right family of file? If the kind differs, say so; if only the
    // version differs, that is a schema mismatch.
    if (line.find(" format_version=") == std::string::npos)
      throw IoError(path.string() + " has a malformed format line");
    const auto kind_end = line.find(' ', 2);
    const std::string got_kind = line.substr(8, kind_end - 8);
    if (got_kind != kind)
      throw IoError(path.string() + " is a qjump." + got_kind +
                    " file, expected qjump." + kind);
    throw SchemaVersionMismatch(path.string() + ": unsupported version");
  }
  const std::string ver = line.substr(want.size());
  if (parse_u64(ver, "format_version") != kFormatVersion)
    throw SchemaVersionMismatch(path.string() + ": format_version " + ver);

  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) {
      header_line = line;
      return;
    }
    const auto eq = line.find(" = ");
    if (eq != std::string::npos)
      meta[trim(line.substr(1, eq - 1))] = trim(line.substr(eq + 3));
  }
  throw IoError(path.string() + " has no column header");
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

// -------------------------------------------------------------- hashing

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("no such file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fnv1a64_file(const std::filesystem::path& path) {
  return fnv1a64_hex(read_file_bytes(path));
}

// ------------------------------------------------------------- intervals

inline void write_intervals(const std::filesystem::path& path,
                            const ShelvingIntervals& s) {
  std::ofstream out = detail::open_output(path);
  out << "# qjump.intervals format_version=" << kFormatVersion << "\n";
  out << "# seed = " << s.seed << "\n";
  out << "# duration = " << detail::fmt_double_exact(s.duration) << "\n";
  out << "# rng = " << kRngContract << "\n";
  out << "t0,t_end,censored\n";
  for (const Interval& iv : s.intervals)
    out << detail::fmt_double(iv.t0) << ',' << detail::fmt_double(iv.t_end)
        << ',' << (iv.censored ? 1 : 0) << "\n";
}

inline ShelvingIntervals read_intervals(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::map<std::string, std::string> meta;
  std::string header;
  detail::read_csv_preamble(in, "intervals", meta, header, path);
  if (header != "t0,t_end,censored")
    throw IoError(path.string() + ": unexpected columns '" + header + "'");
  ShelvingIntervals s;
  if (meta.count("seed")) s.seed = detail::parse_u64(meta["seed"], "seed");
  if (meta.count("duration"))
    s.duration = detail::parse_double(meta["duration"], "duration");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_row(line);
    if (f.size() != 3) throw IoError(path.string() + ": bad row '" + line + "'");
    s.intervals.push_back({detail::parse_double(f[0], "t0"),
                           detail::parse_double(f[1], "t_end"), f[2] == "1"});
  }
  return s;
}

// ------------------------------------------------------------------ bins

inline void write_bins(const std::filesystem::path& path,
                       const BinnedCounts& bins) {
  std::ofstream out = detail::open_output(path);
  out << "# qjump.bins format_version=" << kFormatVersion << "\n";
  out << "# seed = " << bins.seed << "\n";
  out << "# t_start = " << detail::fmt_double_exact(bins.t_start) << "\n";
  out << "# bin_width = " << detail::fmt_double_exact(bins.bin_width) << "\n";
  out << "# bright_count_rate = "
      << detail::fmt_double_exact(bins.params.bright_count_rate) << "\n";
  out << "# dark_count_rate = "
      << detail::fmt_double_exact(bins.params.dark_count_rate) << "\n";
  out << "# mode = "
      << (bins.params.mode == DetectorMode::RateModel ? "rate_model"
                                                      : "per_photon")
      << "\n";
  out << "# efficiency = " << detail::fmt_double_exact(bins.params.efficiency)
      << "\n";
  out << "# rng = " << kRngContract << "\n";
  out << "t_start,counts\n";
  std::string buffer;
  buffer.reserve(1 << 20);
  for (std::size_t k = 0; k < bins.counts.size(); ++k) {
    buffer += detail::fmt_double(bins.t_start +
                                 static_cast<double>(k) * bins.bin_width);
    buffer += ',';
    buffer += std::to_string(bins.counts[k]);
    buffer += '\n';
    if (buffer.size() > (1 << 20) - 64) {
      out << buffer;
      buffer.clear();
    }
  }
  out << buffer;
}

inline BinnedCounts read_bins(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::map<std::string, std::string> meta;
  std::string header;
  detail::read_csv_preamble(in, "bins", meta, header, path);
  if (header != "t_start,counts")
    throw IoError(path.string() + ": unexpected columns '" + header + "'");
  BinnedCounts bins;
  if (meta.count("seed")) bins.seed = detail::parse_u64(meta["seed"], "seed");
  if (meta.count("t_start"))
    bins.t_start = detail::parse_double(meta["t_start"], "t_start");
  if (meta.count("bin_width"))
    bins.bin_width = detail::parse_double(meta["bin_width"], "bin_width");
  if (meta.count("bright_count_rate"))
    bins.params.bright_count_rate =
        detail::parse_double(meta["bright_count_rate"], "bright_count_rate");
  if (meta.count("dark_count_rate"))
    bins.params.dark_count_rate =
        detail::parse_double(meta["dark_count_rate"], "dark_count_rate");
  if (meta.count("mode"))
    bins.params.mode = meta["mode"] == "per_photon" ? DetectorMode::PerPhoton
                                                    : DetectorMode::RateModel;
  if (meta.count("efficiency"))
    bins.params.efficiency =
        detail::parse_double(meta["efficiency"], "efficiency");
  if (!(bins.bin_width > 0.0))
    throw IoError(path.string() + ": missing bin_width metadata");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_row(line);
    if (f.size() != 2) throw IoError(path.string() + ": bad row '" + line + "'");
    bins.counts.push_back(
        static_cast<std::uint32_t>(detail::parse_u64(f[1], "counts")));
  }
  return bins;
}

// ------------------------------------------------------------------ dark

inline void write_dark(const std::filesystem::path& path,
                       const std::vector<DarkPeriod>& periods,
                       const DetectorConfig& cfg,
                       const std::string& source_hash) {
  std::ofstream out = detail::open_output(path);
  out << "# qjump.dark format_version=" << kFormatVersion << "\n";
  out << "# threshold = " << detail::fmt_double_exact(cfg.threshold) << "\n";
  out << "# min_dark_duration = "
      << detail::fmt_double_exact(cfg.min_dark_duration) << "\n";
  out << "# hysteresis_bins = " << cfg.hysteresis_bins << "\n";
  out << "# source_fnv1a64 = " << source_hash << "\n";
  out << "t0,t_end,dt\n";
  for (const DarkPeriod& p : periods)
    out << detail::fmt_double(p.t0) << ',' << detail::fmt_double(p.t_end)
        << ',' << detail::fmt_double(p.dt) << "\n";
}

inline std::vector<DarkPeriod> read_dark(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::map<std::string, std::string> meta;
  std::string header;
  detail::read_csv_preamble(in, "dark", meta, header, path);
  if (header != "t0,t_end,dt")
    throw IoError(path.string() + ": unexpected columns '" + header + "'");
  std::vector<DarkPeriod> periods;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_row(line);
    if (f.size() != 3) throw IoError(path.string() + ": bad row '" + line + "'");
    periods.push_back({detail::parse_double(f[0], "t0"),
                       detail::parse_double(f[1], "t_end"),
                       detail::parse_double(f[2], "dt")});
  }
  return periods;
}

// ------------------------------------------------------------ trajectory

inline void write_trajectory_jsonl(const std::filesystem::path& path,
                                   const Trajectory& trajectory) {
  std::ofstream out = detail::open_output(path);
  nlohmann::json header = {
      {"format", "qjump.trajectory"},
      {"version", kFormatVersion},
      {"seed", trajectory.seed},
      {"duration", trajectory.duration},
      {"initial_level", level_name(trajectory.initial_level)},
      {"rng", kRngContract},
      {"scheme",
       {{"tau_p1", trajectory.scheme.tau_p1},
        {"tau_p0", trajectory.scheme.tau_p0},
        {"branch_p1_to_p0", trajectory.scheme.branch_p1_to_p0},
        {"excitation_rate", trajectory.scheme.excitation_rate},
        {"direct_shelving_rate", trajectory.scheme.direct_shelving_rate}}}};
  out << header.dump() << "\n";
  std::string buffer;
  buffer.reserve(1 << 20);
  char row[128];
  for (const JumpRecord& j : trajectory.jumps) {
    std::snprintf(row, sizeof row,
                  "{\"t\":%.15g,\"from\":\"%s\",\"to\":\"%s\",\"channel\":\"%s\"}\n",
                  j.t, level_name(j.from), level_name(j.to),
                  channel_name(j.channel));
    buffer += row;
    if (buffer.size() > (1 << 20) - 256) {
      out << buffer;
      buffer.clear();
    }
  }
  out << buffer;
}

inline Trajectory read_trajectory_jsonl(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad header line: " + e.what());
  }
  if (header.value("format", "") != "qjump.trajectory")
    throw IoError(path.string() + " is not a qjump.trajectory file");
  if (header.value("version", -1) != kFormatVersion)
    throw SchemaVersionMismatch(path.string() + ": unsupported version");

  Trajectory trajectory;
  trajectory.seed = header.value("seed", std::uint64_t{0});
  trajectory.duration = header.value("duration", 0.0);
  trajectory.initial_level = parse_level(header.value("initial_level", "S0"));
  if (header.contains("scheme")) {
    const auto& s = header["scheme"];
    trajectory.scheme.tau_p1 = s.value("tau_p1", 0.0);
    trajectory.scheme.tau_p0 = s.value("tau_p0", 0.0);
    trajectory.scheme.branch_p1_to_p0 = s.value("branch_p1_to_p0", 0.0);
    trajectory.scheme.excitation_rate = s.value("excitation_rate", 0.0);
    trajectory.scheme.direct_shelving_rate =
        s.value("direct_shelving_rate", 0.0);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ": bad jump line: " + e.what());
    }
    trajectory.jumps.push_back({j.at("t").get<double>(),
                                parse_level(j.at("from").get<std::string>()),
                                parse_level(j.at("to").get<std::string>()),
                                parse_channel(j.at("channel").get<std::string>())});
  }
  return trajectory;
}

// ---------------------------------------------------------------- report

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  std::ofstream out = detail::open_output(path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace qjump
