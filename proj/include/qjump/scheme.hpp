#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qjump/errors.hpp"

namespace qjump {

// The three-level system: a ground state S0, a fast fluorescing level P1,
// and the long-lived shelf level P0.
enum class IonLevel : std::uint8_t { S0, P1, P0 };

// Transition channels. A1 is the monitored fluorescence decay P1 -> S0,
// A2 the weak branch P1 -> P0, A0 the slow shelf decay P0 -> S0; pump and
// direct_shelve are the laser-driven excitations out of S0.
enum class Channel : std::uint8_t { A1, A2, A0, Pump, DirectShelve };

struct LevelScheme {
  double tau_p1 = 4e-7;               // P1 radiative lifetime, s
  double tau_p0 = 0.14;               // P0 effective lifetime, s
  double branch_p1_to_p0 = 1e-8;      // A2 branching per P1 decay
  double excitation_rate = 1.25e6;    // S0 -> P1 pump rate, 1/s
  double direct_shelving_rate = 0.0;  // S0 -> P0 laser rate, 1/s
};

// In+ -like defaults. The pump rate is a synthetic choice (half saturation,
// excitation_rate * tau_p1 = 0.5); the lifetimes and branching are the
// physical scale this simulator is pointed at.
inline LevelScheme default_scheme() { return LevelScheme{}; }

inline void validate(const LevelScheme& s) {
  if (!(s.tau_p1 > 0.0) || !(s.tau_p0 > 0.0))
    throw InvalidScheme("lifetimes must be > 0");
  if (!(s.excitation_rate > 0.0))
    throw InvalidScheme("excitation_rate must be > 0");
  if (!(s.direct_shelving_rate >= 0.0))
    throw InvalidScheme("direct_shelving_rate must be >= 0");
  if (!(s.branch_p1_to_p0 >= 0.0) || !(s.branch_p1_to_p0 <= 1.0))
    throw InvalidScheme("branch_p1_to_p0 must lie in [0, 1]");
}

struct JumpRecord {
  double t;  // absolute simulation time, s
  IonLevel from;
  IonLevel to;
  Channel channel;

  friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

inline bool legal_transition(IonLevel from, IonLevel to, Channel channel) {
  switch (channel) {
    case Channel::Pump:
      return from == IonLevel::S0 && to == IonLevel::P1;
    case Channel::A1:
      return from == IonLevel::P1 && to == IonLevel::S0;
    case Channel::A2:
      return from == IonLevel::P1 && to == IonLevel::P0;
    case Channel::A0:
      return from == IonLevel::P0 && to == IonLevel::S0;
    case Channel::DirectShelve:
      return from == IonLevel::S0 && to == IonLevel::P0;
  }
  return false;
}

// One realized path of the jump process.
struct Trajectory {
  LevelScheme scheme;
  double duration = 0.0;
  std::uint64_t seed = 0;
  IonLevel initial_level = IonLevel::S0;
  std::vector<JumpRecord> jumps;  // strictly increasing t, chained levels
};

inline void validate(const Trajectory& trajectory) {
  IonLevel level = trajectory.initial_level;
  double last_t = 0.0;
  bool first = true;
  for (const JumpRecord& j : trajectory.jumps) {
    if (j.from != level)
      throw InvalidParams("trajectory records do not chain");
    if (!legal_transition(j.from, j.to, j.channel))
      throw InvalidParams("trajectory contains an illegal transition");
    if (j.t < 0.0 || j.t > trajectory.duration)
      throw InvalidParams("jump time outside [0, duration]");
    if (!first && !(j.t > last_t))
      throw InvalidParams("jump times are not strictly increasing");
    last_t = j.t;
    first = false;
    level = j.to;
  }
}

// One stay on the shelf level. censored marks an interval cut off by the
// end of the record (its true end was never observed).
struct Interval {
  double t0;
  double t_end;
  bool censored = false;
};

struct ShelvingIntervals {
  double duration = 0.0;
  std::uint64_t seed = 0;
  std::vector<Interval> intervals;  // disjoint, sorted, within [0, duration]
};

// Dwell durations. Censored intervals carry no complete lifetime and are
// excluded unless asked for.
inline std::vector<double> durations(const ShelvingIntervals& s,
                                     bool include_censored = false) {
  std::vector<double> out;
  out.reserve(s.intervals.size());
  for (const Interval& iv : s.intervals)
    if (include_censored || !iv.censored) out.push_back(iv.t_end - iv.t0);
  return out;
}

inline const char* level_name(IonLevel level) {
  switch (level) {
    case IonLevel::S0: return "S0";
    case IonLevel::P1: return "P1";
    case IonLevel::P0: return "P0";
  }
  return "?";
}

inline const char* channel_name(Channel channel) {
  switch (channel) {
    case Channel::A1: return "A1";
    case Channel::A2: return "A2";
    case Channel::A0: return "A0";
    case Channel::Pump: return "pump";
    case Channel::DirectShelve: return "direct_shelve";
  }
  return "?";
}

inline IonLevel parse_level(const std::string& name) {
  if (name == "S0") return IonLevel::S0;
  if (name == "P1") return IonLevel::P1;
  if (name == "P0") return IonLevel::P0;
  throw InvalidParams("unknown level name: " + name);
}

inline Channel parse_channel(const std::string& name) {
  if (name == "A1") return Channel::A1;
  if (name == "A2") return Channel::A2;
  if (name == "A0") return Channel::A0;
  if (name == "pump") return Channel::Pump;
  if (name == "direct_shelve") return Channel::DirectShelve;
  throw InvalidParams("unknown channel name: " + name);
}

}  // namespace qjump
