#pragma once

#include <cstdint>
#include <vector>

#include "qjump/errors.hpp"
#include "qjump/rng.hpp"
#include "qjump/scheme.hpp"

namespace qjump {

// Continuous-time jump-process simulators.
//
// simulate_full walks the three-level chain jump by jump: from each level
// the waiting time is exponential with the sum of the outgoing rates, and
// the destination is drawn in proportion to those rates. Each jump consumes
// exactly two RNG draws, a waiting-time word then a channel word (the
// channel word is drawn even when only one exit exists), which keeps the
// seed -> trajectory mapping trivial to state and to keep stable.
//
// All functions are pure in (arguments, seed); concurrent calls share no
// state.

inline Trajectory simulate_full(const LevelScheme& scheme, double duration,
                                std::uint64_t seed) {
  validate(scheme);
  if (!(duration > 0.0)) throw InvalidScheme("simulate_full: duration must be > 0");

  Trajectory trajectory;
  trajectory.scheme = scheme;
  trajectory.duration = duration;
  trajectory.seed = seed;
  trajectory.initial_level = IonLevel::S0;

  Rng rng(seed);
  IonLevel level = IonLevel::S0;
  double t = 0.0;
  const double rate_s0 = scheme.excitation_rate + scheme.direct_shelving_rate;
  const double rate_p1 = 1.0 / scheme.tau_p1;
  const double rate_p0 = 1.0 / scheme.tau_p0;

  for (;;) {
    double total = 0.0;
    switch (level) {
      case IonLevel::S0: total = rate_s0; break;
      case IonLevel::P1: total = rate_p1; break;
      case IonLevel::P0: total = rate_p0; break;
    }
    const double dwell = rng.exponential(total);
    const double u = rng.uniform01();
    t += dwell;
    if (!(t < duration)) break;

    JumpRecord jump;
    jump.t = t;
    jump.from = level;
    switch (level) {
      case IonLevel::S0:
        if (u < scheme.excitation_rate / rate_s0) {
          jump.to = IonLevel::P1;
          jump.channel = Channel::Pump;
        } else {
          jump.to = IonLevel::P0;
          jump.channel = Channel::DirectShelve;
        }
        break;
      case IonLevel::P1:
        if (u < scheme.branch_p1_to_p0) {
          jump.to = IonLevel::P0;
          jump.channel = Channel::A2;
        } else {
          jump.to = IonLevel::S0;
          jump.channel = Channel::A1;
        }
        break;
      case IonLevel::P0:
        jump.to = IonLevel::S0;
        jump.channel = Channel::A0;
        break;
    }
    trajectory.jumps.push_back(jump);
    level = jump.to;
  }
  return trajectory;
}

// Rate at which the cycling (bright) manifold feeds the shelf, reducing
// S0 <-> P1 to its steady state: with occupancies
//   p_P1 = excitation_rate*tau_p1 / (1 + excitation_rate*tau_p1),
//   p_S0 = 1 - p_P1,
// the shelving rate is p_P1 * branch/tau_p1 + p_S0 * direct_shelving_rate.
// This equals the exact mean absorption rate of the chain, so the mean
// bright duration in simulate_full is 1/effective_shelving_rate.
inline double effective_shelving_rate(const LevelScheme& scheme) {
  validate(scheme);
  const double saturation = scheme.excitation_rate * scheme.tau_p1;
  const double p_p1 = saturation / (1.0 + saturation);
  return p_p1 * scheme.branch_p1_to_p0 / scheme.tau_p1 +
         (1.0 - p_p1) * scheme.direct_shelving_rate;
}

// Two-state (bright/dark) reduction: alternating exponential dwells
// starting bright. Dark intervals are returned; a dark dwell in progress
// at the end of the run is clamped to the duration and flagged censored.
// Draw order: one exponential word per dwell, strictly alternating.
inline ShelvingIntervals simulate_telegraph(double bright_to_dark_rate,
                                            double dark_to_bright_rate,
                                            double duration,
                                            std::uint64_t seed) {
  if (!(bright_to_dark_rate > 0.0) || !(dark_to_bright_rate > 0.0))
    throw InvalidRate("simulate_telegraph: rates must be > 0");
  if (!(duration > 0.0))
    throw InvalidParams("simulate_telegraph: duration must be > 0");

  ShelvingIntervals out;
  out.duration = duration;
  out.seed = seed;
  Rng rng(seed);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(bright_to_dark_rate);
    if (!(t < duration)) break;
    const double dark = rng.exponential(dark_to_bright_rate);
    if (t + dark >= duration) {
      out.intervals.push_back({t, duration, true});
      break;
    }
    out.intervals.push_back({t, t + dark, false});
    t += dark;
  }
  return out;
}

// Maximal intervals spent on the shelf, read off the jump list: an interval
// opens at a jump into P0 (A2 or direct_shelve) and closes at the next A0.
// A stay still open at the end of the record is clamped and censored.
inline ShelvingIntervals extract_shelving(const Trajectory& trajectory) {
  ShelvingIntervals out;
  out.duration = trajectory.duration;
  out.seed = trajectory.seed;
  bool shelved = trajectory.initial_level == IonLevel::P0;
  double t0 = 0.0;
  for (const JumpRecord& j : trajectory.jumps) {
    if (!shelved && j.to == IonLevel::P0) {
      shelved = true;
      t0 = j.t;
    } else if (shelved && j.from == IonLevel::P0) {
      out.intervals.push_back({t0, j.t, false});
      shelved = false;
    }
  }
  if (shelved) out.intervals.push_back({t0, trajectory.duration, true});
  return out;
}

}  // namespace qjump
