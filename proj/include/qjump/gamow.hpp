#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qjump/errors.hpp"
#include "qjump/linalg.hpp"

namespace qjump {

// Decaying-state kernel.
//
// Conventions: natural units with hbar = 1 throughout, so energies and
// widths are angular frequencies (rad/s), times are seconds, and the
// lifetime-width identity reads tau * gamma = 1.
//
// A metastable level is carried as a single complex survival amplitude
// attached to the complex resonance energy z = energy_er - i*width_gamma/2.
// Its evolution is a one-parameter semigroup: it is defined for t >= 0
// only, and asking for t < 0 is a domain error (NegativeTime), not a
// value to be clamped. The state has no history before its preparation.

struct GamowState {
  Complex amplitude;
  double energy_er;     // resonance energy, rad/s
  double width_gamma;   // decay width, rad/s; > 0
};

using StateVector = std::vector<Complex>;
using DensityOperator = SquareMatrix;

// Forward evolution by t seconds: amplitude picks up the factor
// exp(-i*energy_er*t) * exp(-width_gamma*t/2). Composition over t1, t2 >= 0
// multiplies the factors, so evolve(evolve(s,t1),t2) == evolve(s,t1+t2).
inline GamowState evolve(const GamowState& state, double t) {
  if (!(state.width_gamma > 0.0))
    throw InvalidRate("evolve: width_gamma must be > 0");
  if (!(t >= 0.0))
    throw NegativeTime("evolve: semigroup evolution is defined for t >= 0 only");
  GamowState out = state;
  out.amplitude *= std::polar(std::exp(-0.5 * state.width_gamma * t),
                              -state.energy_er * t);
  return out;
}

// exp(-gamma * t); equals |evolve(s,t).amplitude|^2 / |s.amplitude|^2.
inline double survival_probability(double gamma, double t) {
  if (!(gamma > 0.0)) throw InvalidRate("survival_probability: gamma must be > 0");
  if (!(t >= 0.0))
    throw NegativeTime("survival_probability: defined for t >= 0 only");
  return std::exp(-gamma * t);
}

// |<observable|state>|^2. The observable is expected to be unit-normalized;
// the result then lies in [0, |state|^2].
inline double born_probability_pure(const StateVector& observable,
                                    const StateVector& state) {
  if (observable.size() != state.size())
    throw DimensionMismatch("born_probability_pure: vector sizes differ");
  Complex overlap{};
  for (std::size_t i = 0; i < state.size(); ++i)
    overlap += std::conj(observable[i]) * state[i];
  return std::norm(overlap);
}

namespace detail {

inline void require_projector(const SquareMatrix& p, double tol) {
  if (hermitian_defect(p) > tol)
    throw NotAProjector("projector is not Hermitian within tolerance");
  const SquareMatrix pp = multiply(p, p);
  double defect = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i)
    defect = std::max(defect, std::abs(pp.a[i] - p.a[i]));
  if (defect > tol)
    throw NotAProjector("matrix is not idempotent within tolerance");
}

inline void require_density(const SquareMatrix& w, double tol) {
  if (hermitian_defect(w) > tol)
    throw NotADensity("state is not Hermitian within tolerance");
  if (std::abs(trace(w) - Complex{1.0, 0.0}) > tol)
    throw NotADensity("state trace differs from 1");
  const std::vector<double> eig = hermitian_eigenvalues(w);
  if (!eig.empty() && eig.front() < -tol)
    throw NotADensity("state has a negative eigenvalue");
}

}  // namespace detail

// Tr(projector * state), clamped to [0, 1]. The projector must be idempotent
// within 1e-10 and the state a valid density operator (Hermitian, unit trace,
// positive semidefinite within 1e-12).
inline double born_probability_mixed(const SquareMatrix& observable_projector,
                                     const SquareMatrix& state) {
  if (observable_projector.n != state.n)
    throw DimensionMismatch("born_probability_mixed: matrix sizes differ");
  detail::require_projector(observable_projector, 1e-10);
  detail::require_density(state, 1e-12);
  const double p = trace(multiply(observable_projector, state)).real();
  return std::min(1.0, std::max(0.0, p));
}

// tau = 1/gamma and gamma = 1/tau (hbar = 1).
inline double lifetime_from_width(double gamma) {
  if (!(gamma > 0.0)) throw InvalidRate("lifetime_from_width: gamma must be > 0");
  return 1.0 / gamma;
}

inline double width_from_lifetime(double tau) {
  if (!(tau > 0.0)) throw InvalidRate("width_from_lifetime: tau must be > 0");
  return 1.0 / tau;
}

// Composite-Simpson quadrature of the survival law, int_0^tmax exp(-g t) dt,
// as a numerical route to the mean lifetime 1/g. Requires t_max >= 20/g so
// the discarded tail is below 3e-9 of the integral, and n_steps >= 1000
// (rounded up to an even count).
inline double mean_lifetime_integral(double gamma, double t_max,
                                     std::size_t n_steps) {
  if (!(gamma > 0.0)) throw InvalidRate("mean_lifetime_integral: gamma must be > 0");
  if (!(t_max >= 20.0 / gamma))
    throw InsufficientRange("mean_lifetime_integral: t_max must be >= 20/gamma");
  if (n_steps < 1000)
    throw InvalidParams("mean_lifetime_integral: n_steps must be >= 1000");
  if (n_steps % 2 != 0) ++n_steps;
  const double h = t_max / static_cast<double>(n_steps);
  double sum = 1.0 + std::exp(-gamma * t_max);
  for (std::size_t k = 1; k < n_steps; ++k)
    sum += (k % 2 == 0 ? 2.0 : 4.0) * std::exp(-gamma * h * static_cast<double>(k));
  return sum * h / 3.0;
}

}  // namespace qjump
