#pragma once

// Two qubits (system S, repeatedly measured partner X) with an
// excitation-preserving dipole coupling. Produces the conditional map on S
// for measurements finding X in |theta>, both in closed form and through
// full 4x4 spectral evolution, plus the monotonicity threshold map.
//
// Basis conventions, fixed throughout: the 4x4 product basis is ordered
// {up up, up down, down up, down down} with S first (index = 2 s + x), and
// the 2x2 space of S is ordered {up, down}.

#include <array>
#include <cmath>
#include <numbers>

#include "repure/errors.hpp"
#include "repure/matrix.hpp"

namespace repure::twoqubit {

struct ModelParams {
  double omega;    ///< Bohr frequency, in units of the coupling
  double epsilon;  ///< coupling strength
  double tau;      ///< time between measurements
  double theta;    ///< measured-state angle in [0, pi]:
                   ///< |theta>_X = cos(theta/2)|up> + sin(theta/2)|down>
};

inline void validate(const ModelParams& p) {
  if (!(std::isfinite(p.omega) && std::isfinite(p.epsilon) && std::isfinite(p.tau) &&
        std::isfinite(p.theta)))
    throw InvariantViolation("model params: non-finite value");
  if (!(p.omega > 0.0)) throw InvariantViolation("model params: omega must be positive");
  if (!(p.epsilon > 0.0)) throw InvariantViolation("model params: epsilon must be positive");
  if (!(p.tau >= 0.0)) throw InvariantViolation("model params: tau must be nonnegative");
  if (!(p.theta >= 0.0 && p.theta <= std::numbers::pi))
    throw InvariantViolation("model params: theta must lie in [0, pi]");
}

/// H = sum_i (Omega/2)(1 + sigma_z^i) + eps (sigma+_S sigma-_X + sigma-_S sigma+_X).
inline Mat4 hamiltonian(const ModelParams& p) {
  validate(p);
  Mat4 h;
  h(0, 0) = 2.0 * p.omega;
  h(1, 1) = p.omega;
  h(2, 2) = p.omega;
  h(1, 2) = p.epsilon;
  h(2, 1) = p.epsilon;
  return h;
}

/// The four analytic eigenstates, ordered {|2>, |1>, |0>, |s>} with energies
/// {2 Omega, Omega + eps, 0, Omega - eps}. The singlet |s> is decoupled.
struct EigenSystem4 {
  std::array<Vec4, 4> states;
  std::array<double, 4> energies;
};

inline EigenSystem4 eigensystem(const ModelParams& p) {
  validate(p);
  const double r = 1.0 / std::numbers::sqrt2;
  EigenSystem4 es;
  es.states[0] = Vec4{{1.0, 0.0, 0.0, 0.0}};
  es.states[1] = Vec4{{0.0, r, r, 0.0}};
  es.states[2] = Vec4{{0.0, 0.0, 0.0, 1.0}};
  es.states[3] = Vec4{{0.0, r, -r, 0.0}};
  es.energies = {2.0 * p.omega, p.omega + p.epsilon, 0.0, p.omega - p.epsilon};

  const Mat4 h = hamiltonian(p);
  for (std::size_t j = 0; j < 4; ++j) {
    const Vec4 hv = h * es.states[j];
    for (std::size_t i = 0; i < 4; ++i)
      if (std::abs(hv[i] - es.energies[j] * es.states[j][i]) > 1e-12)
        throw InvariantViolation("eigensystem: analytic state fails H|e> = E|e>");
  }
  return es;
}

/// Closed-form conditional map on S for a measurement finding X in |theta>.
inline Mat2 v_operator(const ModelParams& p) {
  validate(p);
  const double c = std::cos(0.5 * p.theta);
  const double s = std::sin(0.5 * p.theta);
  const Cx e1 = std::exp(Cx(0.0, -p.omega * p.tau));
  const Cx e2 = std::exp(Cx(0.0, -2.0 * p.omega * p.tau));
  const double ce = std::cos(p.epsilon * p.tau);
  const double se = std::sin(p.epsilon * p.tau);
  Mat2 v;
  v(0, 0) = e2 * (c * c) + e1 * ce * (s * s);
  v(1, 1) = s * s + e1 * ce * (c * c);
  v(0, 1) = Cx(0.0, -1.0) * e1 * se * s * c;
  v(1, 0) = v(0, 1);
  return v;
}

/// The same map computed the long way: exp(-iH tau) by spectral expansion
/// over the analytic eigensystem, then contraction of the X indices with
/// |theta> on both sides. Shares no algebra with v_operator.
inline Mat2 v_from_full_evolution(const ModelParams& p) {
  validate(p);
  const EigenSystem4 es = eigensystem(p);
  std::array<Cx, 4> phases;
  for (std::size_t j = 0; j < 4; ++j)
    phases[j] = std::exp(Cx(0.0, -es.energies[j] * p.tau));
  const Mat4 u = spectral_sum(es.states, phases);

  const std::array<double, 2> th{std::cos(0.5 * p.theta), std::sin(0.5 * p.theta)};
  Mat2 v;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t sp = 0; sp < 2; ++sp)
      for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t xp = 0; xp < 2; ++xp)
          v(s, sp) += th[x] * u(2 * s + x, 2 * sp + xp) * th[xp];
  return v;
}

/// Monotonicity threshold for the up-state measurement (theta = 0) starting
/// from a state with up-population p_up:
///   eta = max{0, (1 + log(p_up / (1 - p_up)) / log|cos(eps tau)|) / 2}.
///
/// eta < 1 means the purity increases monotonically from the first
/// measurement on. |cos(eps tau)| ~ 1 (eps tau near a multiple of pi) makes
/// the map non-extractive and throws DegenerateTau; |cos(eps tau)| ~ 0 is
/// the rank-1 limit, where the bound tends to 1/2 for every p_up.
inline double eta_threshold(double p_up, double eps_tau) {
  if (!(p_up > 0.0 && p_up < 1.0))
    throw InvariantViolation("eta_threshold: p_up must lie in (0, 1)");
  const double gc = std::abs(std::cos(eps_tau));
  if (gc >= 1.0 - 1e-12)
    throw DegenerateTau("eta_threshold: |cos(eps tau)| ~ 1, no dominant eigenstate");
  if (gc <= 1e-12) return 0.5;
  return std::max(0.0, 0.5 * (1.0 + std::log(p_up / (1.0 - p_up)) / std::log(gc)));
}

/// Threshold for measuring the down-state instead: same formula with
/// p_up -> 1 - p_up.
inline double down_state_threshold(double p_up, double eps_tau) {
  return eta_threshold(1.0 - p_up, eps_tau);
}

}  // namespace repure::twoqubit
