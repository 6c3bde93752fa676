#pragma once

// Repeated-measurement purification of a qubit: the conditional map, the
// biorthogonal decomposition of the initial state, the closed-form purity
// after k steps, and the oscillation/monotonicity predicates and thresholds.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "repure/errors.hpp"
#include "repure/matrix.hpp"

namespace repure {

/// Qubit state: hermitian, unit-trace, positive-semidefinite 2x2 matrix.
class DensityMatrix {
 public:
  static constexpr double kTol = 1e-12;

  explicit DensityMatrix(const Mat2& m) : m_(m) {
    if (!is_finite(m_)) throw InvariantViolation("density matrix: non-finite entries");
    if (std::abs(m_(0, 1) - std::conj(m_(1, 0))) > kTol ||
        std::abs(m_(0, 0).imag()) > kTol || std::abs(m_(1, 1).imag()) > kTol)
      throw InvariantViolation("density matrix: not hermitian");
    const double tr = m_(0, 0).real() + m_(1, 1).real();
    if (std::abs(tr - 1.0) > kTol) throw InvariantViolation("density matrix: trace != 1");
    // eigenvalues of the hermitian part: tr/2 +- r
    const double h = 0.5 * (m_(0, 0).real() - m_(1, 1).real());
    const double r = std::hypot(h, std::abs(m_(0, 1)));
    if (0.5 * tr - r < -kTol)
      throw InvariantViolation("density matrix: negative eigenvalue");
    const double p = purity();
    if (p < 0.5 - kTol || p > 1.0 + kTol)
      throw InvariantViolation("density matrix: purity outside [1/2, 1]");
  }

  /// rho = [[p_up, coherence], [conj(coherence), 1 - p_up]] in the {up, down}
  /// basis; positivity requires |coherence|^2 <= p_up (1 - p_up).
  static DensityMatrix from_populations(double p_up, Cx coherence) {
    Mat2 m;
    m(0, 0) = p_up;
    m(0, 1) = coherence;
    m(1, 0) = std::conj(coherence);
    m(1, 1) = 1.0 - p_up;
    return DensityMatrix(m);
  }

  const Mat2& matrix() const { return m_; }

  /// tr(rho^2); real by hermiticity.
  double purity() const { return std::real(trace(m_ * m_)); }

 private:
  Mat2 m_;
};

/// Coefficients of the initial state in the biorthogonal basis of the map,
/// rho0 = a |u1><u1| + b |u2><u2| + c |u1><u2| + c* |u2><u1|, plus the
/// derived quantities driving the purity evolution.
struct InitialDecomposition {
  double a = 0.0;       ///< <v1|rho0|v1>, weight of the dominant eigenstate
  double b = 0.0;       ///< <v2|rho0|v2>
  Cx c;                 ///< <v1|rho0|v2>
  double c_tilde = 0.0; ///< |c <u2|u1>|, modulus of the oscillating cross term
  double beta = 0.0;    ///< arg(c <u2|u1>); 0 by convention when c_tilde = 0
  double delta = 0.0;   ///< arg(lambda1 lambda2*); the phase advance per step
  Cx overlap_u2u1;      ///< <u2|u1>
  double det_rho0 = 0.0;      ///< (ab - |c|^2) |<u2|u1_perp>|^2
  double det_residual = 0.0;  ///< |det rho0 - the identity above|, diagnostic

  /// alpha_k = arg[c <u2|u1> (lambda1 lambda2*)^k] = beta + k delta.
  double alpha(long k) const { return beta + static_cast<double>(k) * delta; }
};

namespace detail {

inline constexpr double kZeroTol = 1e-12;

inline void require_g_open(double g) {
  if (!(g > 0.0 && g < 1.0)) throw InvariantViolation("g must lie in (0, 1)");
}

// Smallest nonnegative integer >= bound; equality within 1e-12 resolves
// toward the smaller k.
inline long smallest_k_at_least(double bound) {
  if (!(bound > 0.0)) return 0;
  const double c = std::ceil(bound - 1e-12);
  return c < 0.0 ? 0 : static_cast<long>(c);
}

}  // namespace detail

/// Expand rho0 in the biorthogonal eigenbasis of the map.
///
/// The determinant identity det rho0 = (ab - |c|^2) |<u2|u1_perp>|^2 is
/// checked to 1e-10 and its residual kept for diagnostics; a violation, or a
/// negative a or b below -1e-12, signals a broken SpectralData.
inline InitialDecomposition decompose(const DensityMatrix& rho0, const SpectralData& s) {
  const Mat2& m = rho0.matrix();
  const Cx ac = inner(s.v1, m * s.v1);
  const Cx bc = inner(s.v2, m * s.v2);
  if (ac.real() < -detail::kZeroTol || bc.real() < -detail::kZeroTol ||
      std::abs(ac.imag()) > 1e-10 || std::abs(bc.imag()) > 1e-10)
    throw InvariantViolation("decompose: eigenstate weights must be nonnegative reals");

  InitialDecomposition d;
  d.a = std::max(0.0, ac.real());
  d.b = std::max(0.0, bc.real());
  d.c = inner(s.v1, m * s.v2);
  d.overlap_u2u1 = inner(s.u2, s.u1);
  d.c_tilde = std::abs(d.c * d.overlap_u2u1);
  d.beta = d.c_tilde > 0.0 ? std::arg(d.c * d.overlap_u2u1) : 0.0;
  d.delta = std::arg(s.lambda1 * std::conj(s.lambda2));

  const double ab_c2 = d.a * d.b - std::norm(d.c);
  if (ab_c2 < -detail::kZeroTol)
    throw InvariantViolation("decompose: ab - |c|^2 < 0 contradicts positivity");
  d.det_rho0 = ab_c2 * std::norm(inner(s.u2, s.u1_perp));
  d.det_residual = std::abs(std::real(det(m)) - d.det_rho0);
  if (d.det_residual > 1e-10)
    throw InvariantViolation("decompose: determinant identity violated");
  return d;
}

struct EvolveResult {
  DensityMatrix state;
  double weight;  ///< tr[V rho V+], the success probability of the step
};

/// One conditional step: rho -> V rho V+ / tr[V rho V+].
inline EvolveResult evolve_step(const DensityMatrix& rho, const Mat2& V,
                                double weight_floor = 1e-300) {
  Mat2 t = V * rho.matrix() * adjoint(V);
  const double w = std::real(trace(t));
  if (!(w > weight_floor))
    throw StateAnnihilated("evolve_step: success probability below floor");
  t = (0.5 / w) * (t + adjoint(t));  // normalize, shedding rounding drift
  return {DensityMatrix(t), w};
}

struct TrajectoryStep {
  long k;
  double purity;
  double success_weight;  ///< tr[V^k rho0 (V+)^k], probability of the record
  DensityMatrix state;
};

struct PurityTrajectory {
  std::vector<TrajectoryStep> steps;
  bool truncated = false;   ///< the record probability hit the floor
  long truncated_at = -1;   ///< first step that could not be produced
};

/// Iterate the conditional map k_max times, recording purity and cumulative
/// success weight. If some step annihilates the state the trajectory is
/// truncated there and marked, rather than thrown away.
inline PurityTrajectory trajectory(const DensityMatrix& rho0, const Mat2& V, long k_max,
                                   double weight_floor = 1e-300) {
  if (k_max < 0) throw InvalidK("trajectory: k_max must be nonnegative");
  PurityTrajectory out;
  out.steps.reserve(static_cast<std::size_t>(k_max) + 1);
  out.steps.push_back({0, rho0.purity(), 1.0, rho0});
  DensityMatrix cur = rho0;
  double cumulative = 1.0;
  for (long k = 1; k <= k_max; ++k) {
    try {
      EvolveResult r = evolve_step(cur, V, weight_floor);
      cumulative *= r.weight;
      cur = r.state;
    } catch (const StateAnnihilated&) {
      out.truncated = true;
      out.truncated_at = k;
      break;
    }
    out.steps.push_back({k, cur.purity(), cumulative, cur});
  }
  return out;
}

/// Purity after k steps:
///   P_k = 1 - 2 g^{2k} det rho0 / (a + b g^{2k} + 2 c~ g^k cos alpha_k)^2.
///
/// Valid for k = 0 only when g != 0 (a rank-1 map purifies in one step; use
/// tr rho0^2 directly for its initial purity).
inline double purity_closed_form(const InitialDecomposition& d, double g, long k) {
  if (k < 0) throw InvalidK("purity_closed_form: k must be nonnegative");
  if (!(g >= 0.0 && g < 1.0)) throw InvariantViolation("g must lie in [0, 1)");
  if (k == 0 && g == 0.0)
    throw InvalidK("purity_closed_form: k = 0 with a rank-1 map; use tr rho0^2");
  const double gk = std::pow(g, static_cast<double>(k));
  const double denom = d.a + d.b * gk * gk + 2.0 * d.c_tilde * gk * std::cos(d.alpha(k));
  if (denom <= 1e-14)
    throw DegenerateDenominator("purity_closed_form: normalization vanished");
  return 1.0 - 2.0 * gk * gk * d.det_rho0 / (denom * denom);
}

/// True iff a < b g - 2 g c~ / (1-g) (cos alpha_1 - cos alpha_0), i.e. the
/// purity drops at the first measurement (strictly, for det rho0 > 0).
inline bool local_min_at_first(const InitialDecomposition& d, double g) {
  detail::require_g_open(g);
  const double rhs = d.b * g - (2.0 * g * d.c_tilde / (1.0 - g)) *
                                   (std::cos(d.alpha(1)) - std::cos(d.alpha(0)));
  return d.a < rhs;
}

/// Necessary condition for a local purity maximum at the first measurement
/// (P_1 > P_0 and P_1 > P_2); never satisfied when c~ = 0.
inline bool local_max_at_first_possible(const InitialDecomposition& d, double g) {
  detail::require_g_open(g);
  const double rhs =
      2.0 * d.c_tilde / ((1.0 - g) * (1.0 - g) * (1.0 + g)) *
      (std::cos(d.alpha(1)) - std::cos(d.alpha(0)) +
       g * (std::cos(d.alpha(1)) - std::cos(d.alpha(2))));
  return d.b < rhs;
}

namespace detail {

// Left-hand side of the step-k monotonicity condition,
//   b g^{2k-1} - 2 g^k c~ / (1-g) (cos alpha_k - cos alpha_{k-1}) - a <= 0.
inline double monotonic_lhs(const InitialDecomposition& d, double g, long k) {
  const double gk = std::pow(g, static_cast<double>(k));
  return d.b * std::pow(g, static_cast<double>(2 * k - 1)) -
         (2.0 * gk * d.c_tilde / (1.0 - g)) *
             (std::cos(d.alpha(k)) - std::cos(d.alpha(k - 1))) -
         d.a;
}

// Envelope of monotonic_lhs: b g^{2k-1} + 4 c~ g^k / (1-g) - a, decreasing
// in k; once nonpositive it stays nonpositive.
inline double monotonic_envelope(const InitialDecomposition& d, double g, long k) {
  return d.b * std::pow(g, static_cast<double>(2 * k - 1)) +
         4.0 * d.c_tilde * std::pow(g, static_cast<double>(k)) / (1.0 - g) - d.a;
}

}  // namespace detail

/// Minimum number of measurements sufficient for monotonic purity:
/// the smallest integer k with g^k <= sqrt(4 g^2 c~^2 / ((1-g)^2 b^2) + a g / b)
///                                  - 2 g c~ / ((1-g) b).
///
/// Returns 0 for b = 0 (positivity then forces c = 0, so the state is the
/// pure target) and throws UndefinedThreshold for a = 0, where no finite
/// count works.
inline long k_threshold_sufficient(const InitialDecomposition& d, double g) {
  detail::require_g_open(g);
  if (d.b <= detail::kZeroTol) return 0;
  if (d.a <= detail::kZeroTol)
    throw UndefinedThreshold("k_threshold_sufficient: dominant eigenstate has zero weight");
  const double x = 2.0 * g * d.c_tilde / ((1.0 - g) * d.b);
  const double y = d.a * g / d.b;
  const double g_plus = y / (std::sqrt(x * x + y) + x);  // sqrt(x^2+y) - x, stably
  if (g_plus >= 1.0) return 0;
  return detail::smallest_k_at_least(std::log(g_plus) / std::log(g));
}

/// Exact monotonicity test: the purity is non-decreasing at every step
/// k >= k0. Finite steps up to k_probe are checked literally and everything
/// beyond is certified by the decreasing envelope bound; with the default
/// probe (the sufficient threshold above) the answer is exact, not sampled.
inline bool monotonic_from(const InitialDecomposition& d, double g, long k0,
                           std::optional<long> k_probe = std::nullopt) {
  detail::require_g_open(g);
  if (k0 < 1) throw InvalidK("monotonic_from: k0 must be >= 1");
  if (k_probe && *k_probe < k0) throw InvalidK("monotonic_from: k_probe must be >= k0");
  if (d.b <= detail::kZeroTol) return true;   // pure target: lhs = -a
  if (d.a <= detail::kZeroTol) return false;  // b g^{2k-1} > 0 at every k
  const long probe = k_probe ? *k_probe : std::max(k0, k_threshold_sufficient(d, g));
  for (long k = k0; k <= probe; ++k)
    if (detail::monotonic_lhs(d, g, k) > 0.0) return false;
  return detail::monotonic_envelope(d, g, probe + 1) <= 0.0;
}

struct SimplifiedThreshold {
  long k;
  bool exact;  ///< the simplified bound is necessary and sufficient
};

/// Simplified monotonicity threshold k >= (1 + log(a/b) / log g) / 2.
///
/// Exact (necessary and sufficient) when c~ = 0 or when lambda1 lambda2* is
/// real positive; otherwise a qualitative estimate. Reports at least 1 for
/// mixed states: the first measurement is the earliest step the condition
/// speaks about. b = 0 means the state already is the pure target, giving 0.
inline SimplifiedThreshold k_threshold_simplified(const InitialDecomposition& d, double g,
                                                  double tol = 1e-12) {
  detail::require_g_open(g);
  const bool exact =
      d.c_tilde <= tol || std::abs(std::remainder(d.delta, 2.0 * std::numbers::pi)) <= tol;
  if (d.b <= detail::kZeroTol) return {0, exact};
  if (d.a <= detail::kZeroTol)
    throw UndefinedThreshold("k_threshold_simplified: dominant eigenstate has zero weight");
  const double bound = 0.5 * (1.0 + std::log(d.a / d.b) / std::log(g));
  return {std::max<long>(1, detail::smallest_k_at_least(bound)), exact};
}

/// Everything the oscillation analysis has to say about one configuration.
struct OscillationReport {
  bool local_min_at_1 = false;
  bool local_max_at_1_possible = false;
  long k_monotonic_sufficient = 0;
  long k_monotonic_simplified = 0;
  bool simplified_is_exact = false;
};

inline OscillationReport analyze_oscillations(const InitialDecomposition& d, double g) {
  OscillationReport r;
  r.local_min_at_1 = local_min_at_first(d, g);
  r.local_max_at_1_possible = local_max_at_first_possible(d, g);
  r.k_monotonic_sufficient = k_threshold_sufficient(d, g);
  const SimplifiedThreshold st = k_threshold_simplified(d, g);
  r.k_monotonic_simplified = st.k;
  r.simplified_is_exact = st.exact;
  return r;
}

}  // namespace repure
