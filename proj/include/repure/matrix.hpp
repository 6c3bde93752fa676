#pragma once

// Exact-size complex dense matrices (2x2 and 4x4) and a closed-form
// eigensolver producing biorthonormal left/right eigenvector pairs for
// general, possibly non-normal, 2x2 maps.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <utility>

#include "repure/errors.hpp"

namespace repure {

using Cx = std::complex<double>;

/// Default relative tolerance for structural checks.
inline constexpr double kDefaultTol = 1e-9;

template <std::size_t N>
struct CVector {
  std::array<Cx, N> e{};

  Cx& operator[](std::size_t i) { return e[i]; }
  const Cx& operator[](std::size_t i) const { return e[i]; }
};

/// Square complex matrix of static size, row-major, value semantics.
template <std::size_t N>
struct CMatrix {
  std::array<Cx, N * N> e{};

  Cx& operator()(std::size_t i, std::size_t j) { return e[i * N + j]; }
  const Cx& operator()(std::size_t i, std::size_t j) const { return e[i * N + j]; }

  static CMatrix identity() {
    CMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
};

using Vec2 = CVector<2>;
using Vec4 = CVector<4>;
using Mat2 = CMatrix<2>;
using Mat4 = CMatrix<4>;

template <std::size_t N>
inline CMatrix<N> operator+(const CMatrix<N>& a, const CMatrix<N>& b) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.e[i] = a.e[i] + b.e[i];
  return r;
}

template <std::size_t N>
inline CMatrix<N> operator-(const CMatrix<N>& a, const CMatrix<N>& b) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.e[i] = a.e[i] - b.e[i];
  return r;
}

template <std::size_t N>
inline CMatrix<N> operator*(const Cx& s, const CMatrix<N>& a) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.e[i] = s * a.e[i];
  return r;
}

template <std::size_t N>
inline CMatrix<N> operator*(double s, const CMatrix<N>& a) {
  return Cx(s, 0.0) * a;
}

template <std::size_t N>
inline CMatrix<N> operator*(const CMatrix<N>& a, const CMatrix<N>& b) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k) {
      const Cx aik = a(i, k);
      for (std::size_t j = 0; j < N; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

template <std::size_t N>
inline CVector<N> operator*(const CMatrix<N>& a, const CVector<N>& v) {
  CVector<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i] += a(i, j) * v[j];
  return r;
}

template <std::size_t N>
inline CVector<N> operator*(const Cx& s, const CVector<N>& v) {
  CVector<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = s * v[i];
  return r;
}

/// <u|v>, conjugating the left argument.
template <std::size_t N>
inline Cx inner(const CVector<N>& u, const CVector<N>& v) {
  Cx s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::conj(u[i]) * v[i];
  return s;
}

template <std::size_t N>
inline double norm(const CVector<N>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::norm(v[i]);
  return std::sqrt(s);
}

/// |u><v|
template <std::size_t N>
inline CMatrix<N> outer(const CVector<N>& u, const CVector<N>& v) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r(i, j) = u[i] * std::conj(v[j]);
  return r;
}

template <std::size_t N>
inline CMatrix<N> adjoint(const CMatrix<N>& m) {
  CMatrix<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r(i, j) = std::conj(m(j, i));
  return r;
}

template <std::size_t N>
inline Cx trace(const CMatrix<N>& m) {
  Cx s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += m(i, i);
  return s;
}

inline Cx det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

template <std::size_t N>
inline double max_abs(const CMatrix<N>& m) {
  double s = 0.0;
  for (const Cx& z : m.e) s = std::max(s, std::abs(z));
  return s;
}

template <std::size_t N>
inline bool is_finite(const CMatrix<N>& m) {
  for (const Cx& z : m.e)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

/// sum_j coeff_j |basis_j><basis_j| over an orthonormal basis. Evaluates any
/// function of a hermitian matrix directly from its known eigensystem, e.g.
/// exp(-iHt) with coeff_j = exp(-i E_j t).
template <std::size_t N>
inline CMatrix<N> spectral_sum(const std::array<CVector<N>, N>& basis,
                               const std::array<Cx, N>& coeff) {
  CMatrix<N> r;
  for (std::size_t j = 0; j < N; ++j) r = r + coeff[j] * outer(basis[j], basis[j]);
  return r;
}

/// Eigensystem of a diagonalizable 2x2 map with a strictly dominant
/// eigenvalue: |lambda1| > |lambda2|, right eigenvectors u_j normalized to
/// unit norm, left eigenvectors v_i scaled so <v_i|u_j> = delta_ij, and the
/// unit vector u1_perp orthogonal to u1.
struct SpectralData {
  Cx lambda1;
  Cx lambda2;
  Vec2 u1, u2;
  Vec2 v1, v2;
  Vec2 u1_perp;
  double g = 0.0;  ///< |lambda2| / |lambda1|, in [0, 1)
};

namespace detail {

// Global phase convention: the given component becomes real positive.
inline Vec2 fix_phase(Vec2 v, std::size_t i) {
  const double m = std::abs(v[i]);
  if (m > 0.0) {
    const Cx rot = std::conj(v[i]) / m;
    v[0] *= rot;
    v[1] *= rot;
  }
  return v;
}

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  v[0] /= n;
  v[1] /= n;
  return v;
}

// Unit right eigenvector of V for eigenvalue lambda, phase fixed so the
// largest-modulus component is real positive.
inline Vec2 right_eigenvector(const Mat2& V, Cx lambda, double scale) {
  // Both candidates annihilate (V - lambda) exactly by the characteristic
  // polynomial; pick the better conditioned one.
  const Vec2 c1{{V(0, 1), lambda - V(0, 0)}};
  const Vec2 c2{{lambda - V(1, 1), V(1, 0)}};
  Vec2 u = (norm(c1) >= norm(c2)) ? c1 : c2;
  if (norm(u) <= 1e-14 * scale) {
    // (near-)diagonal map: fall back to the basis vector of the closer entry
    u = (std::abs(lambda - V(0, 0)) <= std::abs(lambda - V(1, 1))) ? Vec2{{1.0, 0.0}}
                                                                   : Vec2{{0.0, 1.0}};
  }
  u = normalized(u);
  return fix_phase(u, std::abs(u[0]) >= std::abs(u[1]) ? 0 : 1);
}

}  // namespace detail

/// Closed-form biorthogonal eigendecomposition of a 2x2 map.
///
/// Throws NullMap for a numerically zero map, DefectiveMap when the map is
/// not diagonalizable, and NonExtractive when the two eigenvalue moduli
/// coincide within `tol` (relative), since then no dominant eigenstate
/// exists and every downstream formula divides by 1 - g.
inline SpectralData eig_biorthogonal(const Mat2& V, double tol = kDefaultTol) {
  if (!is_finite(V)) throw InvariantViolation("eig_biorthogonal: non-finite entries");
  const double scale = max_abs(V);
  if (scale < std::numeric_limits<double>::min())
    throw NullMap("eig_biorthogonal: map is numerically zero");

  const Cx tr = trace(V);
  const Cx dt = det(V);
  Cx sq = std::sqrt(tr * tr - 4.0 * dt);
  if (std::real(std::conj(tr) * sq) < 0.0) sq = -sq;
  Cx l1 = 0.5 * (tr + sq);
  Cx l2 = (std::abs(l1) > 0.0) ? dt / l1 : 0.5 * (tr - sq);
  if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);

  if (std::abs(l1 - l2) <= tol * scale) {
    // Repeated eigenvalue: a scalar map is diagonalizable but has g = 1,
    // anything else has a one-dimensional eigenspace.
    Mat2 d = V;
    d(0, 0) -= l1;
    d(1, 1) -= l1;
    if (max_abs(d) <= tol * scale)
      throw NonExtractive("eig_biorthogonal: scalar map, eigenvalue moduli coincide");
    throw DefectiveMap("eig_biorthogonal: repeated eigenvalue with a single eigenvector");
  }
  if (std::abs(std::abs(l1) - std::abs(l2)) <= tol * std::abs(l1))
    throw NonExtractive("eig_biorthogonal: eigenvalue moduli coincide within tolerance");

  SpectralData s;
  s.lambda1 = l1;
  s.lambda2 = l2;
  s.g = std::abs(l2) / std::abs(l1);
  s.u1 = detail::right_eigenvector(V, l1, scale);
  s.u2 = detail::right_eigenvector(V, l2, scale);

  // Rows of [u1 u2]^{-1} give the biorthonormal bras; store them as kets.
  const Cx du = s.u1[0] * s.u2[1] - s.u1[1] * s.u2[0];
  if (std::abs(du) <= 1e-14)
    throw DefectiveMap("eig_biorthogonal: eigenvectors are numerically parallel");
  s.v1 = Vec2{{std::conj(s.u2[1] / du), std::conj(-s.u2[0] / du)}};
  s.v2 = Vec2{{std::conj(-s.u1[1] / du), std::conj(s.u1[0] / du)}};

  Vec2 perp{{-std::conj(s.u1[1]), std::conj(s.u1[0])}};
  perp = detail::normalized(perp);
  s.u1_perp = detail::fix_phase(perp, std::abs(perp[0]) >= std::abs(perp[1]) ? 0 : 1);
  return s;
}

}  // namespace repure
