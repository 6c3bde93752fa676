#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "repure/matrix.hpp"
#include "testutil.hpp"

using namespace repure;
using testutil::random_mat2;

namespace {
constexpr Cx kI{0.0, 1.0};
}

TEST_CASE("matrix product against identity and annihilator") {
  std::mt19937_64 rng(11);
  Mat2 m = random_mat2(rng);
  Mat2 zero;

  CHECK(max_abs(Mat2::identity() * m - m) == 0.0);
  CHECK(max_abs(m * Mat2::identity() - m) == 0.0);
  CHECK(max_abs(m * zero) == 0.0);
}

TEST_CASE("matrix product matches explicit index sums") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Mat2 a = random_mat2(rng);
    Mat2 b = random_mat2(rng);
    Mat2 p = a * b;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Cx expect = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
        CHECK(std::abs(p(i, j) - expect) < 1e-15);
      }
  }
}

TEST_CASE("adjoint is an involution") {
  std::mt19937_64 rng(13);
  Mat2 m = random_mat2(rng);
  CHECK(max_abs(adjoint(adjoint(m)) - m) == 0.0);

  Mat4 m4;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m4(i, j) = Cx{u(rng), u(rng)};
  CHECK(max_abs(adjoint(adjoint(m4)) - m4) == 0.0);
}

TEST_CASE("trace and determinant basics") {
  CHECK(trace(Mat2::identity()) == Cx{2.0, 0.0});
  CHECK(trace(Mat4::identity()) == Cx{4.0, 0.0});

  Cx l1{0.3, -0.8}, l2{-1.1, 0.4};
  Mat2 d;
  d(0, 0) = l1;
  d(1, 1) = l2;
  CHECK(std::abs(det(d) - l1 * l2) < 1e-15);
}

TEST_CASE("eigendecomposition of the diagonal up-state map") {
  // V = diag(e^{-2i w t}, e^{-i w t} cos(e t)): the dominant state is up
  // and g comes out as |cos(e t)|.
  const double omega_tau = 1.3;
  const double eps_tau = 0.7;
  const Cx l1 = std::exp(-2.0 * kI * omega_tau);
  const Cx l2 = std::exp(-kI * omega_tau) * std::cos(eps_tau);
  Mat2 v;
  v(0, 0) = l1;
  v(1, 1) = l2;

  SpectralData s = eig_biorthogonal(v);
  CHECK(std::abs(s.lambda1 - l1) < 1e-14);
  CHECK(std::abs(s.lambda2 - l2) < 1e-14);
  CHECK(std::abs(s.u1[0] - 1.0) < 1e-14);
  CHECK(std::abs(s.u1[1]) < 1e-14);
  CHECK(std::abs(s.u2[0]) < 1e-14);
  CHECK(std::abs(s.u2[1] - 1.0) < 1e-14);
  CHECK(s.g == Catch::Approx(std::abs(std::cos(eps_tau))).margin(1e-12));
}

TEST_CASE("eigendecomposition rejects degenerate maps") {
  CHECK_THROWS_AS(eig_biorthogonal(Mat2::identity()), NonExtractive);

  Mat2 scaled = Cx{0.0, 2.0} * Mat2::identity();
  CHECK_THROWS_AS(eig_biorthogonal(scaled), NonExtractive);

  Mat2 jordan;  // repeated eigenvalue, one eigenvector
  jordan(0, 0) = 1.0;
  jordan(0, 1) = 1.0;
  jordan(1, 1) = 1.0;
  CHECK_THROWS_AS(eig_biorthogonal(jordan), DefectiveMap);

  CHECK_THROWS_AS(eig_biorthogonal(Mat2{}), NullMap);

  // equal moduli with distinct eigenvalues also selects no dominant state
  Mat2 antidiag;
  antidiag(0, 0) = 1.0;
  antidiag(1, 1) = -1.0;
  CHECK_THROWS_AS(eig_biorthogonal(antidiag), NonExtractive);
}

TEST_CASE("eigendecomposition invariants on random maps") {
  std::mt19937_64 rng(14);
  int accepted = 0;
  while (accepted < 1000) {
    Mat2 v = random_mat2(rng);
    SpectralData s;
    try {
      s = eig_biorthogonal(v);
    } catch (const Error&) {
      continue;
    }
    ++accepted;

    CHECK(std::abs(s.lambda1) >= std::abs(s.lambda2));
    CHECK(s.g >= 0.0);
    CHECK(s.g < 1.0);
    CHECK(norm(s.u1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(norm(s.u2) == Catch::Approx(1.0).margin(1e-12));

    CHECK(std::abs(inner(s.v1, s.u1) - 1.0) < 1e-12);
    CHECK(std::abs(inner(s.v2, s.u2) - 1.0) < 1e-12);
    CHECK(std::abs(inner(s.v1, s.u2)) < 1e-12);
    CHECK(std::abs(inner(s.v2, s.u1)) < 1e-12);

    CHECK(std::abs(inner(s.u1, s.u1_perp)) < 1e-12);
    CHECK(norm(s.u1_perp) == Catch::Approx(1.0).margin(1e-12));

    Mat2 rebuilt = s.lambda1 * outer(s.u1, s.v1) + s.lambda2 * outer(s.u2, s.v2);
    CHECK(max_abs(rebuilt - v) < 1e-10 * max_abs(v));

    CHECK(std::abs(det(v) - s.lambda1 * s.lambda2) < 1e-12);
  }
}

TEST_CASE("eigenvector phase convention is deterministic") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    Mat2 v = testutil::random_map(rng);
    SpectralData s = eig_biorthogonal(v);
    for (const Vec2& u : {s.u1, s.u2, s.u1_perp}) {
      std::size_t big = std::abs(u[0]) >= std::abs(u[1]) ? 0 : 1;
      CHECK(u[big].real() > 0.0);
      CHECK(std::abs(u[big].imag()) < 1e-12 * std::abs(u[big]));
    }
  }
}

TEST_CASE("global phase rotation leaves the decomposition invariant") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    Mat2 v = testutil::random_map(rng);
    SpectralData s = eig_biorthogonal(v);

    // a sign flip is exact in floating point, so g must match bit for bit
    SpectralData sneg = eig_biorthogonal(Cx{-1.0, 0.0} * v);
    CHECK(sneg.g == s.g);

    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    SpectralData srot = eig_biorthogonal(std::exp(kI * u(rng)) * v);
    CHECK(srot.g == Catch::Approx(s.g).epsilon(1e-13));
    CHECK(std::abs(std::abs(inner(srot.u1, s.u1)) - 1.0) < 1e-10);
    CHECK(std::abs(std::abs(inner(srot.u2, s.u2)) - 1.0) < 1e-10);
  }
}

TEST_CASE("spectral sum rebuilds a matrix from an orthonormal eigenbasis") {
  const double r = 1.0 / std::numbers::sqrt2;
  std::array<Vec2, 2> basis = {Vec2{{Cx{r, 0.0}, Cx{r, 0.0}}},
                               Vec2{{Cx{r, 0.0}, Cx{-r, 0.0}}}};
  std::array<Cx, 2> coeff = {Cx{2.0, 0.0}, Cx{0.5, 0.0}};
  Mat2 m = spectral_sum<2>(basis, coeff);

  // eigen relation for both basis vectors
  for (int j = 0; j < 2; ++j) {
    Vec2 lhs = m * basis[j];
    for (int i = 0; i < 2; ++i) CHECK(std::abs(lhs[i] - coeff[j] * basis[j][i]) < 1e-14);
  }
}

TEST_CASE("non-finite input is rejected") {
  Mat2 bad = Mat2::identity();
  bad(0, 1) = Cx{std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK(!is_finite(bad));
  CHECK_THROWS_AS(eig_biorthogonal(bad), InvariantViolation);
}
