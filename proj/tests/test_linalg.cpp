#include <doctest.h>

#include "h2net/errors.hpp"
#include "h2net/linalg.hpp"
#include "support.hpp"

using namespace h2net;
using namespace h2net::testing;

TEST_CASE("bartels-stewart agrees with the kronecker oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 10;
    const Matrix A = random_hurwitz(rng, n);
    const Matrix B = random_matrix(rng, n, 2);
    const Matrix Q = B * B.transpose();
    const LyapunovSolution sol = linalg::solve_lyapunov(A, Q);
    const Matrix ref = kron_lyapunov(A, Q);
    CHECK((sol.P - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
    CHECK(sol.residual_norm <= 1e-9 * std::max(1.0, Q.norm()) * std::max(1.0, sol.P.norm()));
    CHECK(linalg::symmetry_defect(sol.P) == 0.0);
  }
}

TEST_CASE("lyapunov handles complex-pair schur blocks") {
  Matrix A(2, 2);
  A << -1, 5, -5, -1;
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix P = linalg::solve_lyapunov(A, Q).P;
  CHECK((A * P + P * A.transpose() + Q).norm() < 1e-12);
  CHECK(near(P, kron_lyapunov(A, Q), 1e-12));
}

TEST_CASE("lyapunov rejects non-hurwitz input") {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  CHECK_THROWS_AS(linalg::solve_lyapunov(A, Matrix::Identity(2, 2)), Error);
  try {
    linalg::solve_lyapunov(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHurwitz);
  }
  CHECK_THROWS_AS(linalg::solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("h2 norm closed forms") {
  // 1/(s + a): squared norm 1/(2a).
  StateSpace first{Matrix::Constant(1, 1, -3.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  CHECK(linalg::h2_norm(first) == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-12));

  // 1/(s^2 + d s + k): squared norm 1/(2 d k).
  const double d = 0.7, k = 2.5;
  Matrix A(2, 2);
  A << 0, 1, -k, -d;
  Matrix B(2, 1);
  B << 0, 1;
  Matrix C(1, 2);
  C << 1, 0;
  CHECK(linalg::h2_norm({A, B, C}) == doctest::Approx(std::sqrt(1.0 / (2 * d * k))).epsilon(1e-12));
}

TEST_CASE("h2 norm is invariant under state coordinate changes") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 6;
    const StateSpace sys{random_hurwitz(rng, n), random_matrix(rng, n, 2), random_matrix(rng, 3, n)};
    const Matrix T = random_orthogonal(rng, n);
    const StateSpace moved{T * sys.A * T.transpose(), T * sys.B, sys.C * T.transpose()};
    CHECK(linalg::h2_norm(moved) == doctest::Approx(linalg::h2_norm(sys)).epsilon(1e-9));
  }
}

TEST_CASE("symmetric eigendecomposition ordering and errors") {
  Matrix M(3, 3);
  M << 2, 1, 0, 1, 2, 0, 0, 0, 5;
  const SymEig asc = linalg::sym_eig(M, EigenOrder::Ascending);
  const SymEig desc = linalg::sym_eig(M, EigenOrder::Descending);
  CHECK(asc.values(0) == doctest::Approx(1.0));
  CHECK(desc.values(0) == doctest::Approx(5.0));
  CHECK(near(desc.vectors * desc.values.asDiagonal() * desc.vectors.transpose(), M, 1e-12));
  Matrix bad = M;
  bad(0, 1) += 1e-3;
  CHECK_THROWS_AS(linalg::sym_eig(bad, EigenOrder::Ascending), Error);
}

TEST_CASE("spd schur factor is sorted with sign convention") {
  std::mt19937_64 rng(3);
  const Matrix G = random_matrix(rng, 5, 5);
  const Matrix X = G * G.transpose() + 0.1 * Matrix::Identity(5, 5);
  const SpdSchur s = linalg::schur_decompose_spd(X);
  for (Index k = 0; k + 1 < 5; ++k) CHECK(s.z(k) >= s.z(k + 1));
  CHECK(near(s.U * s.z.asDiagonal() * s.U.transpose(), X, 1e-10));
  for (Index k = 0; k < 5; ++k) {
    Index arg = 0;
    s.U.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(s.U(arg, k) > 0);
  }
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1;
  CHECK_THROWS_AS(linalg::schur_decompose_spd(singular), Error);
}

TEST_CASE("canonical basis depends only on the subspace") {
  std::mt19937_64 rng(8);
  const Matrix V = random_orthogonal(rng, 6).leftCols(2);
  const Matrix R = random_orthogonal(rng, 2);
  const Matrix a = linalg::canonical_basis(V);
  const Matrix b = linalg::canonical_basis(V * R);
  CHECK(near(a, b, 1e-10));
  CHECK(near(a.transpose() * a, Matrix::Identity(2, 2), 1e-12));
}

TEST_CASE("polar factor is orthogonal and nearest") {
  std::mt19937_64 rng(9);
  const Matrix Q = random_orthogonal(rng, 4);
  const Matrix A = Q + 1e-3 * random_matrix(rng, 4, 4);
  const Matrix P = linalg::orthogonal_polar(A);
  CHECK(near(P.transpose() * P, Matrix::Identity(4, 4), 1e-12));
  CHECK((P - Q).norm() < 3e-3);
  CHECK(near(linalg::orthogonal_polar(Q), Q, 1e-12));
}

TEST_CASE("spectral abscissa handles complex pairs") {
  Matrix A(3, 3);
  A << -1, 4, 0, -4, -1, 0, 0, 0, -0.5;
  CHECK(linalg::spectral_abscissa(A) == doctest::Approx(-0.5));
  CHECK(linalg::is_hurwitz(A));
  A(2, 2) = 0.0;
  CHECK_FALSE(linalg::is_hurwitz(A));
}
