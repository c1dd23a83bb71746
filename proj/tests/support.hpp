#pragma once

#include <random>

#include "h2net/linalg.hpp"
#include "h2net/network.hpp"

namespace h2net::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  return M;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

// A random Hurwitz matrix: shifted so its abscissa is at most -0.1.
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n) {
  Matrix A = random_matrix(rng, n, n);
  const double abscissa = linalg::spectral_abscissa(A);
  A.diagonal().array() -= abscissa + 0.1 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return A;
}

// Lyapunov oracle through vectorization: (I kron A + A kron I) vec P = -vec Q.
inline Matrix kron_lyapunov(const Matrix& A, const Matrix& Q) {
  const Index n = A.rows();
  Matrix L = Matrix::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) += A(i, j) * Matrix::Identity(n, n);
      if (i == j) L.block(i * n, j * n, n, n) += A;
    }
  const Vector q = -Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector p = L.fullPivLu().solve(q);
  return Eigen::Map<const Matrix>(p.data(), n, n);
}

// Random connected weighted Laplacian: a spanning path plus random extra edges.
inline Matrix random_laplacian(std::mt19937_64& rng, Index n, double extra = 0.3) {
  std::uniform_real_distribution<double> w(0.2, 2.0), u(0.0, 1.0);
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix L = Matrix::Zero(n, n);
  auto edge = [&](Index a, Index b, double weight) {
    L(a, b) -= weight;
    L(b, a) -= weight;
    L(a, a) += weight;
    L(b, b) += weight;
  };
  for (Index i = 0; i + 1 < n; ++i) edge(perm[i], perm[i + 1], w(rng));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (L(i, j) == 0.0 && u(rng) < extra) edge(i, j, w(rng));
  return L;
}

// Validated network with proportional damping and a single grounded node.
inline SecondOrderNetwork random_network(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix L = random_laplacian(rng, n);
  Vector v = Vector::Zero(n);
  v(static_cast<Index>(u(rng) * n)) = 0.5 + u(rng);
  const double alpha = 0.3 + u(rng);
  const double beta = 0.3 * u(rng);
  Matrix F = Matrix::Zero(n, 1);
  F(static_cast<Index>(u(rng) * n), 0) = 1.0;
  Matrix H = Matrix::Zero(1, n);
  H(0, static_cast<Index>(u(rng) * n)) = 1.0;
  return SecondOrderNetwork(v, L, alpha, beta, F, H);
}

inline bool near(const Matrix& A, const Matrix& B, double tol) {
  return A.rows() == B.rows() && A.cols() == B.cols() && (A - B).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace h2net::testing
