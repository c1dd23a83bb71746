#pragma once

// Dense kernels: symmetric eigendecomposition, SPD Schur factorization,
// Lyapunov equations and H2 norms of LTI realizations.

#include <complex>

#include <Eigen/Dense>

namespace h2net {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

enum class EigenOrder { Ascending, Descending };

/// Continuous-time realization (A, B, C) of an LTI system.
struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;

  Index states() const { return A.rows(); }
  /// Throws DimensionMismatch unless A is square and B, C conform to it.
  void check_dimensions() const;
};

struct LyapunovSolution {
  Matrix P;              // symmetric
  double residual_norm;  // ||A P + P A^T + Q||_F
};

struct SymEig {
  Vector values;
  Matrix vectors;  // columns are orthonormal eigenvectors
};

/// X1 = U * diag(z) * U^T with z sorted descending and strictly positive.
struct SpdSchur {
  Matrix U;
  Vector z;
};

namespace linalg {

// Hurwitz test used everywhere: every eigenvalue real part < -kHurwitzMargin.
inline constexpr double kHurwitzMargin = 1e-12;

Matrix sym(const Matrix& A);  // A + A^T
Matrix block_diag(const Matrix& A, const Matrix& B);
double symmetry_defect(const Matrix& M);  // max |M - M^T| / max(1, max |M|)

/// Largest real part of the spectrum of A.
double spectral_abscissa(const Matrix& A);
bool is_hurwitz(const Matrix& A);

/// Solves A P + P A^T + Q = 0 with the Bartels-Stewart method on the real
/// Schur form of A. Throws NotHurwitz or DimensionMismatch.
LyapunovSolution solve_lyapunov(const Matrix& A, const Matrix& Q);

/// sqrt(tr(C P C^T)) with P the controllability Gramian.
double h2_norm(const StateSpace& sys);

/// Eigendecomposition of a symmetric matrix with an explicit ordering.
/// Throws NotSymmetric when M deviates from M^T beyond 1e-12 relative.
SymEig sym_eig(const Matrix& M, EigenOrder order);

/// Orthogonal factorization of an SPD matrix (its real Schur form).
/// Eigenvalues descending. Throws NotPositiveDefinite.
SpdSchur schur_decompose_spd(const Matrix& X1);

double min_eigenvalue(const Matrix& M);
double max_eigenvalue(const Matrix& M);
double spectral_norm_sym(const Matrix& M);

/// Canonical orthonormal basis of span(V): Gram-Schmidt of the projected
/// standard basis vectors. Independent of the input basis of the subspace.
Matrix canonical_basis(const Matrix& V);

/// Polar factor of a square nonsingular matrix.
Matrix orthogonal_polar(const Matrix& A);

}  // namespace linalg
}  // namespace h2net
