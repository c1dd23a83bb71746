#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "h2net/network.hpp"
#include "h2net/reduction.hpp"

namespace h2net {

/// (r-1) x (r-1) factor with T T^T = I - (1/r) 1 1^T.
struct TFactor {
  Matrix T;
  Index order() const { return T.rows() + 1; }
};

/// Order of the non-minimal eigenvalues paired with columns 2..r of V.
enum class TailOrder { Descending, Ascending };

struct ReconstructOptions {
  TailOrder tail = TailOrder::Descending;
  double t_tolerance = 1e-10;  // allowed ||T T^T - J||_max
  bool snap_t = false;         // project T onto the exact factor set first
  double mmatrix_tol = 1e-8;   // relative to ||K_r||_2
  bool require_mmatrix = true;
};

struct GraphRealization {
  Matrix Ur, Kr, Dr, Fr, Hr;
  double lambda_r = 0.0;
  Matrix Lr;        // Kr - lambda_r I, rounding-level positive couplings dropped
  Vector Vr_diag;   // lambda_r in every entry
  std::optional<ProportionalDamping> damping;
  double max_offdiag = 0.0;
  bool mmatrix = false;

  SecondOrderSystem system() const { return {Kr, Dr, Fr, Hr, std::nullopt}; }
  /// Network view. D is stored explicitly when it is not alpha I + beta Kr.
  SecondOrderNetwork to_network() const;
};

Matrix t_factor_target(Index r);
double t_factor_defect(const Matrix& T);

/// Symmetric square root of I - (1/r) 1 1^T.
TFactor base_t_factor(Index r);
/// Helmert contrasts with the first row removed. With a nonincreasing tail
/// the realized matrix is always a Laplacian shift.
TFactor helmert_t_factor(Index r);
/// Nearest exact factor M * polar(M^{-1} T).
TFactor snap_t_factor(const Matrix& T);

/// [1/sqrt(r), -1^T T; 1/sqrt(r) 1, T]. Throws NotOrthogonal.
Matrix assemble_v(const TFactor& t, double tol = 1e-10);

/// Theorem-style sign conditions: columns 1..r-m-1 have pairwise
/// non-positive products, columns r-m..r-1 pairwise non-negative.
bool satisfies_sign_pattern(const Matrix& T, Index m);

/// Throws NotMMatrix when require_mmatrix and an off-diagonal is positive.
GraphRealization reconstruct(const ReducedModel& red, const TFactor& t,
                             const ReconstructOptions& opts = {});

struct SparsityOptions {
  int starts = 32;
  std::uint64_t seed = 20240101;
  double tolerance = 1e-8;  // relative to ||K_r||_2
  int max_iterations = 200;
  TailOrder tail = TailOrder::Descending;
  bool parallel = true;
};

struct SparsityResult {
  TFactor t;
  double residual = 0.0;
  int start_index = -1;
  bool mmatrix = false;
};

/// Zero targets are 0-based (i, j) pairs with i != j. Throws InvalidArgument
/// for malformed targets and NoSolutionFound when no start reaches the
/// tolerance.
SparsityResult solve_sparsity(const ReducedModel& red, std::vector<std::pair<Index, Index>> targets,
                              const SparsityOptions& opts = {});

struct HouseholderResult {
  Matrix Ktilde;  // symmetric tridiagonal, sub-diagonal non-positive
  Matrix Ur;      // Ktilde = Ur Khat Ur^T
  bool diag_dominant = false;
};

HouseholderResult householder_tridiag(const Matrix& Khat);
/// Applies the transformation to the whole reduced model.
GraphRealization householder_realization(const ReducedModel& red);

/// Builds a reduced model with Khat = diag(spectrum), unit damping and empty
/// input/output; used for spectrum-only reconstructions.
ReducedModel spectral_model(const Vector& spectrum);

}  // namespace h2net
