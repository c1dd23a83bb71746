#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "h2net/linalg.hpp"

namespace h2net::sdp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// One PSD block seen by the Schur-complement assembly. Column j of
/// `coeffs` is vec(F_j) (column-major, d*d rows); Zinv and X are d x d.
struct SchurBlock {
  const SparseMatrix* coeffs;
  const Matrix* Zinv;
  const Matrix* X;
};

/// M(i, j) = sum over blocks of tr(F_i Zinv F_j X), symmetrized.
/// Dense per-column products; kept as the reference for testing.
Matrix schur_complement_serial(const std::vector<SchurBlock>& blocks, Index num_vars);

/// Same result, columns distributed over OpenMP threads. Each thread owns
/// whole columns, so the output does not depend on the thread count.
Matrix schur_complement_parallel(const std::vector<SchurBlock>& blocks, Index num_vars);

}  // namespace h2net::sdp
