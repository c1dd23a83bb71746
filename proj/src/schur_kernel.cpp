#include "h2net/schur_kernel.hpp"

#include <omp.h>

namespace h2net::sdp {

Matrix schur_complement_serial(const std::vector<SchurBlock>& blocks, Index num_vars) {
  Matrix M = Matrix::Zero(num_vars, num_vars);
  for (const auto& b : blocks) {
    const Index d = b.X->rows();
    for (Index j = 0; j < num_vars; ++j) {
      const Vector fj = b.coeffs->col(j);
      if (fj.isZero(0.0)) continue;
      const Matrix Fj = Eigen::Map<const Matrix>(fj.data(), d, d);
      const Matrix G = (*b.Zinv) * Fj * (*b.X);
      const Vector g = Eigen::Map<const Vector>(G.data(), d * d);
      M.col(j) += b.coeffs->transpose() * g;
    }
  }
  return 0.5 * (M + M.transpose());
}

namespace {

// G = Zinv * F_j * X using only the nonzero columns of F_j.
void sparse_sandwich(const SchurBlock& b, Index j, Matrix& ZF, Matrix& G,
                     std::vector<Index>& cols) {
  const Index d = b.X->rows();
  const Matrix& Zinv = *b.Zinv;
  cols.clear();
  for (SparseMatrix::InnerIterator it(*b.coeffs, j); it; ++it) {
    const Index row = it.row() % d;
    const Index col = it.row() / d;
    if (cols.empty() || cols.back() != col) {
      cols.push_back(col);
      ZF.col(col).setZero();
    }
    ZF.col(col).noalias() += it.value() * Zinv.col(row);
  }
  G.setZero();
  for (Index col : cols) G.noalias() += ZF.col(col) * b.X->row(col);
}

}  // namespace

Matrix schur_complement_parallel(const std::vector<SchurBlock>& blocks, Index num_vars) {
  Matrix M = Matrix::Zero(num_vars, num_vars);
#pragma omp parallel
  {
    std::vector<Matrix> ZF(blocks.size()), G(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Index d = blocks[k].X->rows();
      ZF[k].resize(d, d);
      G[k].resize(d, d);
    }
    std::vector<Index> cols;
#pragma omp for schedule(dynamic, 4)
    for (Index j = 0; j < num_vars; ++j) {
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const SchurBlock& b = blocks[k];
        if (b.coeffs->col(j).nonZeros() == 0) continue;
        sparse_sandwich(b, j, ZF[k], G[k], cols);
        const Index d = b.X->rows();
        const Eigen::Map<const Vector> g(G[k].data(), d * d);
        M.col(j).noalias() += b.coeffs->transpose() * g;
      }
    }
  }
  return 0.5 * (M + M.transpose());
}

}  // namespace h2net::sdp
