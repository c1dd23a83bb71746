#include "h2net/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "h2net/errors.hpp"

namespace h2net {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotMMatrix: return "NotMMatrix";
    case ErrorCode::NotSemistable: return "NotSemistable";
    case ErrorCode::FullyStable: return "FullyStable";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NoSolutionFound: return "NoSolutionFound";
    case ErrorCode::DisconnectedAfterRetries: return "DisconnectedAfterRetries";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void StateSpace::check_dimensions() const {
  if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "A is not square");
  if (B.rows() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "B rows differ from A");
  if (C.cols() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "C cols differ from A");
}

namespace linalg {

Matrix sym(const Matrix& A) { return A + A.transpose(); }

Matrix block_diag(const Matrix& A, const Matrix& B) {
  Matrix out = Matrix::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  out.topLeftCorner(A.rows(), A.cols()) = A;
  out.bottomRightCorner(B.rows(), B.cols()) = B;
  return out;
}

double symmetry_defect(const Matrix& M) {
  if (M.rows() != M.cols()) return std::numeric_limits<double>::infinity();
  if (M.size() == 0) return 0.0;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() / scale;
}

namespace {

// Diagonal block layout of a real quasi-triangular Schur factor.
std::vector<std::pair<Index, Index>> schur_blocks(const Matrix& T) {
  std::vector<std::pair<Index, Index>> blocks;
  const Index n = T.rows();
  Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.emplace_back(i, 2);
      i += 2;
    } else {
      blocks.emplace_back(i, 1);
      i += 1;
    }
  }
  return blocks;
}

double block_real_part(const Matrix& T, std::pair<Index, Index> blk) {
  const auto [i, s] = blk;
  if (s == 1) return T(i, i);
  // 2x2 blocks from RealSchur carry a complex-conjugate pair.
  const double tr = T(i, i) + T(i + 1, i + 1);
  const double det = T(i, i) * T(i + 1, i + 1) - T(i, i + 1) * T(i + 1, i);
  const double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) return tr / 2.0 + std::sqrt(disc);
  return tr / 2.0;
}

}  // namespace

double spectral_abscissa(const Matrix& A) {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::RealSchur<Matrix> schur(A, /*computeU=*/false);
  const Matrix& T = schur.matrixT();
  double worst = -std::numeric_limits<double>::infinity();
  for (auto blk : schur_blocks(T)) worst = std::max(worst, block_real_part(T, blk));
  return worst;
}

bool is_hurwitz(const Matrix& A) { return spectral_abscissa(A) < -kHurwitzMargin; }

LyapunovSolution solve_lyapunov(const Matrix& A, const Matrix& Q) {
  const Index n = A.rows();
  if (A.cols() != n) throw Error(ErrorCode::DimensionMismatch, "A is not square");
  if (Q.rows() != n || Q.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "Q does not match A");
  if (n == 0) return {Matrix(0, 0), 0.0};

  Eigen::RealSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "real Schur decomposition did not converge");
  const Matrix& T = schur.matrixT();
  const Matrix& U = schur.matrixU();
  const auto blocks = schur_blocks(T);
  for (auto blk : blocks) {
    const double re = block_real_part(T, blk);
    if (!(re < -kHurwitzMargin))
      throw Error(ErrorCode::NotHurwitz,
                  "eigenvalue with real part " + std::to_string(re) + " at index " +
                      std::to_string(blk.first));
  }

  // T Y + Y T^T = C in Schur coordinates, solved block by block from the
  // bottom-right corner.
  const Matrix C = -(U.transpose() * Q * U);
  Matrix Y = Matrix::Zero(n, n);
  for (auto jt = blocks.rbegin(); jt != blocks.rend(); ++jt) {
    const auto [j0, sj] = *jt;
    const Index jrest = n - (j0 + sj);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      const auto [i0, si] = *it;
      const Index irest = n - (i0 + si);
      Matrix rhs = C.block(i0, j0, si, sj);
      if (irest > 0)
        rhs.noalias() -= T.block(i0, i0 + si, si, irest) * Y.block(i0 + si, j0, irest, sj);
      if (jrest > 0)
        rhs.noalias() -=
            Y.block(i0, j0 + sj, si, jrest) * T.block(j0, j0 + sj, sj, jrest).transpose();

      const Matrix Tii = T.block(i0, i0, si, si);
      const Matrix Tjj = T.block(j0, j0, sj, sj);
      Matrix kron = Matrix::Zero(si * sj, si * sj);
      for (Index b = 0; b < sj; ++b) {
        kron.block(b * si, b * si, si, si) += Tii;
        for (Index a = 0; a < sj; ++a)
          kron.block(b * si, a * si, si, si) += Tjj(b, a) * Matrix::Identity(si, si);
      }
      const Vector rhs_vec = Eigen::Map<const Vector>(rhs.data(), si * sj);
      const Vector sol = kron.fullPivLu().solve(rhs_vec);
      Y.block(i0, j0, si, sj) = Eigen::Map<const Matrix>(sol.data(), si, sj);
    }
  }

  Matrix P = U * Y * U.transpose();
  P = 0.5 * (P + P.transpose()).eval();
  const double residual = (A * P + P * A.transpose() + Q).norm();
  return {std::move(P), residual};
}

double h2_norm(const StateSpace& sys) {
  sys.check_dimensions();
  if (sys.C.rows() == 0 || sys.B.cols() == 0) return 0.0;
  const LyapunovSolution gram = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
  const double sq = (sys.C * gram.P * sys.C.transpose()).trace();
  return std::sqrt(std::max(0.0, sq));
}

SymEig sym_eig(const Matrix& M, EigenOrder order) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  if (symmetry_defect(M) > 1e-12) throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  const Matrix Ms = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Ms);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  if (order == EigenOrder::Descending) {
    out.values.reverseInPlace();
    out.vectors = out.vectors.rowwise().reverse().eval();
  }
  return out;
}

SpdSchur schur_decompose_spd(const Matrix& X1) {
  SymEig eig = sym_eig(X1, EigenOrder::Descending);
  const Index r = eig.values.size();
  if (r == 0) return {Matrix(0, 0), Vector(0)};
  const double top = std::max(std::abs(eig.values(0)), std::abs(eig.values(r - 1)));
  if (!(eig.values(r - 1) > 1e-12 * top) || !(top > 0.0))
    throw Error(ErrorCode::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(eig.values(r - 1)));
  // Deterministic sign: largest-magnitude entry of each column positive.
  for (Index k = 0; k < r; ++k) {
    Index arg = 0;
    eig.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (eig.vectors(arg, k) < 0) eig.vectors.col(k) *= -1.0;
  }
  return {std::move(eig.vectors), std::move(eig.values)};
}

double min_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(M.rows() - 1);
}

double spectral_norm_sym(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix canonical_basis(const Matrix& V) {
  const Index n = V.rows();
  const Index k = V.cols();
  Matrix out(n, k);
  Index found = 0;
  for (Index i = 0; i < n && found < k; ++i) {
    Vector u = V * V.row(i).transpose();  // projection of e_i onto span(V)
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < found; ++j) u -= out.col(j).dot(u) * out.col(j);
    const double nu = u.norm();
    if (nu > 1e-8) out.col(found++) = u / nu;
  }
  if (found < k) throw Error(ErrorCode::NumericalFailure, "basis is rank deficient");
  return out;
}

Matrix orthogonal_polar(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace linalg
}  // namespace h2net
