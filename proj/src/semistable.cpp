#include "h2net/semistable.hpp"

#include <cmath>

#include "h2net/errors.hpp"

namespace h2net {

SecondOrderSystem AveragePart::system() const {
  const Index m = dim();
  return {Matrix::Zero(m, m), D0, F0, H0, std::nullopt};
}

SemistableSplit split(const SecondOrderNetwork& net) {
  const Matrix K = net.K();
  const Matrix D = net.D();
  const Index n = K.rows();
  const SymEig eig = linalg::sym_eig(K, EigenOrder::Ascending);
  const double thresh = 1e-10 * std::max(linalg::spectral_norm_sym(K), 1e-300);
  if (eig.values(0) < -thresh)
    throw Error(ErrorCode::NotSemistable, "K has negative eigenvalue " + std::to_string(eig.values(0)));
  Index m = 0;
  while (m < n && eig.values(m) <= thresh) ++m;
  if (m == 0) throw Error(ErrorCode::FullyStable, "K is positive definite; no kernel to split off");
  if (m == n) throw Error(ErrorCode::InvalidArgument, "K is zero");

  SemistableSplit s;
  s.S0 = linalg::canonical_basis(eig.vectors.leftCols(m));
  for (Index k = 0; k < m; ++k) {
    double sum = s.S0.col(k).sum();
    if (std::abs(sum) <= 1e-12) {
      Index arg = 0;
      s.S0.col(k).cwiseAbs().maxCoeff(&arg);
      sum = s.S0(arg, k);
    }
    if (sum < 0) s.S0.col(k) *= -1.0;
  }
  s.S1 = linalg::canonical_basis(eig.vectors.rightCols(n - m));
  s.Kbar = s.S1.transpose() * K * s.S1;
  s.Kbar = 0.5 * (s.Kbar + s.Kbar.transpose()).eval();
  s.Dbar = s.S1.transpose() * D * s.S1;
  s.Dbar = 0.5 * (s.Dbar + s.Dbar.transpose()).eval();
  std::optional<ProportionalDamping> damping;
  if (net.damping_is_proportional()) damping = ProportionalDamping{net.alpha(), net.beta()};
  s.stable = {s.Kbar, s.Dbar, s.S1.transpose() * net.F(), net.H() * s.S1, damping};
  Matrix D0 = s.S0.transpose() * D * s.S0;
  s.average = {0.5 * (D0 + D0.transpose()), s.S0.transpose() * net.F(), net.H() * s.S0};
  return s;
}

SecondOrderSystem recombine(const AveragePart& avg, const SecondOrderSystem& stable_part) {
  stable_part.check_dimensions();
  if (avg.F0.cols() != stable_part.inputs())
    throw Error(ErrorCode::DimensionMismatch, "input dimensions differ");
  if (avg.H0.rows() != stable_part.outputs())
    throw Error(ErrorCode::DimensionMismatch, "output dimensions differ");
  const Index m = avg.dim();
  const Index r = stable_part.order();
  SecondOrderSystem out;
  out.K = linalg::block_diag(Matrix::Zero(m, m), stable_part.K);
  out.D = linalg::block_diag(avg.D0, stable_part.D);
  out.F.resize(m + r, stable_part.inputs());
  out.F << avg.F0, stable_part.F;
  out.H.resize(stable_part.outputs(), m + r);
  out.H << avg.H0, stable_part.H;
  return out;
}

}  // namespace h2net
