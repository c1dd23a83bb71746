#include "h2net/reduction.hpp"

#include <cmath>
#include <vector>

#include "h2net/errors.hpp"

namespace h2net {

using linalg::sym;

namespace {

struct Vars {
  Matrix P11, P12, P13, X1;
  double gamma = 0.0;
};

Matrix unpack_sym(const Vector& y, Index offset, Index k) {
  Matrix S = Matrix::Zero(k, k);
  Index idx = offset;
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i <= j; ++i) {
      S(i, j) = y(idx);
      S(j, i) = y(idx);
      ++idx;
    }
  return S;
}

Vars unpack(const DecisionLayout& lay, const Vector& y) {
  Vars v;
  v.P11 = unpack_sym(y, lay.p11_offset(), lay.n);
  v.P12 = Eigen::Map<const Matrix>(y.data() + lay.p12_offset(), lay.n, lay.n);
  v.P13 = unpack_sym(y, lay.p13_offset(), lay.n);
  v.X1 = unpack_sym(y, lay.x1_offset(), lay.r);
  v.gamma = y(lay.gamma_index());
  return v;
}

struct LinearParts {
  Matrix pi, phi, xi, p11, p13, x1, obj;
};

// Every constraint block without its constant term, as a function of the
// decision variables. Linear, so evaluating it at a unit vector gives the
// coefficient matrix of that variable.
LinearParts linear_blocks(const ReductionProgram& p, const Vars& v) {
  const Index n = p.layout.n;
  const Matrix& K = p.K;
  const Matrix& D = p.D;
  const Matrix X = pad_x(v.X1, n);
  LinearParts out;
  out.pi = -assemble_pi(K, D, Matrix::Zero(n, 0), v.P11, v.P12, v.P13);
  out.phi = -assemble_phi(K, D, v.P11, v.P12, v.P13, X);
  out.xi = v.P11 - 2.0 * X;
  out.p11 = v.P11;
  out.p13 = v.P13;
  out.x1 = v.X1;
  out.obj = Matrix::Constant(1, 1, v.gamma - (p.H * out.xi * p.H.transpose()).trace());
  return out;
}

std::vector<const Matrix*> as_list(const LinearParts& lp) {
  return {&lp.pi, &lp.phi, &lp.xi, &lp.p11, &lp.p13, &lp.x1, &lp.obj};
}

}  // namespace

Matrix pad_x(const Matrix& X1, Index n) {
  Matrix X = Matrix::Zero(n, n);
  X.topLeftCorner(X1.rows(), X1.cols()) = X1;
  return X;
}

Matrix assemble_pi(const Matrix& K, const Matrix& D, const Matrix& F, const Matrix& P11,
                   const Matrix& P12, const Matrix& P13) {
  const Index n = K.rows();
  Matrix Pi(2 * n, 2 * n);
  const Matrix Pi12 = P13 - P11 * K - P12 * D;
  Pi.topLeftCorner(n, n) = sym(P12);
  Pi.topRightCorner(n, n) = Pi12;
  Pi.bottomLeftCorner(n, n) = Pi12.transpose();
  Pi.bottomRightCorner(n, n) = sym(-K * P12 - D * P13);
  if (F.cols() > 0) Pi.bottomRightCorner(n, n) += F * F.transpose();
  return Pi;
}

Matrix assemble_phi(const Matrix& K, const Matrix& D, const Matrix& P11, const Matrix& P12,
                    const Matrix& P13, const Matrix& X) {
  const Index n = K.rows();
  Matrix Phi(2 * n, 2 * n);
  const Matrix Phi12 = -P11 * K - P12 * D + P13 + 2.0 * X * K;
  Phi.topLeftCorner(n, n) = sym(P12);
  Phi.topRightCorner(n, n) = Phi12;
  Phi.bottomLeftCorner(n, n) = Phi12.transpose();
  Phi.bottomRightCorner(n, n) = sym(-K * P12 - D * P13);
  return Phi;
}

Matrix assemble_phat(const Matrix& P11, const Matrix& P12, const Matrix& P13, const Matrix& P21,
                     const Matrix& P31) {
  const Index n = P11.rows();
  const Index r = P31.rows();
  Matrix P = Matrix::Zero(2 * n + 2 * r, 2 * n + 2 * r);
  P.block(0, 0, n, n) = P11;
  P.block(0, n, n, n) = P12;
  P.block(n, 0, n, n) = P12.transpose();
  P.block(n, n, n, n) = P13;
  P.block(0, 2 * n, n, r) = P21;
  P.block(2 * n, 0, r, n) = P21.transpose();
  P.block(2 * n, 2 * n, r, r) = P31;
  P.block(2 * n, 2 * n + r, r, r) = -P31;
  P.block(2 * n + r, 2 * n, r, r) = -P31;
  P.block(2 * n + r, 2 * n + r, r, r) = 2.0 * P31;
  return P;
}

ReductionProgram formulate_sdp(const SecondOrderSystem& sys, Index r, double margin) {
  sys.check_dimensions();
  const Index n = sys.order();
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "reduced order must be at least 1");
  if (r >= n) throw Error(ErrorCode::RankTooLarge, "reduced order must satisfy 1 <= r < n");

  ReductionProgram p;
  p.layout = {n, r};
  p.K = sys.K;
  p.D = sys.D;
  p.F = sys.F;
  p.H = sys.H;
  p.margin = margin;
  const Index m = p.layout.size();
  p.lmi.num_vars = m;
  p.lmi.c = Vector::Zero(m);
  p.lmi.c(p.layout.gamma_index()) = 1.0;

  const char* names[] = {"Pi", "Phi", "Xi", "P11", "P13", "X1", "objective"};
  const Index dims[] = {2 * n, 2 * n, n, n, n, r, 1};
  std::vector<std::vector<Eigen::Triplet<double, int>>> trip(7);
  for (Index i = 0; i < m; ++i) {
    Vector e = Vector::Zero(m);
    e(i) = 1.0;
    const LinearParts lp = linear_blocks(p, unpack(p.layout, e));
    const auto list = as_list(lp);
    for (std::size_t b = 0; b < list.size(); ++b) {
      const Matrix& B = *list[b];
      for (Index col = 0; col < B.cols(); ++col)
        for (Index row = 0; row < B.rows(); ++row)
          if (B(row, col) != 0.0)
            trip[b].emplace_back(static_cast<int>(row + col * B.rows()), static_cast<int>(i),
                                 B(row, col));
    }
  }
  for (std::size_t b = 0; b < 7; ++b) {
    sdp::LmiBlock blk;
    blk.name = names[b];
    blk.dim = dims[b];
    blk.F0 = -margin * Matrix::Identity(blk.dim, blk.dim);
    blk.coeffs.resize(blk.dim * blk.dim, m);
    blk.coeffs.setFromTriplets(trip[b].begin(), trip[b].end());
    p.lmi.blocks.push_back(std::move(blk));
  }
  // Constant part of -Pi: -F F^T in the lower-right block.
  p.lmi.blocks[0].F0.bottomRightCorner(n, n) -= sys.F * sys.F.transpose();
  return p;
}

ReductionProgram formulate_sdp(const SecondOrderNetwork& net, Index r, double margin) {
  return formulate_sdp(net.system(), r, margin);
}

SdpCertificate solve_sdp(const ReductionProgram& prog, const sdp::SolverOptions& opts) {
  const sdp::SolveResult res = sdp::solve(prog.lmi, opts);
  if (res.status == sdp::SolveStatus::Infeasible)
    throw Error(ErrorCode::Infeasible, "reduction program infeasible: " + res.message);
  if (res.status == sdp::SolveStatus::NumericalFailure)
    throw Error(ErrorCode::NumericalFailure, "SDP solve failed: " + res.message);

  const Vars v = unpack(prog.layout, res.y);
  SdpCertificate cert;
  cert.P11 = v.P11;
  cert.P12 = v.P12;
  cert.P13 = v.P13;
  cert.X1 = v.X1;
  cert.gamma = v.gamma;
  cert.status = res.status;
  cert.relative_gap = res.relative_gap;
  cert.iterations = res.iterations;
  const Index n = prog.layout.n;
  const Matrix X = pad_x(v.X1, n);
  cert.pi_max_eig = linalg::max_eigenvalue(assemble_pi(prog.K, prog.D, prog.F, v.P11, v.P12, v.P13));
  cert.phi_max_eig = linalg::max_eigenvalue(assemble_phi(prog.K, prog.D, v.P11, v.P12, v.P13, X));
  cert.xi_min_eig = linalg::min_eigenvalue(v.P11 - 2.0 * X);
  cert.trace_value = (prog.H * (v.P11 - 2.0 * X) * prog.H.transpose()).trace();
  return cert;
}

ReducedModel project(const SecondOrderSystem& sys, const Matrix& W) {
  sys.check_dimensions();
  if (W.rows() != sys.order()) throw Error(ErrorCode::DimensionMismatch, "W rows differ from n");
  ReducedModel red;
  red.r = W.cols();
  red.W = W;
  red.Kr_hat = W.transpose() * sys.K * W;
  red.Dr_hat = W.transpose() * sys.D * W;
  red.Kr_hat = 0.5 * (red.Kr_hat + red.Kr_hat.transpose()).eval();
  red.Dr_hat = 0.5 * (red.Dr_hat + red.Dr_hat.transpose()).eval();
  red.Fr_hat = W.transpose() * sys.F;
  red.Hr_hat = sys.H * W;
  red.damping = sys.damping;
  return red;
}

ReducedModel extract_reduced(const SdpCertificate& cert, const SecondOrderSystem& sys) {
  if (cert.status != sdp::SolveStatus::Optimal && cert.status != sdp::SolveStatus::NearOptimal)
    throw Error(ErrorCode::InvalidArgument, "certificate is not optimal");
  const Index n = sys.order();
  const Index r = cert.X1.rows();
  const SpdSchur f = linalg::schur_decompose_spd(0.5 * (cert.X1 + cert.X1.transpose()));

  Matrix P21 = Matrix::Zero(n, r);
  P21.topRows(r) = f.U;
  const Matrix P31 = f.z.cwiseInverse().asDiagonal();
  const Matrix W = P21 * f.z.asDiagonal();

  ReducedModel red = project(sys, W);
  red.U = f.U;
  red.z = f.z;
  red.gamma = cert.gamma;
  red.phat_min_eig =
      linalg::min_eigenvalue(assemble_phat(cert.P11, cert.P12, cert.P13, P21, P31));
  red.projection_defect = (pad_x(cert.X1, n) - P21 * f.z.asDiagonal() * P21.transpose()).norm();
  return red;
}

ReducedModel extract_reduced(const SdpCertificate& cert, const SecondOrderNetwork& net) {
  return extract_reduced(cert, net.system());
}

StateSpace error_system(const SecondOrderSystem& full, const SecondOrderSystem& reduced) {
  if (full.inputs() != reduced.inputs() || full.outputs() != reduced.outputs())
    throw Error(ErrorCode::DimensionMismatch, "input/output dimensions of the two models differ");
  const StateSpace a = full.state_space();
  const StateSpace b = reduced.state_space();
  StateSpace e;
  e.A = linalg::block_diag(a.A, b.A);
  e.B.resize(a.B.rows() + b.B.rows(), a.B.cols());
  e.B << a.B, b.B;
  e.C.resize(a.C.rows(), a.C.cols() + b.C.cols());
  e.C << a.C, -b.C;
  return e;
}

H2Report certified_error(const SecondOrderSystem& full, const ReducedModel& red) {
  const StateSpace e = error_system(full, red.system());
  const LyapunovSolution gram = linalg::solve_lyapunov(e.A, e.B * e.B.transpose());
  H2Report rep;
  rep.actual = std::sqrt(std::max(0.0, (e.C * gram.P * e.C.transpose()).trace()));
  rep.lyapunov_residual = gram.residual_norm;
  rep.gamma_raw = red.gamma;
  rep.certified_bound = std::sqrt(std::max(0.0, red.gamma));
  rep.within_bound = rep.actual * rep.actual <= red.gamma;
  return rep;
}

ReducedModel refine_output(const SecondOrderSystem& full, const ReducedModel& red) {
  const StateSpace e = error_system(full, red.system());
  const LyapunovSolution gram = linalg::solve_lyapunov(e.A, e.B * e.B.transpose());
  const Index n = full.order();
  const Index r = red.r;
  const Matrix P21 = gram.P.block(0, 2 * n, n, r);
  const Matrix P31 = gram.P.block(2 * n, 2 * n, r, r);
  ReducedModel out = red;
  out.Hr_hat = full.H * P21 * P31.inverse();
  return out;
}

ReducedModel reduce(const SecondOrderNetwork& net, Index r, const ReductionOptions& opts,
                    bool refine, SdpCertificate* cert_out) {
  return reduce(net.system(), r, opts, refine, cert_out);
}

ReducedModel reduce(const SecondOrderSystem& sys, Index r, const ReductionOptions& opts,
                    bool refine, SdpCertificate* cert_out) {
  const ReductionProgram prog = formulate_sdp(sys, r, opts.margin);
  const SdpCertificate cert = solve_sdp(prog, opts.solver);
  if (cert_out) *cert_out = cert;
  ReducedModel red = extract_reduced(cert, sys);
  if (refine) red = refine_output(sys, red);
  return red;
}

}  // namespace h2net
