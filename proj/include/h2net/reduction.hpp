#pragma once

#include <optional>
#include <string>

#include "h2net/network.hpp"
#include "h2net/sdp.hpp"

namespace h2net {

struct ReductionOptions {
  double margin = 1e-7;  // strictness margin on every cone
  sdp::SolverOptions solver;
};

/// Index layout of the decision vector
/// svec(P11) | vec(P12) | svec(P13) | svec(X1) | gamma.
struct DecisionLayout {
  Index n = 0;
  Index r = 0;

  Index svec_size(Index k) const { return k * (k + 1) / 2; }
  Index p11_offset() const { return 0; }
  Index p12_offset() const { return svec_size(n); }
  Index p13_offset() const { return p12_offset() + n * n; }
  Index x1_offset() const { return p13_offset() + svec_size(n); }
  Index gamma_index() const { return x1_offset() + svec_size(r); }
  Index size() const { return gamma_index() + 1; }
};

struct ReductionProgram {
  DecisionLayout layout;
  sdp::LmiProgram lmi;
  Matrix K, D, F, H;
  double margin = 0.0;
};

struct SdpCertificate {
  Matrix P11, P12, P13, X1;
  double gamma = 0.0;
  sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
  double relative_gap = 0.0;
  int iterations = 0;
  // Constraint values at the returned point.
  double pi_max_eig = 0.0;
  double phi_max_eig = 0.0;
  double xi_min_eig = 0.0;
  double trace_value = 0.0;  // tr(H (P11 - 2X) H^T)
};

struct ReducedModel {
  Index r = 0;
  Matrix Kr_hat, Dr_hat, Fr_hat, Hr_hat;
  Matrix W;  // n x r, W = P21 * inv(P31)
  Matrix U;  // eigenvectors of X1, descending
  Vector z;  // eigenvalues of X1, descending
  double gamma = 0.0;
  std::optional<ProportionalDamping> damping;  // of the full model
  double phat_min_eig = 0.0;        // post-hoc check of the block matrix P-hat
  double projection_defect = 0.0;   // ||blkdiag(X1,0) - P21 inv(P31) P21^T||_F

  SecondOrderSystem system() const { return {Kr_hat, Dr_hat, Fr_hat, Hr_hat, std::nullopt}; }
};

struct H2Report {
  double actual = 0.0;           // ||G - G_r||_H2
  double gamma_raw = 0.0;        // minimized trace bound
  double certified_bound = 0.0;  // sqrt(gamma_raw)
  bool within_bound = false;     // actual^2 <= gamma_raw
  double lyapunov_residual = 0.0;
};

/// Pi, Phi and Xi evaluated at given variables (X = blkdiag(X1, 0)).
Matrix assemble_pi(const Matrix& K, const Matrix& D, const Matrix& F, const Matrix& P11,
                   const Matrix& P12, const Matrix& P13);
Matrix assemble_phi(const Matrix& K, const Matrix& D, const Matrix& P11, const Matrix& P12,
                    const Matrix& P13, const Matrix& X);
/// The full block matrix P-hat built from P21 and P31.
Matrix assemble_phat(const Matrix& P11, const Matrix& P12, const Matrix& P13, const Matrix& P21,
                     const Matrix& P31);
Matrix pad_x(const Matrix& X1, Index n);

/// Throws RankTooLarge for r >= n, InvalidArgument for r < 1.
ReductionProgram formulate_sdp(const SecondOrderSystem& sys, Index r, double margin = 1e-7);
ReductionProgram formulate_sdp(const SecondOrderNetwork& net, Index r, double margin = 1e-7);

/// Throws Infeasible or NumericalFailure.
SdpCertificate solve_sdp(const ReductionProgram& prog, const sdp::SolverOptions& opts = {});

/// Throws NotPositiveDefinite when X1 is degenerate.
ReducedModel extract_reduced(const SdpCertificate& cert, const SecondOrderSystem& sys);
ReducedModel extract_reduced(const SdpCertificate& cert, const SecondOrderNetwork& net);

/// Projection of the full model onto W (the reduced matrices of the pipeline).
ReducedModel project(const SecondOrderSystem& sys, const Matrix& W);

/// Realization of G - G_r.
StateSpace error_system(const SecondOrderSystem& full, const SecondOrderSystem& reduced);

H2Report certified_error(const SecondOrderSystem& full, const ReducedModel& red);

/// Replaces Hr_hat with H * P21 * inv(P31) taken from the error-system
/// Gramian, the output matrix minimizing the error for fixed (Kr, Dr, Fr).
ReducedModel refine_output(const SecondOrderSystem& full, const ReducedModel& red);

/// formulate + solve + extract (+ optional refinement).
ReducedModel reduce(const SecondOrderSystem& sys, Index r, const ReductionOptions& opts = {},
                    bool refine = false, SdpCertificate* cert_out = nullptr);
ReducedModel reduce(const SecondOrderNetwork& net, Index r, const ReductionOptions& opts = {},
                    bool refine = false, SdpCertificate* cert_out = nullptr);

}  // namespace h2net
