#include "h2net/network.hpp"

#include <cmath>
#include <sstream>

#include "h2net/errors.hpp"

namespace h2net {

void SecondOrderSystem::check_dimensions() const {
  const Index n = K.rows();
  if (K.cols() != n || D.rows() != n || D.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "K and D must be square of equal size");
  if (F.rows() != n) throw Error(ErrorCode::DimensionMismatch, "F rows differ from K");
  if (H.cols() != n) throw Error(ErrorCode::DimensionMismatch, "H cols differ from K");
}

StateSpace SecondOrderSystem::state_space() const {
  check_dimensions();
  const Index n = order();
  StateSpace ss;
  ss.A = Matrix::Zero(2 * n, 2 * n);
  ss.A.topRightCorner(n, n).setIdentity();
  ss.A.bottomLeftCorner(n, n) = -K;
  ss.A.bottomRightCorner(n, n) = -D;
  ss.B = Matrix::Zero(2 * n, inputs());
  ss.B.bottomRows(n) = F;
  ss.C = Matrix::Zero(outputs(), 2 * n);
  ss.C.leftCols(n) = H;
  return ss;
}

ComplexMatrix SecondOrderSystem::transfer(std::complex<double> s) const {
  check_dimensions();
  const Index n = order();
  ComplexMatrix pencil = (s * s) * ComplexMatrix::Identity(n, n) + s * D.cast<std::complex<double>>() +
                         K.cast<std::complex<double>>();
  const ComplexMatrix X = pencil.partialPivLu().solve(F.cast<std::complex<double>>());
  return H.cast<std::complex<double>>() * X;
}

SecondOrderNetwork::SecondOrderNetwork(Vector v_diag, Matrix laplacian, double alpha, double beta,
                                       Matrix F, Matrix H, std::optional<Matrix> damping_override)
    : v_(std::move(v_diag)),
      L_(std::move(laplacian)),
      alpha_(alpha),
      beta_(beta),
      F_(std::move(F)),
      H_(std::move(H)),
      D_override_(std::move(damping_override)) {
  const Index n = L_.rows();
  if (L_.cols() != n) throw Error(ErrorCode::DimensionMismatch, "L is not square");
  if (v_.size() != n) throw Error(ErrorCode::DimensionMismatch, "V_diag length differs from n");
  if (F_.rows() != n) throw Error(ErrorCode::DimensionMismatch, "F rows differ from n");
  if (H_.cols() != n) throw Error(ErrorCode::DimensionMismatch, "H cols differ from n");
  if (D_override_ && (D_override_->rows() != n || D_override_->cols() != n))
    throw Error(ErrorCode::DimensionMismatch, "D is not n x n");
}

Matrix SecondOrderNetwork::K() const {
  Matrix K = L_;
  K.diagonal() += v_;
  return K;
}

Matrix SecondOrderNetwork::D() const {
  if (D_override_) return *D_override_;
  return alpha_ * Matrix::Identity(nodes(), nodes()) + beta_ * K();
}

bool SecondOrderNetwork::damping_is_proportional(double tol) const {
  if (!D_override_) return true;
  const Matrix prop = alpha_ * Matrix::Identity(nodes(), nodes()) + beta_ * K();
  return (*D_override_ - prop).norm() <= tol * std::max(1.0, D_override_->norm());
}

SecondOrderSystem SecondOrderNetwork::system() const {
  std::optional<ProportionalDamping> damping;
  if (damping_is_proportional()) damping = ProportionalDamping{alpha_, beta_};
  return {K(), D(), F_, H_, damping};
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name + ": " + c.detail);
  return out;
}

LaplacianCheck check_laplacian(const Matrix& L) {
  LaplacianCheck out;
  std::ostringstream detail;
  const Index n = L.rows();
  if (L.cols() != n) {
    out.detail = "not square";
    return out;
  }
  const double norm2 = std::max(linalg::spectral_norm_sym(L), 1e-300);
  out.symmetric = (L - L.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, norm2);
  if (!out.symmetric) detail << "L not symmetric; ";

  const Vector rows = L.rowwise().sum();
  Index arg = 0;
  const double worst_row = n > 0 ? rows.cwiseAbs().maxCoeff(&arg) : 0.0;
  out.zero_row_sums = worst_row <= 1e-10 * std::max(1.0, norm2);
  if (!out.zero_row_sums) detail << "row " << arg << " sums to " << rows(arg) << "; ";

  out.nonpositive_offdiag = true;
  out.positive_diag = true;
  for (Index i = 0; i < n; ++i) {
    bool has_edge = false;
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (L(i, j) != 0.0) has_edge = true;
      if (L(i, j) > 1e-12 && out.nonpositive_offdiag) {
        out.nonpositive_offdiag = false;
        detail << "positive off-diagonal L(" << i << "," << j << ") = " << L(i, j) << "; ";
      }
    }
    if (has_edge && !(L(i, i) > 0.0) && out.positive_diag) {
      out.positive_diag = false;
      detail << "non-positive diagonal L(" << i << "," << i << "); ";
    }
  }

  if (out.symmetric && n > 0) {
    const SymEig eig = linalg::sym_eig(0.5 * (L + L.transpose()), EigenOrder::Ascending);
    out.psd = eig.values(0) >= -1e-10 * norm2;
    if (!out.psd) detail << "negative eigenvalue " << eig.values(0) << "; ";
    out.connected = n == 1 || eig.values(1) > 1e-10 * norm2;
    if (!out.connected) detail << "graph disconnected; ";
  }
  out.detail = detail.str();
  return out;
}

ValidationReport validate(const SecondOrderNetwork& net) {
  ValidationReport rep;
  const LaplacianCheck lap = check_laplacian(net.laplacian());
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
  };
  add("laplacian_symmetric", lap.symmetric, lap.detail);
  add("laplacian_zero_row_sums", lap.zero_row_sums, lap.detail);
  add("laplacian_nonpositive_offdiag", lap.nonpositive_offdiag, lap.detail);
  add("laplacian_positive_diag", lap.positive_diag, lap.detail);
  add("laplacian_psd", lap.psd, lap.detail);
  add("laplacian_connected", lap.connected, lap.detail);

  const Vector& v = net.v_diag();
  Index arg = 0;
  const double vmin = v.size() ? v.minCoeff(&arg) : 0.0;
  add("v_nonnegative", vmin >= 0.0,
      "V(" + std::to_string(arg) + ") = " + std::to_string(vmin));

  const Matrix K = net.K();
  const double knorm = std::max(linalg::spectral_norm_sym(K), 1e-300);
  const double kmin = linalg::min_eigenvalue(K);
  std::string kdetail = "min eigenvalue " + std::to_string(kmin);
  if ((K.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-10 * knorm)
    kdetail = "K singular: K*1 = 0";
  add("k_positive_definite", kmin > 1e-12 * knorm, kdetail);

  const Matrix D = net.D();
  const double dmin = linalg::min_eigenvalue(D);
  add("d_positive_definite", dmin > 1e-12 * std::max(linalg::spectral_norm_sym(D), 1e-300),
      "min eigenvalue " + std::to_string(dmin));

  bool dominant = true;
  std::string ddetail;
  for (Index i = 0; i < K.rows() && dominant; ++i) {
    const double off = K.row(i).cwiseAbs().sum() - std::abs(K(i, i));
    if (K(i, i) < off - 1e-10 * knorm) {
      dominant = false;
      ddetail = "row " + std::to_string(i) + " not diagonally dominant";
    }
  }
  add("k_diagonally_dominant", dominant, ddetail);
  if (net.damping_override())
    add("damping_proportional", net.damping_is_proportional(),
        "explicit D differs from alpha I + beta K");
  add("alpha_positive", net.alpha() > 0.0, "alpha = " + std::to_string(net.alpha()));
  add("beta_nonnegative", net.beta() >= 0.0, "beta = " + std::to_string(net.beta()));
  return rep;
}

SecondOrderNetwork build_msd_example() {
  Matrix L(4, 4);
  L << 3, -1, 0, -2,
      -1, 4, -2, -1,
      0, -2, 3, -1,
      -2, -1, -1, 4;
  Vector v = Vector::Zero(4);
  v(0) = 1.0;
  Matrix F = Matrix::Zero(4, 1);
  F(0, 0) = 1.0;
  // Output collocated with the actuated mass.
  Matrix H = F.transpose();
  return SecondOrderNetwork(v, L, 1.0, 0.0, F, H);
}

SecondOrderNetwork build_grounded_system(const Matrix& L, double alpha, double beta, double ground) {
  const Index n = L.rows();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "empty Laplacian");
  Vector v = Vector::Zero(n);
  v(0) = ground;
  Matrix F = Matrix::Zero(n, 1);
  F(0, 0) = 1.0;
  Matrix K = L;
  K.diagonal() += v;
  const Matrix H = K - F * F.transpose();
  return SecondOrderNetwork(v, L, alpha, beta, F, H);
}

SecondOrderNetwork build_sec4_system(const Matrix& L, double alpha, double beta) {
  SecondOrderNetwork net = build_grounded_system(L, alpha, beta, 1.0);
  const ValidationReport rep = validate(net);
  if (!rep.ok()) {
    std::string msg = "network validation failed:";
    for (const auto& f : rep.failures()) msg += " " + f;
    throw Error(ErrorCode::InvalidArgument, msg);
  }
  return net;
}

Matrix ring_laplacian(Index n) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "ring needs n >= 3");
  Matrix L = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    L(i, j) -= 1.0;
    L(j, i) -= 1.0;
    L(i, i) += 1.0;
    L(j, j) += 1.0;
  }
  return L;
}

Matrix path_laplacian(Index n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "path needs n >= 2");
  Matrix L = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    L(i, i + 1) = L(i + 1, i) = -1.0;
    L(i, i) += 1.0;
    L(i + 1, i + 1) += 1.0;
  }
  return L;
}

}  // namespace h2net
