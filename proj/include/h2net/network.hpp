#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "h2net/linalg.hpp"

namespace h2net {

/// D = alpha * I + beta * K.
struct ProportionalDamping {
  double alpha = 0.0;
  double beta = 0.0;
};

/// x'' + D x' + K x = F u, y = H x, with no structural assumptions.
struct SecondOrderSystem {
  Matrix K;
  Matrix D;
  Matrix F;
  Matrix H;
  std::optional<ProportionalDamping> damping;

  Index order() const { return K.rows(); }
  Index inputs() const { return F.cols(); }
  Index outputs() const { return H.rows(); }

  void check_dimensions() const;
  /// First-order realization [0 I; -K -D], [0; F], [H 0].
  StateSpace state_space() const;
  /// H (s^2 I + s D + K)^{-1} F.
  ComplexMatrix transfer(std::complex<double> s) const;
};

/// Diffusively coupled network: K = V + L, D = alpha I + beta K.
class SecondOrderNetwork {
 public:
  SecondOrderNetwork(Vector v_diag, Matrix laplacian, double alpha, double beta, Matrix F,
                     Matrix H, std::optional<Matrix> damping_override = std::nullopt);

  Index nodes() const { return L_.rows(); }
  const Vector& v_diag() const { return v_; }
  const Matrix& laplacian() const { return L_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const Matrix& F() const { return F_; }
  const Matrix& H() const { return H_; }

  /// Set when D is stored explicitly instead of as alpha I + beta K.
  const std::optional<Matrix>& damping_override() const { return D_override_; }

  Matrix K() const;
  Matrix D() const;
  bool damping_is_proportional(double tol = 1e-8) const;
  SecondOrderSystem system() const;

  bool operator==(const SecondOrderNetwork&) const = default;

 private:
  Vector v_;
  Matrix L_;
  double alpha_;
  double beta_;
  Matrix F_;
  Matrix H_;
  std::optional<Matrix> D_override_;
};

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
  std::vector<std::string> failures() const;
};

struct LaplacianCheck {
  bool symmetric = false;
  bool zero_row_sums = false;
  bool nonpositive_offdiag = false;
  bool positive_diag = false;
  bool psd = false;
  bool connected = false;
  std::string detail;

  bool valid() const {
    return symmetric && zero_row_sums && nonpositive_offdiag && positive_diag && psd;
  }
};

LaplacianCheck check_laplacian(const Matrix& L);

/// Checks every structural invariant of the network and reports each one.
ValidationReport validate(const SecondOrderNetwork& net);

/// The four-node mass-spring-damper network with D = I (alpha = 1, beta = 0).
SecondOrderNetwork build_msd_example();

/// Grounds node 1 with unit stiffness over L; F = e1, H = K - diag(e1).
SecondOrderNetwork build_grounded_system(const Matrix& L, double alpha = 0.97, double beta = 0.15,
                                         double ground = 1.0);

/// The 100-node experiment construction applied to an arbitrary Laplacian.
/// Throws InvalidArgument naming the failed checks when validation fails.
SecondOrderNetwork build_sec4_system(const Matrix& L, double alpha = 0.97, double beta = 0.15);

Matrix ring_laplacian(Index n);
Matrix path_laplacian(Index n);

/// Holme-Kim growth: preferential attachment with triad formation.
/// Deterministic in seed. Throws DisconnectedAfterRetries.
Matrix generate_powerlaw_cluster(Index n, Index m, double p_triangle, std::uint64_t seed);

}  // namespace h2net
