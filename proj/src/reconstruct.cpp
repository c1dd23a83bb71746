#include "h2net/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "h2net/errors.hpp"

namespace h2net {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct OrderedEig {
  Vector lambda;  // lambda(0) smallest, then the tail
  Matrix Ucal;    // matching orthonormal eigenvectors as columns
};

OrderedEig ordered_eig(const Matrix& Khat, TailOrder tail) {
  SymEig e = linalg::sym_eig(Khat, EigenOrder::Ascending);
  const Index r = e.values.size();
  const double tol = 1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
  // Within a repeated eigenvalue the basis is arbitrary; fix it canonically.
  for (Index s = 0; s < r;) {
    Index t = s + 1;
    while (t < r && e.values(t) - e.values(t - 1) <= tol) ++t;
    if (t - s > 1) e.vectors.middleCols(s, t - s) = linalg::canonical_basis(e.vectors.middleCols(s, t - s));
    s = t;
  }
  for (Index k = 0; k < r; ++k) {
    Index arg = 0;
    e.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (e.vectors(arg, k) < 0) e.vectors.col(k) *= -1.0;
  }
  std::vector<Index> order{0};
  if (tail == TailOrder::Descending)
    for (Index k = r - 1; k >= 1; --k) order.push_back(k);
  else
    for (Index k = 1; k < r; ++k) order.push_back(k);
  OrderedEig out{Vector(r), Matrix(r, r)};
  for (Index k = 0; k < r; ++k) {
    out.lambda(k) = e.values(order[k]);
    out.Ucal.col(k) = e.vectors.col(order[k]);
  }
  return out;
}

Matrix v_unchecked(const Matrix& T) {
  const Index r = T.rows() + 1;
  Matrix V(r, r);
  const double s = 1.0 / std::sqrt(static_cast<double>(r));
  V.col(0).setConstant(s);
  V.block(0, 1, 1, r - 1) = -T.colwise().sum();
  V.bottomRightCorner(r - 1, r - 1) = T;
  return V;
}

// lambda_r I + V Lambda V^T for ordered eigenvalues.
Matrix spectral_k(const Matrix& T, const Vector& lambda) {
  const Matrix V = v_unchecked(T);
  Vector shifted = lambda.array() - lambda(0);
  shifted(0) = 0.0;
  Matrix K = V * shifted.asDiagonal() * V.transpose();
  K.diagonal().array() += lambda(0);
  return 0.5 * (K + K.transpose());
}

double max_offdiag(const Matrix& K) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K.rows(); ++i)
    for (Index j = 0; j < K.cols(); ++j)
      if (i != j) worst = std::max(worst, K(i, j));
  return worst;
}

GraphRealization finish_realization(const ReducedModel& red, const Matrix& Ur, double lambda_r,
                                    double mmatrix_tol) {
  GraphRealization g;
  g.Ur = Ur;
  g.Kr = Ur * red.Kr_hat * Ur.transpose();
  g.Kr = 0.5 * (g.Kr + g.Kr.transpose()).eval();
  g.Dr = Ur * red.Dr_hat * Ur.transpose();
  g.Dr = 0.5 * (g.Dr + g.Dr.transpose()).eval();
  g.Fr = Ur * red.Fr_hat;
  g.Hr = red.Hr_hat * Ur.transpose();
  g.lambda_r = lambda_r;
  g.Vr_diag = g.Kr.rowwise().sum();
  g.damping = red.damping;
  g.max_offdiag = g.Kr.rows() > 1 ? max_offdiag(g.Kr) : 0.0;
  g.mmatrix = g.max_offdiag <= mmatrix_tol * std::max(1.0, linalg::spectral_norm_sym(g.Kr));
  g.Lr = g.Kr;
  // Within tolerance, positive couplings are rounding noise; drop them so Lr
  // is an exact Laplacian.
  if (g.mmatrix) g.Lr = g.Lr.cwiseMin(0.0);
  g.Lr.diagonal().setZero();
  g.Lr.diagonal() = -g.Lr.rowwise().sum();
  return g;
}

}  // namespace

SecondOrderNetwork GraphRealization::to_network() const {
  const double alpha = damping ? damping->alpha : 0.0;
  const double beta = damping ? damping->beta : 0.0;
  std::optional<Matrix> D_override;
  const Matrix prop = alpha * Matrix::Identity(Kr.rows(), Kr.cols()) + beta * Kr;
  if (!damping || (Dr - prop).norm() > 1e-8 * std::max(1.0, Dr.norm())) D_override = Dr;
  return SecondOrderNetwork(Vr_diag, Lr, alpha, beta, Fr, Hr, D_override);
}

Matrix t_factor_target(Index r) {
  return Matrix::Identity(r - 1, r - 1) -
         Matrix::Constant(r - 1, r - 1, 1.0 / static_cast<double>(r));
}

double t_factor_defect(const Matrix& T) {
  if (T.rows() != T.cols()) return std::numeric_limits<double>::infinity();
  if (T.rows() == 0) return 0.0;
  return (T * T.transpose() - t_factor_target(T.rows() + 1)).cwiseAbs().maxCoeff();
}

TFactor base_t_factor(Index r) {
  if (r < 2) throw Error(ErrorCode::InvalidArgument, "T factor needs r >= 2");
  const double rr = static_cast<double>(r);
  const double c = (1.0 - 1.0 / std::sqrt(rr)) / (rr - 1.0);
  return {Matrix::Identity(r - 1, r - 1) - Matrix::Constant(r - 1, r - 1, c)};
}

TFactor helmert_t_factor(Index r) {
  if (r < 2) throw Error(ErrorCode::InvalidArgument, "T factor needs r >= 2");
  Matrix T = Matrix::Zero(r - 1, r - 1);
  for (Index k = 1; k <= r - 1; ++k) {
    const double s = std::sqrt(static_cast<double>(k * (k + 1)));
    for (Index p = 2; p <= r; ++p) {
      if (p <= k) T(p - 2, k - 1) = 1.0 / s;
      else if (p == k + 1) T(p - 2, k - 1) = -static_cast<double>(k) / s;
    }
  }
  return {T};
}

TFactor snap_t_factor(const Matrix& T) {
  const Index r = T.rows() + 1;
  const Matrix M = base_t_factor(r).T;
  const Matrix Q = linalg::orthogonal_polar(M.partialPivLu().solve(T));
  return {M * Q};
}

Matrix assemble_v(const TFactor& t, double tol) {
  const double defect = t_factor_defect(t.T);
  if (!(defect <= tol))
    throw Error(ErrorCode::NotOrthogonal,
                "T T^T deviates from I - (1/r) 1 1^T by " + std::to_string(defect));
  return v_unchecked(t.T);
}

bool satisfies_sign_pattern(const Matrix& T, Index m) {
  const Index r = T.rows() + 1;
  if (m < 1 || m > r - 2) throw Error(ErrorCode::InvalidArgument, "m must satisfy 1 <= m <= r-2");
  for (Index j = 1; j <= r - 1; ++j) {
    const bool opposite = j <= r - m - 1;
    for (Index i = 0; i < r - 1; ++i)
      for (Index s = i + 1; s < r - 1; ++s) {
        const double prod = T(i, j - 1) * T(s, j - 1);
        if (opposite ? prod > 0.0 : prod < 0.0) return false;
      }
  }
  return true;
}

GraphRealization reconstruct(const ReducedModel& red, const TFactor& t, const ReconstructOptions& opts) {
  const Index r = red.Kr_hat.rows();
  if (t.order() != r) throw Error(ErrorCode::DimensionMismatch, "T factor order differs from r");
  if (linalg::min_eigenvalue(red.Kr_hat) <= 0.0)
    throw Error(ErrorCode::NotPositiveDefinite, "reduced stiffness is not positive definite");
  TFactor tf = t;
  if (r >= 2) {
    const double defect = t_factor_defect(tf.T);
    if (!(defect <= opts.t_tolerance))
      throw Error(ErrorCode::NotOrthogonal,
                  "T T^T deviates from I - (1/r) 1 1^T by " + std::to_string(defect));
    if (opts.snap_t) tf = snap_t_factor(tf.T);
  }
  const OrderedEig eig = ordered_eig(red.Kr_hat, opts.tail);
  const Matrix V = r >= 2 ? assemble_v(tf, std::max(opts.t_tolerance, 1e-10)) : Matrix::Ones(1, 1);
  const Matrix Ur = V * eig.Ucal.transpose();
  GraphRealization g = finish_realization(red, Ur, eig.lambda(0), opts.mmatrix_tol);
  if (opts.require_mmatrix && !g.mmatrix)
    throw Error(ErrorCode::NotMMatrix,
                "realized stiffness has positive off-diagonal " + std::to_string(g.max_offdiag));
  return g;
}

namespace {

Matrix givens_product(const Vector& theta, Index k) {
  Matrix Q = Matrix::Identity(k, k);
  Index idx = 0;
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) {
      const double c = std::cos(theta(idx)), s = std::sin(theta(idx));
      ++idx;
      // Q <- Q * G(i, j)
      const Vector qi = Q.col(i), qj = Q.col(j);
      Q.col(i) = c * qi + s * qj;
      Q.col(j) = -s * qi + c * qj;
    }
  return Q;
}

struct SparsityProblem {
  Matrix M;
  Vector lambda;
  std::vector<std::pair<Index, Index>> targets;
  Index k = 0;  // r - 1

  Matrix T(const Vector& theta) const { return M * givens_product(theta, k); }
  Matrix K(const Vector& theta) const { return spectral_k(T(theta), lambda); }
  Vector residual(const Vector& theta) const {
    const Matrix Kr = K(theta);
    Vector out(static_cast<Index>(targets.size()));
    for (std::size_t t = 0; t < targets.size(); ++t) out(t) = Kr(targets[t].first, targets[t].second);
    return out;
  }
  double diag_energy(const Vector& theta) const { return K(theta).diagonal().squaredNorm(); }
  Matrix jacobian(const Vector& theta) const {
    const double h = 1e-7;
    Matrix J(static_cast<Index>(targets.size()), theta.size());
    for (Index a = 0; a < theta.size(); ++a) {
      Vector tp = theta, tm = theta;
      tp(a) += h;
      tm(a) -= h;
      J.col(a) = (residual(tp) - residual(tm)) / (2.0 * h);
    }
    return J;
  }
  Vector energy_gradient(const Vector& theta) const {
    const double h = 1e-7;
    Vector g(theta.size());
    for (Index a = 0; a < theta.size(); ++a) {
      Vector tp = theta, tm = theta;
      tp(a) += h;
      tm(a) -= h;
      g(a) = (diag_energy(tp) - diag_energy(tm)) / (2.0 * h);
    }
    return g;
  }
};

// Levenberg-Marquardt on the target residuals.
Vector levenberg_marquardt(const SparsityProblem& p, Vector theta, int max_iter, double tol) {
  double mu = 1e-3;
  Vector res = p.residual(theta);
  double cost = res.squaredNorm();
  for (int it = 0; it < max_iter && std::sqrt(cost) > 0.1 * tol; ++it) {
    const Matrix J = p.jacobian(theta);
    const Matrix JtJ = J.transpose() * J;
    const Vector g = J.transpose() * res;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      Matrix A = JtJ;
      A.diagonal().array() += mu * (1.0 + JtJ.diagonal().array());
      const Vector step = A.ldlt().solve(-g);
      const Vector cand = theta + step;
      const Vector rc = p.residual(cand);
      if (rc.squaredNorm() < cost) {
        theta = cand;
        res = rc;
        cost = rc.squaredNorm();
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  return theta;
}

// Gauss-Newton back onto the zero set after a tangent step.
bool reproject(const SparsityProblem& p, Vector& theta, double tol) {
  for (int it = 0; it < 30; ++it) {
    const Vector res = p.residual(theta);
    if (res.cwiseAbs().maxCoeff() <= 0.1 * tol) return true;
    const Matrix J = p.jacobian(theta);
    theta -= J.completeOrthogonalDecomposition().solve(res);
  }
  return p.residual(theta).cwiseAbs().maxCoeff() <= tol;
}

// Along the zero set, move toward the least diagonal energy (equivalently
// the largest coupling energy, since the Frobenius norm is fixed).
Vector spread_couplings(const SparsityProblem& p, Vector theta, double tol) {
  if (theta.size() <= static_cast<Index>(p.targets.size())) return theta;
  double f = p.diag_energy(theta);
  double eta = 0.1;
  for (int it = 0; it < 400 && eta > 1e-10; ++it) {
    const Matrix J = p.jacobian(theta);
    const Matrix proj = Matrix::Identity(theta.size(), theta.size()) -
                        J.completeOrthogonalDecomposition().pseudoInverse() * J;
    const Vector g = proj * p.energy_gradient(theta);
    if (g.norm() < 1e-12) break;
    Vector cand = theta - eta * g / g.norm();
    if (reproject(p, cand, tol)) {
      const double fc = p.diag_energy(cand);
      if (fc < f - 1e-15 * std::max(1.0, f)) {
        theta = cand;
        f = fc;
        eta = std::min(1.0, eta * 1.5);
        continue;
      }
    }
    eta *= 0.5;
  }
  return theta;
}

}  // namespace

SparsityResult solve_sparsity(const ReducedModel& red, std::vector<std::pair<Index, Index>> targets,
                              const SparsityOptions& opts) {
  const Index r = red.Kr_hat.rows();
  if (r < 2) throw Error(ErrorCode::InvalidArgument, "sparsity targets need r >= 2");
  std::set<std::pair<Index, Index>> uniq;
  for (auto [i, j] : targets) {
    if (i < 0 || j < 0 || i >= r || j >= r)
      throw Error(ErrorCode::InvalidArgument, "zero target index out of range");
    if (i == j) throw Error(ErrorCode::InvalidArgument, "zero targets must be off-diagonal");
    uniq.insert({std::min(i, j), std::max(i, j)});
  }
  targets.assign(uniq.begin(), uniq.end());
  const Index max_targets = r * (r - 1) / 2 - (r - 1);
  if (static_cast<Index>(targets.size()) > max_targets && !(r == 2 && targets.size() == 1))
    throw Error(ErrorCode::InvalidArgument,
                "at most " + std::to_string(max_targets) + " zero targets keep the graph connected");

  SparsityResult best;
  best.t = base_t_factor(r);
  if (targets.empty()) {
    best.start_index = 0;
    best.mmatrix = finish_realization(red, assemble_v(best.t) * ordered_eig(red.Kr_hat, opts.tail).Ucal.transpose(),
                                      0.0, 1e-8)
                       .mmatrix;
    return best;
  }

  SparsityProblem prob;
  prob.M = best.t.T;
  prob.lambda = ordered_eig(red.Kr_hat, opts.tail).lambda;
  prob.targets = targets;
  prob.k = r - 1;
  const double scale = std::max(1.0, linalg::spectral_norm_sym(red.Kr_hat));
  const double tol = opts.tolerance * scale;
  const Index angles = (r - 1) * (r - 2) / 2;

  // Starting angles drawn serially so they do not depend on threading.
  std::vector<Vector> starts(std::max(1, opts.starts));
  std::mt19937_64 rng(opts.seed);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    starts[s] = Vector::Zero(angles);
    if (s > 0)
      for (Index a = 0; a < angles; ++a) starts[s](a) = (2.0 * uniform01(rng) - 1.0) * M_PI;
  }

  struct Outcome {
    Vector theta;
    double residual = std::numeric_limits<double>::infinity();
    double energy = std::numeric_limits<double>::infinity();
    bool mmatrix = false;
  };
  std::vector<Outcome> out(starts.size());
  const int nstarts = static_cast<int>(starts.size());
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (int s = 0; s < nstarts; ++s) {
    Vector theta = angles > 0 ? levenberg_marquardt(prob, starts[s], opts.max_iterations, tol) : starts[s];
    double res = prob.residual(theta).cwiseAbs().maxCoeff();
    if (res <= tol) {
      theta = spread_couplings(prob, theta, tol);
      res = prob.residual(theta).cwiseAbs().maxCoeff();
    }
    Outcome o;
    o.theta = theta;
    o.residual = res;
    const Matrix K = prob.K(theta);
    o.energy = K.diagonal().squaredNorm();
    Matrix off = K;
    for (auto [i, j] : targets) off(i, j) = off(j, i) = 0.0;
    o.mmatrix = r < 2 || max_offdiag(off) <= 1e-8 * scale;
    out[s] = o;
  }

  int pick = -1;
  for (int s = 0; s < nstarts; ++s) {
    const Outcome& o = out[s];
    if (o.residual > tol) continue;
    if (pick < 0) {
      pick = s;
      continue;
    }
    const Outcome& b = out[pick];
    if (o.mmatrix != b.mmatrix) {
      if (o.mmatrix) pick = s;
      continue;
    }
    if (o.energy < b.energy - 1e-9 * scale * scale) pick = s;
  }
  if (pick < 0) {
    int lowest = 0;
    for (int s = 1; s < nstarts; ++s)
      if (out[s].residual < out[lowest].residual) lowest = s;
    throw Error(ErrorCode::NoSolutionFound,
                "no T zeroes the targets; best residual " + std::to_string(out[lowest].residual) +
                    " from start " + std::to_string(lowest));
  }
  best.t = {prob.T(out[pick].theta)};
  best.residual = out[pick].residual;
  best.start_index = pick;
  best.mmatrix = out[pick].mmatrix;
  return best;
}

HouseholderResult householder_tridiag(const Matrix& Khat) {
  if (linalg::symmetry_defect(Khat) > 1e-12) throw Error(ErrorCode::NotSymmetric, "input not symmetric");
  const Index r = Khat.rows();
  HouseholderResult out;
  if (r <= 2) {
    out.Ur = Matrix::Identity(r, r);
    out.Ktilde = Khat;
  } else {
    Eigen::Tridiagonalization<Matrix> tri(0.5 * (Khat + Khat.transpose()));
    const Matrix Q = tri.matrixQ();
    out.Ur = Q.transpose();
    out.Ktilde = out.Ur * Khat * out.Ur.transpose();
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < r; ++j)
        if (std::abs(i - j) > 1) out.Ktilde(i, j) = 0.0;
  }
  // Diagonal signature making every coupling non-positive.
  Vector s = Vector::Ones(r);
  for (Index k = 0; k + 1 < r; ++k) {
    const double sub = out.Ktilde(k + 1, k);
    s(k + 1) = (sub * s(k) > 0.0) ? -1.0 : 1.0;
  }
  out.Ktilde = s.asDiagonal() * out.Ktilde * s.asDiagonal();
  out.Ktilde = 0.5 * (out.Ktilde + out.Ktilde.transpose()).eval();
  out.Ur = s.asDiagonal() * out.Ur;
  const double scale = std::max(1.0, linalg::spectral_norm_sym(out.Ktilde));
  out.diag_dominant = true;
  for (Index i = 0; i < r; ++i) {
    const double off = out.Ktilde.row(i).cwiseAbs().sum() - std::abs(out.Ktilde(i, i));
    if (out.Ktilde(i, i) < off - 1e-10 * scale) out.diag_dominant = false;
  }
  return out;
}

GraphRealization householder_realization(const ReducedModel& red) {
  const HouseholderResult h = householder_tridiag(red.Kr_hat);
  GraphRealization g = finish_realization(red, h.Ur, linalg::min_eigenvalue(red.Kr_hat), 1e-8);
  g.Kr = h.Ktilde;
  g.Vr_diag = g.Kr.rowwise().sum();
  g.Lr = g.Kr;
  g.Lr.diagonal() -= g.Vr_diag;
  return g;
}

ReducedModel spectral_model(const Vector& spectrum) {
  const Index r = spectrum.size();
  ReducedModel red;
  red.r = r;
  red.Kr_hat = spectrum.asDiagonal();
  red.Dr_hat = Matrix::Identity(r, r);
  red.Fr_hat = Matrix::Zero(r, 1);
  red.Hr_hat = Matrix::Zero(1, r);
  red.W = Matrix::Identity(r, r);
  red.damping = ProportionalDamping{1.0, 0.0};
  return red;
}

}  // namespace h2net
