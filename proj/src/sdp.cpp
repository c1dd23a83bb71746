#include "h2net/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>

#include "h2net/errors.hpp"

namespace h2net::sdp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near-optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

void LmiProgram::check() const {
  if (c.size() != num_vars) throw Error(ErrorCode::DimensionMismatch, "c length differs from num_vars");
  for (const auto& b : blocks) {
    if (b.F0.rows() != b.dim || b.F0.cols() != b.dim)
      throw Error(ErrorCode::DimensionMismatch, "block " + b.name + ": F0 is not dim x dim");
    if (b.coeffs.rows() != b.dim * b.dim || b.coeffs.cols() != num_vars)
      throw Error(ErrorCode::DimensionMismatch, "block " + b.name + ": coefficient shape");
    if (linalg::symmetry_defect(b.F0) > 1e-12)
      throw Error(ErrorCode::NotSymmetric, "block " + b.name + ": F0 not symmetric");
    for (Index i = 0; i < num_vars; ++i) {
      if (b.coeffs.col(i).nonZeros() == 0) continue;
      const Vector f = b.coeffs.col(i);
      if (linalg::symmetry_defect(Eigen::Map<const Matrix>(f.data(), b.dim, b.dim)) > 1e-12)
        throw Error(ErrorCode::NotSymmetric,
                    "block " + b.name + ": coefficient of variable " + std::to_string(i));
    }
  }
}

Matrix LmiProgram::evaluate(std::size_t block, const Vector& y) const {
  const LmiBlock& b = blocks.at(block);
  const Vector v = b.coeffs * y;
  return b.F0 + Eigen::Map<const Matrix>(v.data(), b.dim, b.dim);
}

void LmiProgram::dump_triplets(std::ostream& out) const {
  out << std::setprecision(17);
  out << "# block var row col value (upper triangle, var = const for F0)\n";
  for (const auto& b : blocks) {
    for (Index j = 0; j < b.dim; ++j)
      for (Index i = 0; i <= j; ++i)
        if (b.F0(i, j) != 0.0) out << b.name << " const " << i << " " << j << " " << b.F0(i, j) << "\n";
    for (Index v = 0; v < num_vars; ++v)
      for (SparseMatrix::InnerIterator it(b.coeffs, v); it; ++it) {
        const Index i = it.row() % b.dim;
        const Index j = it.row() / b.dim;
        if (i <= j && it.value() != 0.0)
          out << b.name << " " << v << " " << i << " " << j << " " << it.value() << "\n";
      }
  }
}

namespace {

using Blocks = std::vector<Matrix>;

Vector apply_A(const LmiProgram& p, const Blocks& X) {
  Vector out = Vector::Zero(p.num_vars);
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const Index d = p.blocks[k].dim;
    out.noalias() += p.blocks[k].coeffs.transpose() * Eigen::Map<const Vector>(X[k].data(), d * d);
  }
  return out;
}

Blocks apply_At(const LmiProgram& p, const Vector& y) {
  Blocks out(p.blocks.size());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const Index d = p.blocks[k].dim;
    const Vector v = p.blocks[k].coeffs * y;
    out[k] = Eigen::Map<const Matrix>(v.data(), d, d);
  }
  return out;
}

double inner(const Blocks& A, const Blocks& B) {
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k].cwiseProduct(B[k]).sum();
  return s;
}

double frob(const Blocks& A) { return std::sqrt(inner(A, A)); }

// Largest t with X + t dX still positive semidefinite.
double max_step(const Matrix& X, const Matrix& dX) {
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto L = llt.matrixL();
  const Matrix tmp = L.solve(dX);
  Matrix W = L.solve(tmp.transpose()).transpose();
  W = 0.5 * (W + W.transpose()).eval();
  const double lmin = linalg::min_eigenvalue(W);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

}  // namespace

SolveResult solve(const LmiProgram& prog, const SolverOptions& opts) {
  prog.check();
  const Index m = prog.num_vars;
  const std::size_t nb = prog.blocks.size();
  Index total_dim = 0;
  for (const auto& b : prog.blocks) total_dim += b.dim;
  if (total_dim == 0) throw Error(ErrorCode::InvalidArgument, "program has no PSD blocks");

  Blocks F0(nb);
  for (std::size_t k = 0; k < nb; ++k) F0[k] = prog.blocks[k].F0;
  const double norm_c = prog.c.norm();
  const double norm_F0 = frob(F0);

  // Starting point scaled to the data.
  double max_ratio = 0.0, max_coeff = norm_F0;
  for (Index i = 0; i < m; ++i) {
    double fi = 0.0;
    for (const auto& b : prog.blocks) fi += b.coeffs.col(i).squaredNorm();
    fi = std::sqrt(fi);
    max_ratio = std::max(max_ratio, (1.0 + std::abs(prog.c(i))) / (1.0 + fi));
    max_coeff = std::max(max_coeff, fi);
  }
  const double N = static_cast<double>(total_dim);
  const double xi = std::max({10.0, std::sqrt(N), N * max_ratio});
  const double eta = std::max({10.0, std::sqrt(N), max_coeff / std::sqrt(N)});

  SolveResult res;
  Blocks X(nb), Z(nb), Zinv(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Index d = prog.blocks[k].dim;
    X[k] = xi * Matrix::Identity(d, d);
    Z[k] = eta * Matrix::Identity(d, d);
  }
  Vector y = Vector::Zero(m);

  auto finish = [&](SolveStatus st, std::string msg) {
    res.status = st;
    res.message = std::move(msg);
    res.y = y;
    res.X = X;
    res.Z = Z;
    return res;
  };

  // Best iterate so far, scored against the full-accuracy tolerances.
  struct Snapshot {
    double score = std::numeric_limits<double>::infinity();
    int iter = 0;
    Vector y;
    Blocks X, Z;
    double pobj = 0, dobj = 0, gap = 0, pinf = 0, dinf = 0;
  } best;

  int stalled = 0;
  double last_ap = 0.0, last_ad = 0.0;
  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<Matrix> llt(Z[k]);
      if (llt.info() != Eigen::Success)
        return finish(SolveStatus::NumericalFailure, "slack lost positive definiteness");
      Zinv[k] = llt.solve(Matrix::Identity(Z[k].rows(), Z[k].cols()));
      Zinv[k] = 0.5 * (Zinv[k] + Zinv[k].transpose()).eval();
    }
    const Vector AX = apply_A(prog, X);
    const Vector rp = prog.c - AX;
    Blocks rd = apply_At(prog, y);
    for (std::size_t k = 0; k < nb; ++k) rd[k] += F0[k] - Z[k];

    const double pobj = -inner(F0, X);
    const double dobj = prog.c.dot(y);
    const double xz = inner(X, Z);
    const double mu = xz / N;
    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.relative_gap = std::max(xz, std::abs(dobj - pobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));
    res.primal_infeasibility = rp.norm() / (1.0 + norm_c);
    res.dual_infeasibility = frob(rd) / (1.0 + norm_F0);
    if (opts.verbose)
      std::cerr << "sdp " << iter << " pobj " << pobj << " dobj " << dobj << " gap "
                << res.relative_gap << " pinf " << res.primal_infeasibility << " dinf "
                << res.dual_infeasibility << " steps " << last_ap << " " << last_ad << "\n";

    if (res.primal_infeasibility <= opts.feasibility_tol &&
        res.dual_infeasibility <= opts.feasibility_tol && res.relative_gap <= opts.gap_tol)
      return finish(SolveStatus::Optimal, "converged");

    const double score = std::max({res.primal_infeasibility / opts.feasibility_tol,
                                   res.dual_infeasibility / opts.feasibility_tol,
                                   res.relative_gap / opts.gap_tol});
    if (score < best.score) best = {score, iter, y, X, Z, pobj, dobj, res.relative_gap,
                                    res.primal_infeasibility, res.dual_infeasibility};
    // Past full accuracy the iterates can wander; stop once nothing improves.
    if (iter - best.iter > 15) break;

    // X >= 0 with A(X) ~ 0 and <F0, X> < 0 certifies that no y is feasible.
    if (pobj > 0.0 && AX.norm() <= 1e-8 * pobj && res.dual_infeasibility > opts.feasibility_tol)
      return finish(SolveStatus::Infeasible, "infeasibility certificate found");
    if (iter == opts.max_iterations) break;

    std::vector<SchurBlock> sb(nb);
    for (std::size_t k = 0; k < nb; ++k) sb[k] = {&prog.blocks[k].coeffs, &Zinv[k], &X[k]};
    Matrix M = opts.kernel == SchurKernelKind::Parallel ? schur_complement_parallel(sb, m)
                                                        : schur_complement_serial(sb, m);
    Eigen::LLT<Matrix> mfac(M);
    if (mfac.info() != Eigen::Success) {
      M.diagonal().array() += 1e-13 * M.diagonal().cwiseAbs().maxCoeff();
      mfac.compute(M);
      if (mfac.info() != Eigen::Success)
        return finish(SolveStatus::NumericalFailure, "Schur complement is not positive definite");
    }

    Blocks ZinvRdX(nb);
    for (std::size_t k = 0; k < nb; ++k) ZinvRdX[k] = Zinv[k] * rd[k] * X[k];
    const Vector AZinv = apply_A(prog, Zinv);
    const Vector base_rhs = -prog.c - apply_A(prog, ZinvRdX);

    auto direction = [&](double sigma_mu, const Blocks* corr, Vector& dy, Blocks& dX, Blocks& dZ) {
      Vector rhs = base_rhs + sigma_mu * AZinv;
      if (corr) rhs -= apply_A(prog, *corr);
      dy = mfac.solve(rhs);
      // The factored M loses accuracy as mu -> 0; refine against the exact
      // operator dy -> A(Zinv A^T(dy) X).
      for (int ref = 0; ref < 3; ++ref) {
        Blocks t = apply_At(prog, dy);
        for (std::size_t k = 0; k < nb; ++k) t[k] = Zinv[k] * t[k] * X[k];
        const Vector resid = rhs - apply_A(prog, t);
        if (resid.norm() <= 1e-15 * rhs.norm()) break;
        dy += mfac.solve(resid);
      }
      dZ = apply_At(prog, dy);
      for (std::size_t k = 0; k < nb; ++k) {
        dZ[k] += rd[k];
        dZ[k] = 0.5 * (dZ[k] + dZ[k].transpose()).eval();
        Matrix t = sigma_mu * Zinv[k] - X[k] - Zinv[k] * dZ[k] * X[k];
        if (corr) t -= (*corr)[k];
        dX[k] = 0.5 * (t + t.transpose());
      }
    };
    auto steps = [&](const Blocks& dX, const Blocks& dZ, double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dX[k]));
        ad = std::min(ad, max_step(Z[k], dZ[k]));
      }
    };

    Vector dy;
    Blocks dX(nb), dZ(nb);
    direction(0.0, nullptr, dy, dX, dZ);
    double ap = 0.0, ad = 0.0;
    steps(dX, dZ, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      xz_aff += (X[k] + ap * dX[k]).cwiseProduct(Z[k] + ad * dZ[k]).sum();
    const double ratio = std::max(0.0, xz_aff / xz);
    const double sigma = std::min(1.0, std::pow(ratio, std::max(ap, ad) > 0.5 ? 3.0 : 2.0));

    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = Zinv[k] * dZ[k] * dX[k];
    direction(sigma * mu, &corr, dy, dX, dZ);
    steps(dX, dZ, ap, ad);
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);

    // Eigenvalue-based step bounds can be optimistic when X or Z is badly
    // conditioned; shrink until both iterates factor.
    auto factors = [&](const Blocks& B, const Blocks& dB, double a) {
      for (std::size_t k = 0; k < nb; ++k) {
        Eigen::LLT<Matrix> llt(B[k] + a * dB[k]);
        if (llt.info() != Eigen::Success) return false;
      }
      return true;
    };
    for (int tries = 0; tries < 30 && !factors(X, dX, ap); ++tries) ap *= 0.8;
    for (int tries = 0; tries < 30 && !factors(Z, dZ, ad); ++tries) ad *= 0.8;
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      Z[k] += ad * dZ[k];
    }
    y += ad * dy;
    last_ap = ap;
    last_ad = ad;

    stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 3) break;
  }

  if (best.score < std::numeric_limits<double>::infinity()) {
    y = best.y;
    X = best.X;
    Z = best.Z;
    res.primal_objective = best.pobj;
    res.dual_objective = best.dobj;
    res.relative_gap = best.gap;
    res.primal_infeasibility = best.pinf;
    res.dual_infeasibility = best.dinf;
  }
  if (res.primal_infeasibility <= opts.near_feasibility_tol &&
      res.dual_infeasibility <= opts.near_feasibility_tol && res.relative_gap <= opts.near_gap_tol)
    return finish(SolveStatus::NearOptimal, "stopped before full accuracy");
  return finish(SolveStatus::NumericalFailure,
                "tolerance unreachable after " + std::to_string(res.iterations) + " iterations");
}

}  // namespace h2net::sdp
