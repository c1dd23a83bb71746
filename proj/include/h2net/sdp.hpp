#pragma once

// Small dense-block semidefinite programs in linear-matrix-inequality form:
//
//   minimize c^T y  subject to  F0_b + sum_i y_i F_{i,b} >= 0  for every block b
//
// solved together with the primal problem
//
//   maximize -sum_b <F0_b, X_b>  subject to  sum_b <F_{i,b}, X_b> = c_i,  X_b >= 0.

#include <iosfwd>
#include <string>
#include <vector>

#include "h2net/linalg.hpp"
#include "h2net/schur_kernel.hpp"

namespace h2net::sdp {

struct LmiBlock {
  std::string name;
  Index dim = 0;
  Matrix F0;             // dim x dim, symmetric
  SparseMatrix coeffs;   // (dim*dim) x num_vars, column i = vec(F_i)
};

struct LmiProgram {
  Index num_vars = 0;
  Vector c;
  std::vector<LmiBlock> blocks;

  /// Throws DimensionMismatch or NotSymmetric.
  void check() const;
  /// F0_b + sum_i y_i F_{i,b}.
  Matrix evaluate(std::size_t block, const Vector& y) const;
  /// One line per nonzero: block name, variable index (0 for F0 is "const"),
  /// row, column, value. Only the upper triangle is listed.
  void dump_triplets(std::ostream& out) const;
};

enum class SolveStatus { Optimal, NearOptimal, Infeasible, NumericalFailure };
const char* to_string(SolveStatus s);

enum class SchurKernelKind { Serial, Parallel };

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double gap_tol = 1e-7;
  double near_feasibility_tol = 1e-6;
  double near_gap_tol = 1e-5;
  int max_iterations = 150;
  double step_fraction = 0.95;
  SchurKernelKind kernel = SchurKernelKind::Parallel;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector y;
  std::vector<Matrix> X;  // primal (dual-certificate) matrices
  std::vector<Matrix> Z;  // slacks, Z_b = F0_b + sum y_i F_{i,b}
  double dual_objective = 0.0;    // c^T y
  double primal_objective = 0.0;  // -sum <F0_b, X_b>
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::string message;
};

/// Infeasible-start primal-dual interior-point method with the HKM search
/// direction and Mehrotra predictor-corrector steps.
SolveResult solve(const LmiProgram& prog, const SolverOptions& opts = {});

}  // namespace h2net::sdp
