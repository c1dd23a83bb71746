#pragma once

#include "h2net/network.hpp"

namespace h2net {

/// Kernel dynamics z_a'' + D0 z_a' = S0^T F u, y_a = H S0 z_a.
struct AveragePart {
  Matrix D0;  // S0^T D S0, equals alpha I for proportional damping
  Matrix F0;  // S0^T F
  Matrix H0;  // H S0

  Index dim() const { return D0.rows(); }
  SecondOrderSystem system() const;
};

struct SemistableSplit {
  Matrix S0;  // n x m, K S0 = 0
  Matrix S1;  // n x (n - m)
  Matrix Kbar, Dbar;
  SecondOrderSystem stable;  // (Kbar, Dbar, S1^T F, H S1)
  AveragePart average;

  Index kernel_dim() const { return S0.cols(); }
};

/// Throws NotSemistable for an indefinite K and FullyStable when K is
/// nonsingular.
SemistableSplit split(const SecondOrderNetwork& net);

/// Block-diagonal model of order m + r whose transfer function is the sum of
/// the two parts. Throws DimensionMismatch.
SecondOrderSystem recombine(const AveragePart& avg, const SecondOrderSystem& stable_part);

}  // namespace h2net
