#pragma once

#include "csbp/types.hpp"

namespace csbp {

/// Diagnostics of the weighted minimum-norm skew solve.
struct SkewSolveReport {
  double compatibility_residual = 0.0;  ///< max |L^T H L' + L'^T H L - L^T E L|
  double constraint_residual = 0.0;     ///< max |S L - (H L' - E L / 2)|
  Index unknowns = 0;
  Index equations = 0;  ///< independent equations, n_k n_p - n_p (n_p + 1) / 2
  Index rank = 0;
};

/// Position of the strictly-lower-triangular entry (i, j), i > j, in the
/// packed unknown vector (zero-based rows and columns).
constexpr Index packed_lower_index(Index i, Index j) { return j + i * (i - 1) / 2; }

/// Skew-symmetric S minimizing ||H^{-1} S||_F subject to S L = H L' - E L / 2.
///
/// `H` and `E` are the diagonals of the norm and boundary matrices, `L` holds
/// a polynomial basis at the nodes and `Lder` its derivative in the direction
/// being discretized. Throws ConstructionError when the compatibility
/// conditions fail (the cubature is not accurate enough) or the minimum-norm
/// solution misses the constraints.
Mat build_S_minnorm(const Vec& H, const Vec& E, const Mat& L, const Mat& Lder,
                    SkewSolveReport* report = nullptr);

}  // namespace csbp
