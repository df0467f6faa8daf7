#pragma once

// Local-projection stabilization: projectors that annihilate the degree-p
// polynomial space on an element, the dissipation matrices P^T H A P built
// from them, the derivative-based alternative, and spectrum diagnostics.

#include "csbp/tri_sbp.hpp"
#include "csbp/types.hpp"

#include <iosfwd>
#include <string>

namespace csbp {

enum class ProjectorVariant { Exact2p, Approx2pMinus1, FdReconstruction };

struct Projector {
  Mat P;
  ProjectorVariant variant = ProjectorVariant::Exact2p;
  int p = 0;  ///< annihilated degree
};

struct LpsMatrix {
  Mat M;
  std::string scaling_desc;
};

/// P = I - L L^T H. Requires L^T H L = I to 1e-10.
Projector projector_exact(const Mat& L, const Vec& H);

/// P = I - L (L^T H L)^{-1} L^T H, valid when H is only 2p-1 exact. The
/// condition number of the Gram matrix is written to `gram_cond` if given.
Projector projector_approx(const Mat& L, const Vec& H, double* gram_cond = nullptr);

/// P = I - (reconstruction by neighbor averages with linear extrapolation at
/// the two ends). Requires n >= 4.
Projector projector_fd(Index n);

/// M = P^T H A P for a diagonal or block-diagonal A. Throws InvalidArgument if
/// H A is not symmetric positive semi-definite.
LpsMatrix lps_matrix(const Projector& P, const Vec& H, const Mat& A, std::string scaling_desc = "A");

/// (D_xi^s)^T H A_xi D_xi^s + (D_eta^s)^T H A_eta D_eta^s with s = p + 1.
Mat derivative_dissipation_tri(const SbpTri& op, int s, const Vec& Axi, const Vec& Aeta);

struct Spectrum {
  Vec eigenvalues;     ///< ascending eigenvalues of H^{-1} M
  Index zero_count = 0;  ///< eigenvalues below 1e-10 lambda_max
  double ratio = 0.0;    ///< lambda_max / smallest nonzero eigenvalue
};

Spectrum dissipation_spectrum(const Mat& M, const Vec& H);

/// CSV with columns index,eigenvalue.
void write_spectrum_csv(std::ostream& os, const Spectrum& s);

}  // namespace csbp
