#pragma once

// Diagonal-norm SBP operators on the reference triangle. The norm and nodes
// come from a TriCubature, E from face quadrature along the LGL face nodes,
// and S from the weighted minimum-norm skew solve.

#include "csbp/skew_solve.hpp"
#include "csbp/tri_cubature.hpp"
#include "csbp/types.hpp"

#include <array>
#include <string>

namespace csbp {

/// Orthonormal total-degree-p basis on the reference triangle, built from
/// Proriol-Koornwinder-Dubiner polynomials and re-orthonormalized under the
/// cubature inner product.
class PkdBasis {
 public:
  PkdBasis() = default;
  /// Builds the basis and its nodal values on `c`. Throws ConstructionError
  /// if the Gram matrix deviates from the identity by more than 1e-10 before
  /// the correction (the cubature is not 2p exact).
  PkdBasis(const TriCubature& c, int p);

  int degree() const { return p_; }
  Index size() const { return (p_ + 1) * (p_ + 2) / 2; }

  /// Basis values and derivatives at arbitrary points (rows of `pts`).
  void evaluate(const Points& pts, Mat* values, Mat* dxi = nullptr, Mat* deta = nullptr) const;

  Mat L;     ///< nodal values, n_k x n_p
  Mat Lxi;   ///< nodal xi-derivatives
  Mat Leta;  ///< nodal eta-derivatives

 private:
  void evaluate_raw(const Points& pts, Mat* values, Mat* dxi, Mat* deta) const;

  int p_ = 0;
  Mat correction_;  ///< maps raw PKD values to the orthonormal basis
};

/// Jacobi polynomial P_n^{(alpha, beta)}(x).
double jacobi(int n, double alpha, double beta, double x);

enum class Direction { Xi, Eta };

struct SbpTri {
  int p = 0;
  TriCubature cubature;
  PkdBasis basis;
  Vec H;
  Vec Exi, Eeta;  ///< diagonals of E_xi, E_eta
  Mat Sxi, Seta;
  std::array<FaceRule, 3> face_rules;
  std::array<Point, 3> normals;  ///< outward unit normals
  std::array<double, 3> face_lengths{};

  Index size() const { return H.size(); }
  Mat Qxi() const;
  Mat Qeta() const;
  Mat Dxi() const;
  Mat Deta() const;
};

/// Outward unit normal and length of face f of the reference triangle.
Point reference_face_normal(int f);
double reference_face_length(int f);

PkdBasis pkd_basis(const TriCubature& c, int p);

/// Diagonal of E = sum_f n_f R_f^T B_f R_f for the given direction.
Vec build_E(const TriCubature& c, Direction dir);

/// Throws InvalidArgument for p outside 0..4.
SbpTri build_sbp_tri(int p);

/// Assemble the bundle from an existing cubature (used by fixture loading).
SbpTri build_sbp_tri(const TriCubature& c);

struct SbpReport {
  double accuracy_residual = 0.0;  ///< condition 1: max |D p - dp| over monomials of degree <= p
  double min_H = 0.0;              ///< condition 2: smallest norm entry
  double skew_residual = 0.0;      ///< condition 3: max |S + S^T|
  double boundary_residual = 0.0;  ///< condition 3: max |p^T E q - boundary integral|
  double e_offdiag = 0.0;          ///< E stored as a diagonal, always zero here
  bool accuracy_ok = false;
  bool norm_ok = false;
  bool decomposition_ok = false;

  bool ok() const { return accuracy_ok && norm_ok && decomposition_ok; }
  std::string summary() const;
};

/// SBP conditions checked with independent oracles: monomials for
/// accuracy, and a high-order Gauss rule on each face for the boundary integrals.
SbpReport verify_sbp(const SbpTri& op);

}  // namespace csbp
