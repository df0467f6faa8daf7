#pragma once

// One-dimensional reference-element machinery: Legendre-Gauss-Lobatto rules,
// diagonal-norm SBP operators on [-1, 1], and the derivative-based and
// projection-based dissipation operators built from them.

#include "csbp/types.hpp"

namespace csbp {

/// n-point Legendre-Gauss-Lobatto rule on [-1, 1].
struct Lgl1D {
  int n = 0;
  Vec nodes;    ///< strictly increasing, nodes(0) = -1, nodes(n-1) = 1
  Vec weights;  ///< positive, summing to 2
};

/// Degree-p diagonal-norm SBP first-derivative operator D = H^{-1} Q on LGL nodes.
struct Sbp1D {
  int p = 0;
  int n = 0;
  Vec nodes;
  Vec H;  ///< diagonal of the norm
  Mat Q;
  Mat S;  ///< skew-symmetric part of Q
  Vec E;  ///< diagonal of Q + Q^T, diag(-1, 0, ..., 0, 1)

  Mat D() const { return H.cwiseInverse().asDiagonal() * Q; }
};

/// Orthonormal Legendre polynomials evaluated at a node set.
struct Vandermonde1D {
  int p = 0;
  Mat L;   ///< n x (p+1), column j is the unit-norm Legendre polynomial of degree j
  Mat Lp;  ///< n x (p+1), derivatives of the columns of L
};

/// Legendre polynomial P_k and its derivative at x.
std::pair<double, double> legendre(int k, double x);

/// Throws InvalidArgument for n < 2, ConstructionError if Newton and bisection fail.
Lgl1D lgl_rule(int n);

Sbp1D build_sbp_1d(int p, int n);

/// Unit-L2-norm Legendre basis up to degree p at `nodes`. When the weights `H`
/// are given, orthonormality L^T H L = I is checked to 1e-12 and a
/// ConstructionError is raised if the quadrature is not accurate enough.
Vandermonde1D legendre_vandermonde(int p, const Vec& nodes, const Vec& H = Vec());

struct Dissipation1D {
  Mat matrix;
  /// n < s + 1: D^s annihilates everything representable on the nodes.
  bool trivial = false;
};

/// (D^s)^T H A D^s with D^s the s-fold product of the first-derivative operator.
Dissipation1D derivative_dissipation_1d(const Sbp1D& op, int s, const Vec& A);

/// P^T H A P with P = I - L L^T H.
Mat lps_dissipation_1d(const Sbp1D& op, const Vandermonde1D& V, const Vec& A);

struct RankOneEquivalence {
  Vec m;  ///< unit eigenvector, first nonzero entry positive
  double lambda_D = 0.0;
  double lambda_P = 0.0;
  double alpha = 0.0;  ///< lambda_D / lambda_P
};

/// Factor both symmetric matrices as lambda m m^T with a shared m. Throws
/// ConstructionError if either is not rank one or the eigenvectors differ.
RankOneEquivalence rank_one_equivalence(const Mat& Dis, const Mat& M);

}  // namespace csbp
