#include "csbp/skew_solve.hpp"

#include <cmath>
#include <sstream>

namespace csbp {

Mat build_S_minnorm(const Vec& H, const Vec& E, const Mat& L, const Mat& Lder,
                    SkewSolveReport* report) {
  const Index n = H.size();
  const Index np = L.cols();
  if (E.size() != n || L.rows() != n || Lder.rows() != n || Lder.cols() != np) {
    throw InvalidArgument("build_S_minnorm: inconsistent operand sizes");
  }
  if (n < np) throw InvalidArgument("build_S_minnorm: fewer nodes than basis functions");

  SkewSolveReport rep;
  const Mat HL = H.asDiagonal() * L;
  const Mat compat = L.transpose() * H.asDiagonal() * Lder + Lder.transpose() * HL -
                     L.transpose() * E.asDiagonal() * L;
  rep.compatibility_residual = compat.cwiseAbs().maxCoeff();
  if (rep.compatibility_residual > 1e-10) {
    std::ostringstream msg;
    msg << "build_S_minnorm: compatibility residual " << rep.compatibility_residual
        << " exceeds 1e-10; the cubature is not accurate enough for the basis";
    throw ConstructionError(msg.str());
  }

  const Index nunk = n * (n - 1) / 2;
  rep.unknowns = nunk;
  rep.equations = n * np - np * (np + 1) / 2;

  // Row r * np + c of A s = b is entry (r, c) of S L = H L' - E L / 2.
  Mat A = Mat::Zero(n * np, nunk);
  const Mat rhs = H.asDiagonal() * Lder - 0.5 * (E.asDiagonal() * L);
  Vec b(n * np);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < np; ++c) b(r * np + c) = rhs(r, c);

  Vec w_isqrt(nunk);
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      const Index m = packed_lower_index(i, j);
      w_isqrt(m) = 1.0 / std::sqrt(1.0 / (H(i) * H(i)) + 1.0 / (H(j) * H(j)));
      for (Index c = 0; c < np; ++c) {
        A(i * np + c, m) += L(j, c);
        A(j * np + c, m) -= L(i, c);
      }
    }
  }

  const Mat AW = A * w_isqrt.asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;
  cod.setThreshold(1e-12);
  cod.compute(AW);
  rep.rank = cod.rank();
  // Two rounds of iterative refinement; corrections from the same
  // decomposition stay in the row space, so the solution stays minimum-norm.
  Vec y = cod.solve(b);
  for (int it = 0; it < 2; ++it) y += cod.solve(b - AW * y);
  const Vec s = w_isqrt.cwiseProduct(y);

  Mat S = Mat::Zero(n, n);
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      S(i, j) = s(packed_lower_index(i, j));
      S(j, i) = -S(i, j);
    }
  }

  rep.constraint_residual = (S * L - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (report) *report = rep;
  if (rep.constraint_residual > 1e-11 * scale) {
    std::ostringstream msg;
    msg << "build_S_minnorm: accuracy constraints violated, residual "
        << rep.constraint_residual;
    throw ConstructionError(msg.str());
  }
  return S;
}

}  // namespace csbp
