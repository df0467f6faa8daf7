#include "csbp/lps.hpp"

#include <ostream>
#include <sstream>

namespace csbp {

namespace {

int degree_of_basis(Index np) {
  // n_p = (p + 1)(p + 2) / 2 on triangles, p + 1 in 1D; report the 2D degree
  // when the count is triangular, otherwise the 1D one.
  for (int p = 0; p < 64; ++p)
    if ((p + 1) * (p + 2) / 2 == np) return p;
  return static_cast<int>(np) - 1;
}

}  // namespace

Projector projector_exact(const Mat& L, const Vec& H) {
  if (L.rows() != H.size()) throw InvalidArgument("projector_exact: L and H sizes differ");
  const Mat gram = L.transpose() * H.asDiagonal() * L;
  const double dev = (gram - Mat::Identity(L.cols(), L.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    std::ostringstream msg;
    msg << "projector_exact: L^T H L deviates from I by " << dev;
    throw InvalidArgument(msg.str());
  }
  Projector pr;
  pr.P = Mat::Identity(L.rows(), L.rows()) - L * L.transpose() * H.asDiagonal();
  pr.variant = ProjectorVariant::Exact2p;
  pr.p = degree_of_basis(L.cols());
  return pr;
}

Projector projector_approx(const Mat& L, const Vec& H, double* gram_cond) {
  if (L.rows() != H.size()) throw InvalidArgument("projector_approx: L and H sizes differ");
  const Mat gram = L.transpose() * H.asDiagonal() * L;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-14 * lmax)) throw InvalidArgument("projector_approx: singular Gram matrix");
  if (gram_cond) *gram_cond = lmax / lmin;
  Projector pr;
  pr.P = Mat::Identity(L.rows(), L.rows()) - L * gram.llt().solve(L.transpose() * H.asDiagonal());
  pr.variant = ProjectorVariant::Approx2pMinus1;
  pr.p = degree_of_basis(L.cols());
  return pr;
}

Projector projector_fd(Index n) {
  if (n < 4) throw InvalidArgument("projector_fd: need at least 4 nodes");
  Mat R = Mat::Zero(n, n);
  R(0, 1) = 2.0;
  R(0, 2) = -1.0;
  for (Index i = 1; i + 1 < n; ++i) R(i, i - 1) = R(i, i + 1) = 0.5;
  R(n - 1, n - 2) = 2.0;
  R(n - 1, n - 3) = -1.0;
  Projector pr;
  pr.P = Mat::Identity(n, n) - R;
  pr.variant = ProjectorVariant::FdReconstruction;
  pr.p = 1;
  return pr;
}

LpsMatrix lps_matrix(const Projector& pr, const Vec& H, const Mat& A, std::string scaling_desc) {
  const Index n = pr.P.rows();
  if (H.size() != n || A.rows() != n || A.cols() != n)
    throw InvalidArgument("lps_matrix: size mismatch");
  const Mat HA = H.asDiagonal() * A;
  const double scale = std::max(1.0, HA.cwiseAbs().maxCoeff());
  if ((HA - HA.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("lps_matrix: H A is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (HA + HA.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale)
    throw InvalidArgument("lps_matrix: H A is not positive semi-definite");
  LpsMatrix out;
  out.M = pr.P.transpose() * HA * pr.P;
  out.M = 0.5 * (out.M + out.M.transpose());
  out.scaling_desc = std::move(scaling_desc);
  return out;
}

Mat derivative_dissipation_tri(const SbpTri& op, int s, const Vec& Axi, const Vec& Aeta) {
  if (s != op.p + 1) throw InvalidArgument("derivative_dissipation_tri: s must equal p + 1");
  const Index n = op.size();
  Mat Dxs = Mat::Identity(n, n), Dys = Mat::Identity(n, n);
  const Mat Dx = op.Dxi(), Dy = op.Deta();
  for (int k = 0; k < s; ++k) {
    Dxs = Dx * Dxs;
    Dys = Dy * Dys;
  }
  Mat Dis = Dxs.transpose() * (op.H.cwiseProduct(Axi)).asDiagonal() * Dxs +
            Dys.transpose() * (op.H.cwiseProduct(Aeta)).asDiagonal() * Dys;
  return 0.5 * (Dis + Dis.transpose());
}

Spectrum dissipation_spectrum(const Mat& M, const Vec& H) {
  // H^{-1} M is similar to the symmetric H^{-1/2} M H^{-1/2}.
  const Vec hs = H.cwiseSqrt().cwiseInverse();
  const Mat B = hs.asDiagonal() * M * hs.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  Spectrum s;
  s.eigenvalues = es.eigenvalues();
  const double lmax = s.eigenvalues.cwiseAbs().maxCoeff();
  double lmin_nz = 0.0;
  for (Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double l = s.eigenvalues(i);
    if (std::abs(l) <= 1e-10 * lmax) {
      ++s.zero_count;
    } else if (lmin_nz == 0.0 || l < lmin_nz) {
      lmin_nz = l;
    }
  }
  s.ratio = lmin_nz > 0.0 ? s.eigenvalues.maxCoeff() / lmin_nz : 0.0;
  return s;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,eigenvalue\n";
  os.precision(17);
  for (Index i = 0; i < s.eigenvalues.size(); ++i) os << i << ',' << s.eigenvalues(i) << '\n';
}

}  // namespace csbp
