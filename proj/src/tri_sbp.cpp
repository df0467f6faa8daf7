#include "csbp/tri_sbp.hpp"

#include "csbp/ref1d.hpp"

#include <cmath>
#include <sstream>

namespace csbp {

double jacobi(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0;
  double p0 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
  for (int k = 2; k <= n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    const double a1 = 2.0 * k * (k + alpha + beta) * (s - 2.0);
    const double a2 = (s - 1.0) * (alpha * alpha - beta * beta);
    const double a3 = (s - 2.0) * (s - 1.0) * s;
    const double a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
    const double p1 = ((a2 + a3 * x) * p0 - a4 * pm1) / a1;
    pm1 = p0;
    p0 = p1;
  }
  return p0;
}

namespace {

double jacobi_derivative(int n, double alpha, double beta, double x) {
  if (n == 0) return 0.0;
  return 0.5 * (n + alpha + beta + 1.0) * jacobi(n - 1, alpha + 1.0, beta + 1.0, x);
}

}  // namespace

void PkdBasis::evaluate_raw(const Points& pts, Mat* values, Mat* dxi, Mat* deta) const {
  const Index npts = pts.rows();
  const Index nb = size();
  if (values) values->resize(npts, nb);
  if (dxi) dxi->resize(npts, nb);
  if (deta) deta->resize(npts, nb);
  std::vector<double> f(p_ + 1), fx(p_ + 1), fy(p_ + 1);
  for (Index r = 0; r < npts; ++r) {
    const double xi = pts(r, 0), eta = pts(r, 1);
    // f_i = t^i P_i(a) with t = (1 - eta) / 2 and a t = 1 + xi - t, written
    // as a recurrence free of the collapsed-coordinate singularity at eta = 1.
    const double t = 0.5 * (1.0 - eta), at = 1.0 + xi - t;
    const double t_y = -0.5, at_x = 1.0, at_y = 0.5;
    f[0] = 1.0;
    fx[0] = fy[0] = 0.0;
    if (p_ >= 1) {
      f[1] = at;
      fx[1] = at_x;
      fy[1] = at_y;
    }
    for (int k = 1; k < p_; ++k) {
      const double c1 = (2.0 * k + 1.0) / (k + 1.0), c2 = k / (k + 1.0);
      f[k + 1] = c1 * at * f[k] - c2 * t * t * f[k - 1];
      fx[k + 1] = c1 * (at_x * f[k] + at * fx[k]) - c2 * t * t * fx[k - 1];
      fy[k + 1] = c1 * (at_y * f[k] + at * fy[k]) - c2 * (2.0 * t * t_y * f[k - 1] + t * t * fy[k - 1]);
    }
    Index col = 0;
    for (int deg = 0; deg <= p_; ++deg) {
      for (int i = deg; i >= 0; --i) {
        const int j = deg - i;
        const double g = jacobi(j, 2.0 * i + 1.0, 0.0, eta);
        const double gy = jacobi_derivative(j, 2.0 * i + 1.0, 0.0, eta);
        if (values) (*values)(r, col) = f[i] * g;
        if (dxi) (*dxi)(r, col) = fx[i] * g;
        if (deta) (*deta)(r, col) = fy[i] * g + f[i] * gy;
        ++col;
      }
    }
  }
}

PkdBasis::PkdBasis(const TriCubature& c, int p) : p_(p) {
  if (p < 0) throw InvalidArgument("PkdBasis: negative degree");
  Mat raw;
  evaluate_raw(c.nodes, &raw, nullptr, nullptr);
  const Mat gram = raw.transpose() * c.weights.asDiagonal() * raw;
  const Vec scale = gram.diagonal().cwiseSqrt().cwiseInverse();
  const Mat normalized = scale.asDiagonal() * gram * scale.asDiagonal();
  const double dev = (normalized - Mat::Identity(size(), size())).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    std::ostringstream msg;
    msg << "PkdBasis: Gram matrix deviates from identity by " << dev
        << "; cubature is not 2p exact";
    throw ConstructionError(msg.str());
  }
  // correction = scale * chol^{-T} so that the corrected Gram is exactly I.
  Eigen::LLT<Mat> llt(normalized);
  const Mat Linv_t = llt.matrixL().solve(Mat::Identity(size(), size())).transpose();
  correction_ = scale.asDiagonal() * Linv_t;
  evaluate(c.nodes, &L, &Lxi, &Leta);
}

void PkdBasis::evaluate(const Points& pts, Mat* values, Mat* dxi, Mat* deta) const {
  Mat v, x, y;
  evaluate_raw(pts, values ? &v : nullptr, dxi ? &x : nullptr, deta ? &y : nullptr);
  if (values) *values = v * correction_;
  if (dxi) *dxi = x * correction_;
  if (deta) *deta = y * correction_;
}

PkdBasis pkd_basis(const TriCubature& c, int p) { return PkdBasis(c, p); }

Point reference_face_normal(int f) {
  const auto& v = reference_vertices();
  const Point t = v[kFaceVertices[f][1]] - v[kFaceVertices[f][0]];
  return Point(t.y(), -t.x()).normalized();
}

double reference_face_length(int f) {
  const auto& v = reference_vertices();
  return (v[kFaceVertices[f][1]] - v[kFaceVertices[f][0]]).norm();
}

Vec build_E(const TriCubature& c, Direction dir) {
  Vec E = Vec::Zero(c.size());
  for (int f = 0; f < 3; ++f) {
    const Point n = reference_face_normal(f);
    const double nd = dir == Direction::Xi ? n.x() : n.y();
    const FaceRule rule = face_rule(c.p, reference_face_length(f));
    const auto& ids = c.face_node_ids[f];
    if (static_cast<Index>(ids.size()) != rule.B.size())
      throw InvalidArgument("build_E: face node count does not match the face rule");
    for (std::size_t i = 0; i < ids.size(); ++i) E(ids[i]) += nd * rule.B(static_cast<Index>(i));
  }
  return E;
}

Mat SbpTri::Qxi() const {
  Mat Q = Sxi;
  Q.diagonal() += 0.5 * Exi;
  return Q;
}

Mat SbpTri::Qeta() const {
  Mat Q = Seta;
  Q.diagonal() += 0.5 * Eeta;
  return Q;
}

Mat SbpTri::Dxi() const { return H.cwiseInverse().asDiagonal() * Qxi(); }
Mat SbpTri::Deta() const { return H.cwiseInverse().asDiagonal() * Qeta(); }

SbpTri build_sbp_tri(const TriCubature& c) {
  SbpTri op;
  op.p = c.p;
  op.cubature = c;
  op.basis = PkdBasis(c, c.p);
  op.H = c.weights;
  op.Exi = build_E(c, Direction::Xi);
  op.Eeta = build_E(c, Direction::Eta);
  op.Sxi = build_S_minnorm(op.H, op.Exi, op.basis.L, op.basis.Lxi);
  op.Seta = build_S_minnorm(op.H, op.Eeta, op.basis.L, op.basis.Leta);
  for (int f = 0; f < 3; ++f) {
    op.normals[f] = reference_face_normal(f);
    op.face_lengths[f] = reference_face_length(f);
    op.face_rules[f] = face_rule(c.p, op.face_lengths[f]);
  }
  return op;
}

SbpTri build_sbp_tri(int p) {
  if (p < 0 || p > 4) throw InvalidArgument("build_sbp_tri: degree must be in 0..4");
  return build_sbp_tri(build_tri_cubature(p));
}

std::string SbpReport::summary() const {
  std::ostringstream s;
  s << "accuracy " << (accuracy_ok ? "PASS" : "FAIL") << " (residual " << accuracy_residual
    << "), norm " << (norm_ok ? "PASS" : "FAIL") << " (min H " << min_H << "), decomposition "
    << (decomposition_ok ? "PASS" : "FAIL") << " (skew " << skew_residual << ", boundary "
    << boundary_residual << ")";
  return s.str();
}

SbpReport verify_sbp(const SbpTri& op) {
  SbpReport rep;
  const TriCubature& c = op.cubature;
  const Index n = op.size();

  // Condition 1: exact differentiation of monomials of total degree <= p.
  const Mat Dx = op.Dxi(), Dy = op.Deta();
  for (int a = 0; a <= op.p; ++a) {
    for (int b = 0; a + b <= op.p; ++b) {
      Vec v(n), vx(n), vy(n);
      for (Index i = 0; i < n; ++i) {
        const double x = c.nodes(i, 0), y = c.nodes(i, 1);
        v(i) = std::pow(x, a) * std::pow(y, b);
        vx(i) = a == 0 ? 0.0 : a * std::pow(x, a - 1) * std::pow(y, b);
        vy(i) = b == 0 ? 0.0 : b * std::pow(x, a) * std::pow(y, b - 1);
      }
      const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
      rep.accuracy_residual =
          std::max({rep.accuracy_residual, (Dx * v - vx).cwiseAbs().maxCoeff() / scale,
                    (Dy * v - vy).cwiseAbs().maxCoeff() / scale});
    }
  }
  rep.accuracy_ok = rep.accuracy_residual <= 1e-11;

  // Condition 2.
  rep.min_H = op.H.minCoeff();
  rep.norm_ok = rep.min_H > 0.0;

  // Condition 3: skew S, and E reproducing boundary integrals of degree-p
  // products, checked against a higher-order LGL rule on each face.
  rep.skew_residual = std::max((op.Sxi + op.Sxi.transpose()).cwiseAbs().maxCoeff(),
                               (op.Seta + op.Seta.transpose()).cwiseAbs().maxCoeff());
  const Lgl1D fine = lgl_rule(op.p + 6);
  const auto& v = reference_vertices();
  const Index nb = op.basis.size();
  Mat bx = Mat::Zero(nb, nb), by = Mat::Zero(nb, nb);
  for (int f = 0; f < 3; ++f) {
    const Point a = v[kFaceVertices[f][0]], b = v[kFaceVertices[f][1]];
    Points pts(fine.n, 2);
    for (int q = 0; q < fine.n; ++q)
      pts.row(q) = (a + 0.5 * (fine.nodes(q) + 1.0) * (b - a)).transpose();
    Mat vals;
    op.basis.evaluate(pts, &vals);
    const Vec w = 0.5 * reference_face_length(f) * fine.weights;
    const Mat prod = vals.transpose() * w.asDiagonal() * vals;
    const Point nrm = reference_face_normal(f);
    bx += nrm.x() * prod;
    by += nrm.y() * prod;
  }
  const Mat& L = op.basis.L;
  rep.boundary_residual =
      std::max((L.transpose() * op.Exi.asDiagonal() * L - bx).cwiseAbs().maxCoeff(),
               (L.transpose() * op.Eeta.asDiagonal() * L - by).cwiseAbs().maxCoeff());
  rep.decomposition_ok = rep.skew_residual <= 1e-13 && rep.boundary_residual <= 1e-12;
  return rep;
}

}  // namespace csbp
