#include "csbp/ref1d.hpp"

#include "csbp/skew_solve.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace csbp {

std::pair<double, double> legendre(int k, double x) {
  if (k == 0) return {1.0, 0.0};
  double pm1 = 1.0, p0 = x;
  double dm1 = 0.0, d0 = 1.0;
  for (int j = 1; j < k; ++j) {
    const double p1 = ((2 * j + 1) * x * p0 - j * pm1) / (j + 1);
    const double d1 = dm1 + (2 * j + 1) * p0;
    pm1 = p0;
    p0 = p1;
    dm1 = d0;
    d0 = d1;
  }
  return {p0, d0};
}

namespace {

// P_k'' from the Legendre ODE (1 - x^2) P'' = 2 x P' - k (k + 1) P.
double legendre_second(int k, double x, double P, double dP) {
  return (2.0 * x * dP - k * (k + 1.0) * P) / (1.0 - x * x);
}

// Interior LGL node: root of P'_{n-1} bracketed in (lo, hi), starting at x0.
double lgl_interior_root(int k, double x0, double lo, double hi) {
  double x = x0;
  for (int it = 0; it < 100; ++it) {
    const auto [P, dP] = legendre(k, x);
    const double step = dP / legendre_second(k, x, P, dP);
    x -= step;
    if (std::abs(step) < 1e-15) return x;
  }
  // Bisection fallback on P'_k.
  double flo = legendre(k, lo).second;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = legendre(k, mid).second;
    if ((fmid < 0) == (flo < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) return 0.5 * (lo + hi);
  }
  throw ConstructionError("lgl_rule: interior node iteration did not converge");
}

}  // namespace

Lgl1D lgl_rule(int n) {
  if (n < 2) throw InvalidArgument("lgl_rule: need at least 2 nodes");
  Lgl1D rule;
  rule.n = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int k = n - 1;
  rule.nodes(0) = -1.0;
  rule.nodes(n - 1) = 1.0;
  // Chebyshev-Gauss-Lobatto points interlace the LGL points closely; brackets
  // come from the midpoints between neighbouring guesses.
  for (int i = 1; i < n - 1; ++i) {
    const double guess = -std::cos(std::numbers::pi * i / k);
    const double lo = -std::cos(std::numbers::pi * (i - 0.5) / k);
    const double hi = -std::cos(std::numbers::pi * (i + 0.5) / k);
    rule.nodes(i) = lgl_interior_root(k, guess, lo, hi);
  }
  // Exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (rule.nodes(n - 1 - i) - rule.nodes(i));
    rule.nodes(i) = -a;
    rule.nodes(n - 1 - i) = a;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  for (int i = 0; i < n; ++i) {
    const double P = legendre(k, rule.nodes(i)).first;
    rule.weights(i) = 2.0 / (n * (n - 1.0) * P * P);
  }
  // Verify degree 2n-3 accuracy against monomial moments.
  for (int q = 0; q <= 2 * n - 3; ++q) {
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += rule.weights(i) * std::pow(rule.nodes(i), q);
    const double exact = (q % 2 == 0) ? 2.0 / (q + 1) : 0.0;
    if (std::abs(quad - exact) > 1e-13) {
      std::ostringstream msg;
      msg << "lgl_rule(" << n << "): moment " << q << " off by " << quad - exact;
      throw ConstructionError(msg.str());
    }
  }
  return rule;
}

Vandermonde1D legendre_vandermonde(int p, const Vec& nodes, const Vec& H) {
  if (p < 0) throw InvalidArgument("legendre_vandermonde: negative degree");
  Vandermonde1D V;
  V.p = p;
  const Index n = nodes.size();
  V.L.resize(n, p + 1);
  V.Lp.resize(n, p + 1);
  for (int j = 0; j <= p; ++j) {
    const double scale = std::sqrt((2.0 * j + 1.0) / 2.0);
    for (Index i = 0; i < n; ++i) {
      const auto [P, dP] = legendre(j, nodes(i));
      V.L(i, j) = scale * P;
      V.Lp(i, j) = scale * dP;
    }
  }
  if (H.size() == n) {
    const Mat gram = V.L.transpose() * H.asDiagonal() * V.L;
    const double dev = (gram - Mat::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff();
    if (dev > 1e-12) {
      std::ostringstream msg;
      msg << "legendre_vandermonde: L^T H L deviates from I by " << dev
          << "; quadrature is not 2p exact";
      throw ConstructionError(msg.str());
    }
  }
  return V;
}

Sbp1D build_sbp_1d(int p, int n) {
  if (p < 0) throw InvalidArgument("build_sbp_1d: negative degree");
  if (n < p + 1) throw InvalidArgument("build_sbp_1d: need n >= p + 1 nodes");
  const Lgl1D rule = lgl_rule(n);
  Sbp1D op;
  op.p = p;
  op.n = n;
  op.nodes = rule.nodes;
  op.H = rule.weights;
  op.E = Vec::Zero(n);
  op.E(0) = -1.0;
  op.E(n - 1) = 1.0;
  const Vandermonde1D V = legendre_vandermonde(p, rule.nodes);
  op.S = build_S_minnorm(op.H, op.E, V.L, V.Lp);
  op.Q = op.S;
  op.Q.diagonal() += 0.5 * op.E;
  return op;
}

Dissipation1D derivative_dissipation_1d(const Sbp1D& op, int s, const Vec& A) {
  if (s < 1) throw InvalidArgument("derivative_dissipation_1d: s must be positive");
  if (A.size() != op.n || (A.array() < 0.0).any())
    throw InvalidArgument("derivative_dissipation_1d: A must be a nonnegative diagonal");
  const Mat D = op.D();
  Mat Ds = D;
  for (int k = 1; k < s; ++k) Ds = D * Ds;
  Dissipation1D out;
  out.matrix = Ds.transpose() * (op.H.cwiseProduct(A)).asDiagonal() * Ds;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.trivial = op.n < s + 1;
  return out;
}

Mat lps_dissipation_1d(const Sbp1D& op, const Vandermonde1D& V, const Vec& A) {
  if (A.size() != op.n) throw InvalidArgument("lps_dissipation_1d: A has the wrong size");
  const Mat gram = V.L.transpose() * op.H.asDiagonal() * V.L;
  if ((gram - Mat::Identity(V.p + 1, V.p + 1)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("lps_dissipation_1d: quadrature is not 2p exact (L^T H L != I)");
  const Mat P = Mat::Identity(op.n, op.n) - V.L * V.L.transpose() * op.H.asDiagonal();
  Mat M = P.transpose() * (op.H.cwiseProduct(A)).asDiagonal() * P;
  return 0.5 * (M + M.transpose());
}

namespace {

struct RankOne {
  double lambda;
  Vec m;
};

RankOne rank_one_factor(const Mat& A, const char* name) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  const Vec& ev = eig.eigenvalues();
  const Index n = ev.size();
  const double top = ev(n - 1);
  const double second = std::max(std::abs(ev(0)), n > 1 ? std::abs(ev(n - 2)) : 0.0);
  if (!(top > 0.0) || second > 1e-10 * top) {
    std::ostringstream msg;
    msg << "rank_one_equivalence: " << name << " is not rank one (eigenvalues " << ev.transpose()
        << ")";
    throw ConstructionError(msg.str());
  }
  Vec m = eig.eigenvectors().col(n - 1);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(m(i)) > 1e-12) {
      if (m(i) < 0) m = -m;
      break;
    }
  }
  return {top, m};
}

}  // namespace

RankOneEquivalence rank_one_equivalence(const Mat& Dis, const Mat& M) {
  if (Dis.rows() != M.rows() || Dis.cols() != M.cols())
    throw InvalidArgument("rank_one_equivalence: size mismatch");
  const RankOne d = rank_one_factor(Dis, "Dis");
  const RankOne p = rank_one_factor(M, "M");
  if ((d.m - p.m).cwiseAbs().maxCoeff() > 1e-10)
    throw ConstructionError("rank_one_equivalence: eigenvectors differ");
  RankOneEquivalence out;
  out.m = p.m;
  out.lambda_D = d.lambda;
  out.lambda_P = p.lambda;
  out.alpha = d.lambda / p.lambda;
  return out;
}

}  // namespace csbp
