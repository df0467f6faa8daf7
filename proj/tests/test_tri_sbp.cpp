#include "csbp/lps.hpp"
#include "csbp/tri_sbp.hpp"

#include <doctest.h>

#include <cmath>

using namespace csbp;

TEST_SUITE("tri_sbp") {
  TEST_CASE("basis") {
    for (int p = 0; p <= 4; ++p) {
      const TriCubature c = build_tri_cubature(p);
      const PkdBasis b = pkd_basis(c, p);
      CHECK((b.L.col(0).array() - 1.0 / std::sqrt(kReferenceArea)).abs().maxCoeff() < 1e-13);
      CHECK((b.L.transpose() * c.weights.asDiagonal() * b.L - Mat::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() <
            1e-12);
      CHECK(b.Lxi.col(0).cwiseAbs().maxCoeff() < 1e-13);
    }
  }

  TEST_CASE("boundary operator") {
    for (int p = 0; p <= 4; ++p) {
      const TriCubature c = build_tri_cubature(p);
      const Vec Exi = build_E(c, Direction::Xi), Eeta = build_E(c, Direction::Eta);
      CHECK(std::abs(Exi.sum()) < 1e-14);
      CHECK(std::abs(Eeta.sum()) < 1e-14);
      std::vector<bool> on_face(c.size(), false);
      for (const auto& f : c.face_node_ids)
        for (int i : f) on_face[i] = true;
      for (Index i = 0; i < c.size(); ++i)
        if (!on_face[i]) CHECK((Exi(i) == 0.0 && Eeta(i) == 0.0));
    }
  }

  TEST_CASE("operators satisfy the SBP definition") {
    for (int p = 0; p <= 4; ++p) {
      CAPTURE(p);
      const SbpTri op = build_sbp_tri(p);
      const SbpReport r = verify_sbp(op);
      CHECK(r.ok());
      CHECK(r.accuracy_residual <= 1e-11);
      CHECK(r.boundary_residual <= 1e-11);
      CHECK((op.Sxi + op.Sxi.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Mat Ex = op.Exi.asDiagonal();
      CHECK((op.Qxi() + op.Qxi().transpose() - Ex).cwiseAbs().maxCoeff() < 1e-13);
      const Vec xi = op.cubature.nodes.col(0), eta = op.cubature.nodes.col(1);
      CHECK((op.Dxi() * Vec::Ones(op.size())).cwiseAbs().maxCoeff() < 1e-12);
      if (p >= 1) CHECK((op.Dxi() * xi - Vec::Ones(op.size())).cwiseAbs().maxCoeff() < 1e-12);
      if (p >= 2) CHECK((op.Dxi() * xi.cwiseProduct(eta) - eta).cwiseAbs().maxCoeff() < 1e-12);
      if (p >= 2) CHECK((op.Deta() * xi.cwiseProduct(eta) - xi).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(build_sbp_tri(5), InvalidArgument);
  }

  TEST_CASE("skew solve diagnostics") {
    const TriCubature c = build_tri_cubature(4);
    const PkdBasis b = pkd_basis(c, 4);
    SkewSolveReport rep;
    const Mat S = build_S_minnorm(c.weights, build_E(c, Direction::Xi), b.L, b.Lxi, &rep);
    CHECK(rep.compatibility_residual <= 1e-12);
    CHECK(rep.constraint_residual <= 1e-12);
    CHECK((S + S.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("verification flags injected faults") {
    SbpTri op = build_sbp_tri(2);
    op.H(3) = -op.H(3);
    CHECK_FALSE(verify_sbp(op).norm_ok);
    op = build_sbp_tri(2);
    op.Sxi(0, 1) = op.Sxi(1, 0);
    CHECK_FALSE(verify_sbp(op).decomposition_ok);
  }

  TEST_CASE("p=0 derivative dissipation ratio") {
    // One free skew entry per direction; the minimum-norm member gives 7/3.
    SbpTri op = build_sbp_tri(0);
    const Vec ones = Vec::Ones(3);
    const Spectrum s = dissipation_spectrum(derivative_dissipation_tri(op, 1, ones, ones), op.H);
    CHECK(s.ratio == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    // The member with no coupling across the hypotenuse (vertices 1 and 2)
    // reproduces the printed 3.00.
    Mat K(3, 3);
    K << 0, 1, -1, -1, 0, 1, 1, -1, 0;
    const int a = op.cubature.vertex_ids[1], b = op.cubature.vertex_ids[2];
    op.Sxi -= op.Sxi(a, b) / K(a, b) * K;
    op.Seta -= op.Seta(a, b) / K(a, b) * K;
    REQUIRE(verify_sbp(op).ok());
    const Spectrum s3 = dissipation_spectrum(derivative_dissipation_tri(op, 1, ones, ones), op.H);
    CHECK(s3.ratio == doctest::Approx(3.0).epsilon(1e-12));
  }
}
