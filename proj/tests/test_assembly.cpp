#include "csbp/assembly.hpp"

#include <doctest.h>

#include <sstream>

using namespace csbp;

namespace {

struct Setup {
  TriMesh mesh;
  SbpTri op;
  MetricData metrics;
  GlobalNumbering num;
  std::vector<ElementOps> ops;
  GlobalOperator glob;
};

Setup affine(const TriMesh& mesh, int p) {
  Setup s;
  s.mesh = mesh;
  s.op = build_sbp_tri(p);
  s.metrics = compute_metrics(build_lagrange_map(mesh, 1), s.op.cubature.nodes);
  s.num = build_global_numbering(mesh, s.op.cubature);
  s.ops = element_operators(s.op, s.metrics);
  s.glob = assemble_global(s.num, s.ops);
  return s;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("shared-node counts") {
    // Two-triangle periodic square: 1 vertex, 3 edges, 2 elements.
    for (int p = 0; p <= 4; ++p) {
      const Setup s = affine(unit_square_periodic_mesh(1), p);
      const Index interior = s.op.size() - 3 - 3 * p;
      CHECK(s.num.n == 1 + 3 * p + 2 * interior);
      CHECK(s.num.multiplicity().sum() == doctest::Approx(double(2 * s.op.size())));
    }
  }

  TEST_CASE("periodic operators") {
    for (int p = 1; p <= 4; ++p) {
      const Setup s = affine(kernel_refine(unit_square_periodic_mesh(1), 1, Kernel::Perturbed), p);
      CHECK(s.glob.H.sum() == doctest::Approx(1.0).epsilon(1e-13));
      const SpMat skew = s.glob.Qx + SpMat(s.glob.Qx.transpose());
      CHECK(Mat(skew).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((s.glob.Dx() * Vec::Ones(s.num.n)).cwiseAbs().maxCoeff() <= 1e-11);
    }
  }

  TEST_CASE("open mesh differentiates linears exactly") {
    for (int p = 1; p <= 4; ++p) {
      const Setup s = affine(unit_square_mesh(2), p);
      const Points xy = global_coordinates(s.num, s.metrics);
      CHECK((s.glob.Dx() * xy.col(0) - Vec::Ones(s.num.n)).cwiseAbs().maxCoeff() <= 1e-11);
      CHECK((s.glob.Dy() * xy.col(0)).cwiseAbs().maxCoeff() <= 1e-11);
      const SpMat sym = s.glob.Qx + SpMat(s.glob.Qx.transpose());
      // Boundary integral of x n_x over the unit square is 1.
      CHECK(xy.col(0).dot(sym * Vec::Ones(s.num.n)) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("element loop matches assembled operators") {
    const Setup s = affine(kernel_refine(unit_square_periodic_mesh(1), 1), 2);
    const Mat u = Mat::Random(s.num.n, 2);
    const Mat Hu = element_loop_apply(s.num, u, [&](Index k, const Mat& uk) -> Mat { return s.ops[k].HJ.asDiagonal() * uk; });
    CHECK((Hu - s.glob.H.asDiagonal() * u).cwiseAbs().maxCoeff() <= 1e-14);
    const Mat Qu = element_loop_apply(s.num, u, [&](Index k, const Mat& uk) -> Mat {
      return s.ops[k].Sx * uk + 0.5 * (s.ops[k].Ex.asDiagonal() * uk);
    });
    CHECK((Qu - s.glob.Qx * u).cwiseAbs().maxCoeff() <= 1e-13);
    const Mat z = element_loop_apply(s.num, u, [&](Index, const Mat& uk) -> Mat { return Mat::Zero(uk.rows(), uk.cols()); });
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(element_loop_apply(s.num, u, [](Index, const Mat&) -> Mat { return Mat::Zero(1, 1); }), InvalidArgument);
  }

  TEST_CASE("triplet output") {
    SpMat A(2, 2);
    A.insert(1, 0) = 2.5;
    std::ostringstream os;
    write_triplets(os, A);
    CHECK(os.str() == "1 0 2.5\n");
  }
}
