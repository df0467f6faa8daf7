#include "csbp/mesh.hpp"
#include "csbp/tri_sbp.hpp"

#include <doctest.h>

#include <cmath>

using namespace csbp;

namespace {

double signed_area(const std::array<Point, 3>& c) {
  const Point a = c[1] - c[0], b = c[2] - c[0];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double mapped_area(const LagrangeMap& map, const SbpTri& op) {
  const MetricData m = compute_metrics(map, op.cubature.nodes);
  return (op.H.transpose() * m.J).sum();
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("periodic unit square") {
    for (int m : {1, 2, 3}) {
      const TriMesh mesh = unit_square_periodic_mesh(m);
      CHECK(validate_mesh(mesh).empty());
      CHECK(mesh.num_elements() == 2 * m * m);
      double area = 0.0;
      for (const auto& c : mesh.corners) area += signed_area(c);
      CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
      for (Index k = 0; k < mesh.num_elements(); ++k)
        for (int f = 0; f < 3; ++f) {
          const FaceLink l = mesh.adjacency[k][f];
          REQUIRE(l.elem >= 0);
          CHECK(mesh.adjacency[l.elem][l.face].elem == k);
          CHECK(mesh.adjacency[l.elem][l.face].face == f);
        }
    }
  }

  TEST_CASE("kernel refinement") {
    const TriMesh seed = unit_square_periodic_mesh(1);
    CHECK(kernel_refine(seed, 0).num_elements() == seed.num_elements());
    for (Kernel kern : {Kernel::Uniform, Kernel::Perturbed})
      for (int lev = 1; lev <= 3; ++lev) {
        const TriMesh m = kernel_refine(seed, lev, kern);
        CHECK(m.num_elements() == seed.num_elements() * static_cast<Index>(std::pow(9, lev)));
        CHECK(validate_mesh(m).empty());
        double area = 0.0;
        for (const auto& c : m.corners) {
          CHECK(signed_area(c) > 0.0);
          area += signed_area(c);
        }
        CHECK(area == doctest::Approx(1.0).epsilon(1e-13));
      }
    CHECK(kernel_h_ref(2) == doctest::Approx(1.0 / 9.0));
    const TriMesh open = unit_square_mesh(2);
    CHECK(validate_mesh(open).empty());
    int boundary = 0;
    for (Index k = 0; k < open.num_elements(); ++k)
      for (int f = 0; f < 3; ++f) boundary += open.is_boundary(k, f);
    CHECK(boundary == 8);
  }

  TEST_CASE("quarter annulus") {
    const auto [mesh, map] = quarter_annulus_mesh(4, 2);
    CHECK(mesh.num_elements() == 32);
    CHECK(validate_mesh(mesh).empty());
    // Polynomial arcs: the area error shrinks quickly under refinement.
    const double e4 = std::abs(mapped_area(map, build_sbp_tri(2)) - 2.0 * M_PI);
    const auto fine = quarter_annulus_mesh(8, 2);
    const double e8 = std::abs(mapped_area(fine.second, build_sbp_tri(2)) - 2.0 * M_PI);
    CHECK(e4 <= 1e-4);
    CHECK(e8 <= e4 / 8);
    int inner = 0;
    for (Index k = 0; k < mesh.num_elements(); ++k)
      for (int f = 0; f < 3; ++f) inner += mesh.is_boundary(k, f) && mesh.face_tag(k, f) == "inner";
    CHECK(inner == 4);
  }

  TEST_CASE("warped periodic mesh") {
    CHECK(warp(Point(0, 0)).norm() == 0.0);
    CHECK(warp(Point(1.0 / 6, 1.0 / 6)).x() == doctest::Approx(1.0 / 6 + 1.0 / 20).epsilon(1e-15));
    for (int p = 1; p <= 4; ++p) {
      const auto [mesh, map] = warped_periodic_mesh(p);
      CHECK(mesh.num_elements() == 72);
      CHECK(validate_mesh(mesh).empty());
      CHECK(mapped_area(map, build_sbp_tri(p)) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("metrics") {
    const SbpTri op = build_sbp_tri(2);
    const TriMesh mesh = unit_square_periodic_mesh(1);
    const LagrangeMap scaled = build_lagrange_map(mesh, 1, [](const Point& x) { return Point(2 * x.x(), 3 * x.y()); });
    const MetricData m = compute_metrics(scaled, op.cubature.nodes);
    // Each reference triangle (area 2) maps onto half of a 2 x 3 rectangle.
    CHECK((m.J.array() - 6.0 / 4.0).abs().maxCoeff() < 1e-13);

    const auto [wmesh, wmap] = warped_periodic_mesh(2);
    const MetricData w = compute_metrics(wmap, op.cubature.nodes);
    Mat V, Vxi;
    const double h = 1e-6;
    for (Index k = 0; k < 5; ++k)
      for (Index i = 0; i < op.size(); ++i) {
        Points pts(2, 2);
        pts.row(0) = op.cubature.nodes.row(i) + Eigen::RowVector2d(h, 0);
        pts.row(1) = op.cubature.nodes.row(i) - Eigen::RowVector2d(h, 0);
        lagrange_basis(wmap.degree, pts, &V);
        const Mat X = V * wmap.control[k];
        CHECK(std::abs((X(0, 0) - X(1, 0)) / (2 * h) - w.x_xi(i, k)) < 1e-6);
        CHECK(w.J(i, k) > 0.0);
      }
  }

  TEST_CASE("lagrange basis is a partition of unity") {
    for (int q = 1; q <= 5; ++q) {
      const Points pts = build_tri_cubature(2).nodes;
      Mat V, Vxi, Veta;
      lagrange_basis(q, pts, &V, &Vxi, &Veta);
      CHECK((V.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK(Vxi.rowwise().sum().cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}
