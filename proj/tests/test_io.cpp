#include "csbp/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace csbp;

TEST_SUITE("io") {
  TEST_CASE("sbp 1d round trip") {
    const Sbp1D op = build_sbp_1d(3, 5);
    const Sbp1D back = sbp1d_from_json(Json::parse(sbp1d_to_json(op).dump()));
    CHECK((back.Q - op.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.H - op.H).cwiseAbs().maxCoeff() == 0.0);
    Json bad = sbp1d_to_json(op);
    bad["Q_rows"][0][0] = 1.0;
    CHECK_THROWS_AS(sbp1d_from_json(bad), ConstructionError);
  }

  TEST_CASE("triangle operator round trip and fixtures") {
    for (int p = 0; p <= 4; ++p) {
      CAPTURE(p);
      const SbpTri op = build_sbp_tri(p);
      const SbpTri back = sbp_tri_from_json(Json::parse(sbp_tri_to_json(op).dump()));
      CHECK((back.Qxi() - op.Qxi()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.Qeta() - op.Qeta()).cwiseAbs().maxCoeff() == 0.0);
      const SbpTri fix = sbp_tri_from_json(read_json_file(operator_fixture_path(p)));
      CHECK((fix.Qxi() - op.Qxi()).cwiseAbs().maxCoeff() <= 1e-12);
      const TriCubature c = cubature_from_json(read_json_file(cubature_fixture_path(p)));
      CHECK((c.nodes - op.cubature.nodes).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }

  TEST_CASE("tampered fixtures are rejected") {
    Json j = read_json_file(operator_fixture_path(2));
    j["Qxi_rows"][3][4] = j["Qxi_rows"][3][4].get<double>() + 1e-3;
    CHECK_THROWS_WITH_AS(sbp_tri_from_json(j), doctest::Contains("operator fixture rejected"), ConstructionError);
    j = read_json_file(operator_fixture_path(2));
    j["H_diag"][0] = -1.0;
    CHECK_THROWS_WITH_AS(sbp_tri_from_json(j), doctest::Contains("norm FAIL"), ConstructionError);
    Json c = read_json_file(cubature_fixture_path(3));
    c["weights"][2] = c["weights"][2].get<double>() * 1.01;
    CHECK_THROWS_WITH_AS(cubature_from_json(c), doctest::Contains("cubature fixture rejected"), ConstructionError);
    Json m = cubature_to_json(build_tri_cubature(1));
    m.erase("weights");
    CHECK_THROWS_AS(cubature_from_json(m), ConstructionError);
    CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), Error);
  }

  TEST_CASE("mesh round trip") {
    const auto [mesh, map] = warped_periodic_mesh(2);
    LagrangeMap back_map;
    const TriMesh back = mesh_from_json(Json::parse(mesh_to_json(mesh, &map).dump()), &back_map);
    CHECK(back.num_elements() == mesh.num_elements());
    CHECK(back.edge_tags == mesh.edge_tags);
    CHECK(back.periodic_pairs.size() == mesh.periodic_pairs.size());
    REQUIRE(back_map.control.size() == map.control.size());
    CHECK((back_map.control[7] - map.control[7]).cwiseAbs().maxCoeff() == 0.0);
    Json bad = mesh_to_json(mesh);
    bad["elements"][0][0] = 10000;
    CHECK_THROWS(mesh_from_json(bad));
  }

  TEST_CASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "csbp_io_test.json";
    write_json_file(path.string(), cubature_to_json(build_tri_cubature(2)));
    CHECK(cubature_from_json(read_json_file(path.string())).size() == build_tri_cubature(2).size());
    std::filesystem::remove(path);
  }
}
