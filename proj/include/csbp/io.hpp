#pragma once

// JSON serialization of operators, cubature rules and meshes, and the
// fixture files checked into data/. Every loader re-verifies what it reads.

#include "csbp/mesh.hpp"
#include "csbp/ref1d.hpp"
#include "csbp/tri_sbp.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace csbp {

using Json = nlohmann::json;

/// {p, n, nodes, H_diag, Q_rows, E_diag}
Json sbp1d_to_json(const Sbp1D& op);
/// Throws ConstructionError if the bundle is malformed or Q + Q^T != E.
Sbp1D sbp1d_from_json(const Json& j);

/// {p, nodes, weights, vertex_ids, face_node_ids}
Json cubature_to_json(const TriCubature& c);
/// Throws ConstructionError naming the violated condition (validate_cubature).
TriCubature cubature_from_json(const Json& j);

/// The 1D bundle layout with Q and E per direction plus face data
/// {normal, length, node_ids, B} and the cubature.
Json sbp_tri_to_json(const SbpTri& op);
/// Rebuilds the basis from the stored cubature and runs verify_sbp on the
/// stored matrices. Throws ConstructionError with the failed condition.
SbpTri sbp_tri_from_json(const Json& j);

/// Mesh with optional Lagrange map (control nodes).
Json mesh_to_json(const TriMesh& mesh, const LagrangeMap* map = nullptr);
/// Rebuilds adjacency through finalize_topology and checks validate_mesh.
TriMesh mesh_from_json(const Json& j, LagrangeMap* map = nullptr);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// data/cubature/p<p>.json and data/operators/tri_p<p>.json under CSBP_DATA_DIR.
std::string cubature_fixture_path(int p);
std::string operator_fixture_path(int p);

}  // namespace csbp
