#include "csbp/io.hpp"

#include <fstream>
#include <sstream>

namespace csbp {

namespace {

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json rows_json(const Mat& A) {
  Json rows = Json::array();
  for (Index i = 0; i < A.rows(); ++i) rows.push_back(vec_json(A.row(i).transpose()));
  return rows;
}

Json points_json(const Points& P) {
  Json rows = Json::array();
  for (Index i = 0; i < P.rows(); ++i) rows.push_back({P(i, 0), P(i, 1)});
  return rows;
}

Vec json_vec(const Json& j, const char* what, Index n = -1) {
  const auto v = j.at(what).get<std::vector<double>>();
  if (n >= 0 && static_cast<Index>(v.size()) != n)
    throw ConstructionError(std::string("bundle field '") + what + "' has the wrong length");
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

Mat json_rows(const Json& j, const char* what, Index n, Index m) {
  const Json& rows = j.at(what);
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n)
    throw ConstructionError(std::string("bundle field '") + what + "' has the wrong number of rows");
  Mat A(n, m);
  for (Index i = 0; i < n; ++i) {
    const auto r = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Index>(r.size()) != m)
      throw ConstructionError(std::string("bundle field '") + what + "' has a row of the wrong length");
    for (Index k = 0; k < m; ++k) A(i, k) = r[static_cast<std::size_t>(k)];
  }
  return A;
}

Points json_points(const Json& rows) {
  Points P(static_cast<Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    P(static_cast<Index>(i), 0) = rows[i].at(0).get<double>();
    P(static_cast<Index>(i), 1) = rows[i].at(1).get<double>();
  }
  return P;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConstructionError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

}  // namespace

Json sbp1d_to_json(const Sbp1D& op) {
  return {{"p", op.p}, {"n", op.n}, {"nodes", vec_json(op.nodes)}, {"H_diag", vec_json(op.H)},
          {"Q_rows", rows_json(op.Q)}, {"E_diag", vec_json(op.E)}};
}

Sbp1D sbp1d_from_json(const Json& j) {
  return guarded("sbp1d_from_json", [&] {
    Sbp1D op;
    op.p = j.at("p").get<int>();
    op.n = j.at("n").get<int>();
    op.nodes = json_vec(j, "nodes", op.n);
    op.H = json_vec(j, "H_diag", op.n);
    op.E = json_vec(j, "E_diag", op.n);
    op.Q = json_rows(j, "Q_rows", op.n, op.n);
    op.S = 0.5 * (op.Q - op.Q.transpose());
    const Mat sym = op.Q + op.Q.transpose();
    Mat E = op.E.asDiagonal();
    if ((sym - E).cwiseAbs().maxCoeff() > 1e-12) throw ConstructionError("sbp1d_from_json: Q + Q^T != E");
    if ((op.H.array() <= 0.0).any()) throw ConstructionError("sbp1d_from_json: non-positive norm entry");
    return op;
  });
}

Json cubature_to_json(const TriCubature& c) {
  Json faces = Json::array();
  for (const auto& f : c.face_node_ids) faces.push_back(f);
  return {{"p", c.p},
          {"nodes", points_json(c.nodes)},
          {"weights", vec_json(c.weights)},
          {"vertex_ids", c.vertex_ids},
          {"face_node_ids", faces}};
}

TriCubature cubature_from_json(const Json& j) {
  TriCubature c = guarded("cubature_from_json", [&] {
    TriCubature c;
    c.p = j.at("p").get<int>();
    c.nodes = json_points(j.at("nodes"));
    c.weights = json_vec(j, "weights", c.nodes.rows());
    c.vertex_ids = j.at("vertex_ids").get<std::array<int, 3>>();
    for (int f = 0; f < 3; ++f) c.face_node_ids[f] = j.at("face_node_ids").at(f).get<std::vector<int>>();
    return c;
  });
  const std::string why = validate_cubature(c);
  if (!why.empty()) throw ConstructionError("cubature fixture rejected: " + why);
  return c;
}

Json sbp_tri_to_json(const SbpTri& op) {
  Json faces = Json::array();
  for (int f = 0; f < 3; ++f) {
    faces.push_back({{"normal", {op.normals[f].x(), op.normals[f].y()}},
                     {"length", op.face_lengths[f]},
                     {"node_ids", op.cubature.face_node_ids[f]},
                     {"B", vec_json(op.face_rules[f].B)}});
  }
  return {{"p", op.p},
          {"n", op.size()},
          {"nodes", points_json(op.cubature.nodes)},
          {"H_diag", vec_json(op.H)},
          {"Qxi_rows", rows_json(op.Qxi())},
          {"Qeta_rows", rows_json(op.Qeta())},
          {"Exi_diag", vec_json(op.Exi)},
          {"Eeta_diag", vec_json(op.Eeta)},
          {"faces", faces},
          {"cubature", cubature_to_json(op.cubature)}};
}

SbpTri sbp_tri_from_json(const Json& j) {
  SbpTri op = guarded("sbp_tri_from_json", [&] {
    const TriCubature c = cubature_from_json(j.at("cubature"));
    // Basis and face rules come from the stored cubature; the matrices are
    // taken verbatim from the bundle so that verification sees them.
    SbpTri op = build_sbp_tri(c);
    const Index n = c.size();
    if (j.at("n").get<Index>() != n || j.at("p").get<int>() != c.p)
      throw ConstructionError("sbp_tri_from_json: size does not match the cubature");
    op.H = json_vec(j, "H_diag", n);
    op.Exi = json_vec(j, "Exi_diag", n);
    op.Eeta = json_vec(j, "Eeta_diag", n);
    const Mat Qxi = json_rows(j, "Qxi_rows", n, n);
    const Mat Qeta = json_rows(j, "Qeta_rows", n, n);
    op.Sxi = Qxi;
    op.Sxi.diagonal() -= 0.5 * op.Exi;
    op.Seta = Qeta;
    op.Seta.diagonal() -= 0.5 * op.Eeta;
    for (int f = 0; f < 3; ++f) {
      const Json& jf = j.at("faces").at(f);
      if (jf.at("node_ids").get<std::vector<int>>() != c.face_node_ids[f])
        throw ConstructionError("sbp_tri_from_json: face node ids disagree with the cubature");
      op.face_rules[f].B = json_vec(jf, "B", op.face_rules[f].B.size());
    }
    return op;
  });
  const SbpReport rep = verify_sbp(op);
  if (!rep.ok()) throw ConstructionError("operator fixture rejected: " + rep.summary());
  return op;
}

Json mesh_to_json(const TriMesh& mesh, const LagrangeMap* map) {
  Json elements = Json::array(), corners = Json::array(), edges = Json::array(), fwd = Json::array(),
       adj = Json::array(), pairs = Json::array();
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    elements.push_back(mesh.elements[k]);
    Json ck = Json::array();
    for (const Point& c : mesh.corners[k]) ck.push_back({c.x(), c.y()});
    corners.push_back(ck);
    edges.push_back(mesh.elem_edges[k]);
    fwd.push_back(mesh.edge_forward[k]);
    Json ak = Json::array();
    for (const FaceLink& l : mesh.adjacency[k]) ak.push_back({{"elem", l.elem}, {"face", l.face}, {"reversed", l.reversed}});
    adj.push_back(ak);
  }
  for (const auto& [a, b] : mesh.periodic_pairs) pairs.push_back({{a.elem, a.face}, {b.elem, b.face}});
  Json j = {{"vertices", points_json(mesh.vertices)},
            {"elements", elements},
            {"corners", corners},
            {"elem_edges", edges},
            {"edge_forward", fwd},
            {"edge_tags", mesh.edge_tags},
            {"adjacency", adj},
            {"periodic_pairs", pairs},
            {"kernel", mesh.kernel},
            {"split", mesh.split}};
  if (map) {
    Json ctl = Json::array();
    for (const Points& P : map->control) ctl.push_back(points_json(P));
    j["lagrange"] = {{"degree", map->degree}, {"control", ctl}};
  }
  return j;
}

TriMesh mesh_from_json(const Json& j, LagrangeMap* map) {
  TriMesh mesh = guarded("mesh_from_json", [&] {
    TriMesh m;
    m.vertices = json_points(j.at("vertices"));
    m.elements = j.at("elements").get<std::vector<std::array<Index, 3>>>();
    for (const Json& ck : j.at("corners")) {
      std::array<Point, 3> c;
      for (int v = 0; v < 3; ++v) c[v] = Point(ck.at(v).at(0).get<double>(), ck.at(v).at(1).get<double>());
      m.corners.push_back(c);
    }
    m.elem_edges = j.at("elem_edges").get<std::vector<std::array<Index, 3>>>();
    m.edge_forward = j.at("edge_forward").get<std::vector<std::array<bool, 3>>>();
    m.edge_tags = j.at("edge_tags").get<std::vector<std::string>>();
    for (const auto& e : m.elements)
      for (Index v : e)
        if (v < 0 || v >= m.num_vertices()) throw ConstructionError("mesh_from_json: vertex id out of range");
    m.kernel = j.value("kernel", std::string("uniform"));
    m.split = j.value("split", m.split);
    if (map && j.contains("lagrange")) {
      map->degree = j.at("lagrange").at("degree").get<int>();
      map->ref_nodes = lagrange_lattice(map->degree);
      map->control.clear();
      for (const Json& P : j.at("lagrange").at("control")) map->control.push_back(json_points(P));
      if (static_cast<Index>(map->control.size()) != m.num_elements())
        throw ConstructionError("mesh_from_json: one set of control nodes per element required");
    }
    return m;
  });
  finalize_topology(mesh);
  const std::string why = validate_mesh(mesh);
  if (!why.empty()) throw ConstructionError("mesh_from_json: " + why);
  return mesh;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConstructionError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

std::string cubature_fixture_path(int p) {
  return std::string(CSBP_DATA_DIR) + "/cubature/p" + std::to_string(p) + ".json";
}

std::string operator_fixture_path(int p) {
  return std::string(CSBP_DATA_DIR) + "/operators/tri_p" + std::to_string(p) + ".json";
}

}  // namespace csbp
