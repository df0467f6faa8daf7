#include "csbp/mesh.hpp"

#include "csbp/tri_cubature.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace csbp {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

// Structured nx x ny quad grid over parameter points param(i, j), split along
// the (i, j) -> (i+1, j+1) diagonal. Edge ids: horizontal, vertical, diagonal.
TriMesh structured_mesh(int nx, int ny, bool periodic,
                        const std::function<Point(int, int)>& param,
                        const std::function<std::string(char, int, int)>& boundary_tag) {
  if (nx < 1 || ny < 1) throw InvalidArgument("structured_mesh: need at least one cell");
  TriMesh m;
  const int vx = periodic ? nx : nx + 1, vy = periodic ? ny : ny + 1;
  auto vid = [&](int i, int j) -> Index {
    if (periodic) {
      i %= nx;
      j %= ny;
    }
    return static_cast<Index>(j) * vx + i;
  };
  m.vertices.resize(static_cast<Index>(vx) * vy, 2);
  for (int j = 0; j < vy; ++j)
    for (int i = 0; i < vx; ++i) m.vertices.row(vid(i, j)) = param(i, j).transpose();

  // Canonical directions: h(i,j): (i,j)->(i+1,j); v(i,j): (i,j)->(i,j+1);
  // d(i,j): (i,j)->(i+1,j+1).
  const int hx = nx, hy = periodic ? ny : ny + 1;
  const int wx = periodic ? nx : nx + 1, wy = ny;
  auto hid = [&](int i, int j) -> Index {
    if (periodic) j %= ny;
    return static_cast<Index>(j) * hx + i;
  };
  auto vid_e = [&](int i, int j) -> Index {
    if (periodic) i %= nx;
    return static_cast<Index>(hx) * hy + static_cast<Index>(j) * wx + i;
  };
  auto did = [&](int i, int j) -> Index {
    return static_cast<Index>(hx) * hy + static_cast<Index>(wx) * wy + static_cast<Index>(j) * nx + i;
  };
  const Index nedges = static_cast<Index>(hx) * hy + static_cast<Index>(wx) * wy + static_cast<Index>(nx) * ny;
  m.edge_tags.assign(nedges, "");
  if (periodic) {
    for (int i = 0; i < nx; ++i) m.edge_tags[hid(i, 0)] = "periodic";
    for (int j = 0; j < ny; ++j) m.edge_tags[vid_e(0, j)] = "periodic";
  } else {
    for (int i = 0; i < nx; ++i) {
      m.edge_tags[hid(i, 0)] = boundary_tag('h', i, 0);
      m.edge_tags[hid(i, ny)] = boundary_tag('h', i, ny);
    }
    for (int j = 0; j < ny; ++j) {
      m.edge_tags[vid_e(0, j)] = boundary_tag('v', 0, j);
      m.edge_tags[vid_e(nx, j)] = boundary_tag('v', nx, j);
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point p00 = param(i, j), p10 = param(i + 1, j), p11 = param(i + 1, j + 1),
                  p01 = param(i, j + 1);
      // Lower triangle (i,j), (i+1,j), (i+1,j+1).
      m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.corners.push_back({p00, p10, p11});
      m.elem_edges.push_back({hid(i, j), vid_e(i + 1, j), did(i, j)});
      m.edge_forward.push_back({true, true, false});
      // Upper triangle (i,j), (i+1,j+1), (i,j+1).
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      m.corners.push_back({p00, p11, p01});
      m.elem_edges.push_back({did(i, j), hid(i, j + 1), vid_e(i, j)});
      m.edge_forward.push_back({true, false, false});
    }
  }
  finalize_topology(m);
  return m;
}

}  // namespace

void finalize_topology(TriMesh& m) {
  const Index K = m.num_elements();
  std::vector<std::vector<FaceRef>> uses(m.num_edges());
  for (Index k = 0; k < K; ++k) {
    const auto& c = m.corners[k];
    if (!(signed_area(c[0], c[1], c[2]) > 0.0)) {
      std::ostringstream msg;
      msg << "finalize_topology: element " << k << " is not counter-clockwise";
      throw ConstructionError(msg.str());
    }
    for (int f = 0; f < 3; ++f) uses.at(m.elem_edges[k][f]).push_back({k, f});
  }
  m.adjacency.assign(K, {});
  m.periodic_pairs.clear();
  for (Index e = 0; e < m.num_edges(); ++e) {
    const auto& u = uses[e];
    const bool boundary = !m.edge_tags[e].empty() && m.edge_tags[e] != "periodic";
    if (u.size() == 1 && boundary) continue;
    if (u.size() != 2 || boundary) {
      std::ostringstream msg;
      msg << "finalize_topology: edge " << e << " has " << u.size() << " faces (tag '"
          << m.edge_tags[e] << "')";
      throw ConstructionError(msg.str());
    }
    const bool fa = m.edge_forward[u[0].elem][u[0].face], fb = m.edge_forward[u[1].elem][u[1].face];
    if (fa == fb) throw ConstructionError("finalize_topology: inconsistent orientation across an edge");
    m.adjacency[u[0].elem][u[0].face] = {u[1].elem, u[1].face, true};
    m.adjacency[u[1].elem][u[1].face] = {u[0].elem, u[0].face, true};
    if (m.edge_tags[e] == "periodic") m.periodic_pairs.push_back({u[0], u[1]});
  }
  const std::string why = validate_mesh(m);
  if (!why.empty()) throw ConstructionError("finalize_topology: " + why);
}

std::string validate_mesh(const TriMesh& m) {
  const Index K = m.num_elements();
  if (static_cast<Index>(m.corners.size()) != K || static_cast<Index>(m.elem_edges.size()) != K ||
      static_cast<Index>(m.edge_forward.size()) != K || static_cast<Index>(m.adjacency.size()) != K)
    return "per-element arrays have inconsistent lengths";
  for (Index k = 0; k < K; ++k) {
    for (int f = 0; f < 3; ++f) {
      const FaceLink& l = m.adjacency[k][f];
      const std::string& tag = m.face_tag(k, f);
      if (l.elem < 0) {
        if (tag.empty() || tag == "periodic") return "untagged face without a neighbor";
        continue;
      }
      const FaceLink& back = m.adjacency[l.elem][l.face];
      if (back.elem != k || back.face != f) return "face adjacency is not an involution";
      if (m.elem_edges[l.elem][l.face] != m.elem_edges[k][f]) return "neighbors disagree on the edge id";
      // The shared edge has the same length seen from both sides, up to the
      // periodic translation.
      const Point a = m.corners[k][(f + 1) % 3] - m.corners[k][f];
      const Point b = m.corners[l.elem][(l.face + 1) % 3] - m.corners[l.elem][l.face];
      if ((a + b).norm() > 1e-12 * std::max(1.0, a.norm())) return "shared face geometry mismatch";
    }
  }
  return {};
}

TriMesh unit_square_periodic_mesh(int m) {
  if (m < 1) throw InvalidArgument("unit_square_periodic_mesh: m must be positive");
  return structured_mesh(
      m, m, true, [m](int i, int j) { return Point(double(i) / m, double(j) / m); },
      [](char, int, int) { return std::string(); });
}

TriMesh unit_square_mesh(int m) {
  if (m < 1) throw InvalidArgument("unit_square_mesh: m must be positive");
  return structured_mesh(
      m, m, false, [m](int i, int j) { return Point(double(i) / m, double(j) / m); },
      [](char, int, int) { return std::string("boundary"); });
}

double kernel_h_ref(int levels) { return std::pow(1.0 / 3.0, levels); }

namespace {

TriMesh refine_once(const TriMesh& coarse, Kernel kernel) {
  // Edge points at fractions t1 < t2 along each edge's canonical direction,
  // interior point at barycentric weights bary (of corners 0, 1, 2).
  const double t1 = kernel == Kernel::Uniform ? 1.0 / 3.0 : 0.30;
  const double t2 = kernel == Kernel::Uniform ? 2.0 / 3.0 : 0.62;
  const std::array<double, 3> bary =
      kernel == Kernel::Uniform ? std::array<double, 3>{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}
                                : std::array<double, 3>{0.36, 0.31, 0.33};

  const Index K = coarse.num_elements();
  const Index V0 = coarse.num_vertices(), E0 = coarse.num_edges();
  TriMesh fine;
  fine.kernel = kernel == Kernel::Uniform ? "uniform" : "perturbed";
  fine.split = coarse.split;
  const Index nverts = V0 + 2 * E0 + K;
  fine.vertices.resize(nverts, 2);
  fine.vertices.topRows(V0) = coarse.vertices;
  std::vector<bool> vset(nverts, false);
  for (Index v = 0; v < V0; ++v) vset[v] = true;

  // Edge ids: sub-edges 3 e + s of each coarse edge (canonical order), then
  // 9 interior edges per element.
  fine.edge_tags.assign(3 * E0 + 9 * K, "");
  for (Index e = 0; e < E0; ++e)
    for (int s = 0; s < 3; ++s) fine.edge_tags[3 * e + s] = coarse.edge_tags[e];

  // Lattice (i, j), i + j <= 3, of the trisected triangle.
  auto on_face = [](int i, int j) -> int {
    // Parent face containing the lattice point (first match), -1 if interior.
    if (j == 0) return 0;
    if (i + j == 3) return 1;
    if (i == 0) return 2;
    return -1;
  };
  // Position along parent face f (0..3) measured from its start corner.
  auto face_pos = [](int f, int i, int j) -> int {
    switch (f) {
      case 0: return i;
      case 1: return j;
      default: return 3 - j;
    }
  };
  auto lattice_face_of_segment = [&](int ia, int ja, int ib, int jb) -> int {
    // Parent face holding both endpoints, or -1.
    for (int f = 0; f < 3; ++f) {
      auto holds = [f](int i, int j) {
        return (f == 0 && j == 0) || (f == 1 && i + j == 3) || (f == 2 && i == 0);
      };
      if (holds(ia, ja) && holds(ib, jb)) return f;
    }
    return -1;
  };

  for (Index k = 0; k < K; ++k) {
    const auto& c = coarse.corners[k];
    const Point interior = bary[0] * c[0] + bary[1] * c[1] + bary[2] * c[2];
    // Lattice point -> (topological id, element-local coordinates).
    auto lattice = [&](int i, int j) -> std::pair<Index, Point> {
      if (i == 0 && j == 0) return {coarse.elements[k][0], c[0]};
      if (i == 3 && j == 0) return {coarse.elements[k][1], c[1]};
      if (i == 0 && j == 3) return {coarse.elements[k][2], c[2]};
      const int f = on_face(i, j);
      if (f < 0) return {V0 + 2 * E0 + k, interior};
      const int pos = face_pos(f, i, j);  // 1 or 2 along the face
      const bool fwd = coarse.edge_forward[k][f];
      const int cpos = fwd ? pos : 3 - pos;  // position along canonical direction
      const double t = cpos == 1 ? t1 : t2;
      const double te = fwd ? t : 1.0 - t;  // fraction from the face start corner
      const Point p = (1.0 - te) * c[f] + te * c[(f + 1) % 3];
      return {V0 + 2 * coarse.elem_edges[k][f] + (cpos - 1), p};
    };
    std::map<std::pair<int, int>, Index> interior_edges;
    auto key = [](int i, int j) { return i * 4 + j; };
    auto edge_of = [&](int ia, int ja, int ib, int jb) -> std::pair<Index, bool> {
      const int f = lattice_face_of_segment(ia, ja, ib, jb);
      if (f >= 0) {
        const int pa = face_pos(f, ia, ja), pb = face_pos(f, ib, jb);
        const int seg = std::min(pa, pb);  // segment index along the face direction
        const bool along_face = pb > pa;
        const bool fwd = coarse.edge_forward[k][f];
        const int cseg = fwd ? seg : 2 - seg;
        return {3 * coarse.elem_edges[k][f] + cseg, along_face == fwd};
      }
      const int ka = key(ia, ja), kb = key(ib, jb);
      const auto id = std::make_pair(std::min(ka, kb), std::max(ka, kb));
      auto it = interior_edges.find(id);
      if (it == interior_edges.end()) {
        const Index e = 3 * E0 + 9 * k + static_cast<Index>(interior_edges.size());
        interior_edges.emplace(id, e);
        return {e, ka < kb};
      }
      return {it->second, ka < kb};
    };
    auto add_tri = [&](std::array<std::array<int, 2>, 3> t) {
      std::array<Index, 3> ids;
      std::array<Point, 3> pts;
      for (int a = 0; a < 3; ++a) {
        const auto [id, p] = lattice(t[a][0], t[a][1]);
        ids[a] = id;
        pts[a] = p;
        if (!vset[id]) {
          fine.vertices.row(id) = p.transpose();
          vset[id] = true;
        }
      }
      std::array<Index, 3> edges;
      std::array<bool, 3> fwd;
      for (int f = 0; f < 3; ++f) {
        const auto [e, dir] = edge_of(t[f][0], t[f][1], t[(f + 1) % 3][0], t[(f + 1) % 3][1]);
        edges[f] = e;
        fwd[f] = dir;
      }
      fine.elements.push_back(ids);
      fine.corners.push_back(pts);
      fine.elem_edges.push_back(edges);
      fine.edge_forward.push_back(fwd);
    };
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i + j < 3; ++i) add_tri({{{i, j}, {i + 1, j}, {i, j + 1}}});
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i + j < 2; ++i) add_tri({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
  }
  finalize_topology(fine);
  return fine;
}

}  // namespace

TriMesh kernel_refine(const TriMesh& mesh, int levels, Kernel kernel) {
  if (levels < 0) throw InvalidArgument("kernel_refine: negative level count");
  TriMesh m = mesh;
  for (int l = 0; l < levels; ++l) m = refine_once(m, kernel);
  return m;
}

Points lagrange_lattice(int q) {
  if (q < 1) throw InvalidArgument("lagrange_lattice: degree must be positive");
  Points pts((q + 1) * (q + 2) / 2, 2);
  Index r = 0;
  for (int j = 0; j <= q; ++j)
    for (int i = 0; i + j <= q; ++i, ++r) pts.row(r) << -1.0 + 2.0 * i / q, -1.0 + 2.0 * j / q;
  return pts;
}

void lagrange_basis(int q, const Points& at, Mat* values, Mat* dxi, Mat* deta) {
  // Product form on barycentric coordinates: the node (i, j, k) with
  // i + j + k = q has basis prod_{a<i} (q l1 - a)/(i - a) * (same for l2, l0).
  const Points lat = lagrange_lattice(q);
  const Index nb = lat.rows(), np = at.rows();
  if (values) values->resize(np, nb);
  if (dxi) dxi->resize(np, nb);
  if (deta) deta->resize(np, nb);
  // Factor prod_{a<m} (q l - a)/(m - a) and its derivative with respect to l.
  auto factor = [q](int m, double l, double& v, double& dv) {
    v = 1.0;
    dv = 0.0;
    for (int a = 0; a < m; ++a) {
      const double g = (q * l - a) / (m - a), dg = double(q) / (m - a);
      dv = dv * g + v * dg;
      v *= g;
    }
  };
  for (Index r = 0; r < np; ++r) {
    const double l1 = 0.5 * (at(r, 0) + 1.0), l2 = 0.5 * (at(r, 1) + 1.0), l0 = 1.0 - l1 - l2;
    for (Index b = 0; b < nb; ++b) {
      const int i = static_cast<int>(std::lround((lat(b, 0) + 1.0) * q / 2.0));
      const int j = static_cast<int>(std::lround((lat(b, 1) + 1.0) * q / 2.0));
      const int k = q - i - j;
      double f1, d1, f2, d2, f0, d0;
      factor(i, l1, f1, d1);
      factor(j, l2, f2, d2);
      factor(k, l0, f0, d0);
      // dl1/dxi = 1/2, dl0/dxi = -1/2; dl2/deta = 1/2, dl0/deta = -1/2.
      if (values) (*values)(r, b) = f1 * f2 * f0;
      if (dxi) (*dxi)(r, b) = 0.5 * (d1 * f2 * f0 - f1 * f2 * d0);
      if (deta) (*deta)(r, b) = 0.5 * (f1 * d2 * f0 - f1 * f2 * d0);
    }
  }
}

LagrangeMap build_lagrange_map(const TriMesh& mesh, int degree,
                               const std::function<Point(const Point&)>& phys) {
  LagrangeMap map;
  map.degree = degree;
  map.ref_nodes = lagrange_lattice(degree);
  map.control.reserve(mesh.num_elements());
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const auto& c = mesh.corners[k];
    Points ctrl(map.ref_nodes.rows(), 2);
    for (Index a = 0; a < map.ref_nodes.rows(); ++a) {
      const double l1 = 0.5 * (map.ref_nodes(a, 0) + 1.0), l2 = 0.5 * (map.ref_nodes(a, 1) + 1.0);
      const Point p = (1.0 - l1 - l2) * c[0] + l1 * c[1] + l2 * c[2];
      ctrl.row(a) = (phys ? phys(p) : p).transpose();
    }
    map.control.push_back(std::move(ctrl));
  }
  return map;
}

std::pair<TriMesh, LagrangeMap> quarter_annulus_mesh(int N, int p) {
  if (N < 1) throw InvalidArgument("quarter_annulus_mesh: N must be positive");
  if (p < 1 || p > 4) throw InvalidArgument("quarter_annulus_mesh: p must be in 1..4");
  // Parameter space (r, theta); the polar map has positive Jacobian r.
  const double half_pi = 0.5 * std::numbers::pi;
  TriMesh mesh = structured_mesh(
      N, N, false,
      [N, half_pi](int i, int j) { return Point(1.0 + 2.0 * i / N, half_pi * j / N); },
      [N](char kind, int i, int) {
        if (kind == 'v') return std::string(i == 0 ? "inner" : "outer");
        (void)N;
        return std::string("side");
      });
  LagrangeMap map = build_lagrange_map(mesh, p + 1, [](const Point& rt) {
    return Point(rt.x() * std::cos(rt.y()), rt.x() * std::sin(rt.y()));
  });
  return {std::move(mesh), std::move(map)};
}

Point warp(const Point& xi) {
  const double s = std::sin(3.0 * std::numbers::pi * xi.x()) * std::sin(3.0 * std::numbers::pi * xi.y()) / 20.0;
  return Point(xi.x() + s, xi.y() - s);
}

std::pair<TriMesh, LagrangeMap> warped_periodic_mesh(int p) {
  if (p < 1 || p > 4) throw InvalidArgument("warped_periodic_mesh: p must be in 1..4");
  TriMesh mesh = unit_square_periodic_mesh(6);
  LagrangeMap map = build_lagrange_map(mesh, p + 1, warp);
  return {std::move(mesh), std::move(map)};
}

MetricData compute_metrics(const LagrangeMap& map, const Points& nodes) {
  Mat V, Vx, Vy;
  lagrange_basis(map.degree, nodes, &V, &Vx, &Vy);
  const Index n = nodes.rows(), K = static_cast<Index>(map.control.size());
  MetricData m;
  for (Mat* a : {&m.x, &m.y, &m.x_xi, &m.x_eta, &m.y_xi, &m.y_eta, &m.J, &m.Jxi_x, &m.Jxi_y,
                 &m.Jeta_x, &m.Jeta_y})
    a->resize(n, K);
  for (Index k = 0; k < K; ++k) {
    const auto& c = map.control[k];
    m.x.col(k) = V * c.col(0);
    m.y.col(k) = V * c.col(1);
    m.x_xi.col(k) = Vx * c.col(0);
    m.x_eta.col(k) = Vy * c.col(0);
    m.y_xi.col(k) = Vx * c.col(1);
    m.y_eta.col(k) = Vy * c.col(1);
  }
  m.J = m.x_xi.cwiseProduct(m.y_eta) - m.x_eta.cwiseProduct(m.y_xi);
  m.Jxi_x = m.y_eta;
  m.Jxi_y = -m.x_eta;
  m.Jeta_x = -m.y_xi;
  m.Jeta_y = m.x_xi;
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) {
      if (!(m.J(i, k) > 0.0)) {
        std::ostringstream msg;
        msg << "compute_metrics: non-positive Jacobian " << m.J(i, k) << " at node " << i
            << " of element " << k;
        throw ConstructionError(msg.str());
      }
    }
  }
  return m;
}

}  // namespace csbp
