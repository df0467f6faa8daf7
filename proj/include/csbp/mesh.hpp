#pragma once

// Triangular meshes with explicit edge topology, kernel refinement,
// curvilinear Lagrange coordinate maps and nodal metric data.
//
// Topology is carried by edge ids rather than vertex pairs: on a periodic
// seed several corners of one triangle can be the same topological vertex,
// so faces are matched through the edge table.

#include "csbp/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace csbp {

/// Neighbor across an element face. elem < 0 marks a physical boundary.
struct FaceLink {
  Index elem = -1;
  int face = -1;
  bool reversed = true;  ///< neighbor traverses the shared edge in the opposite direction
};

struct FaceRef {
  Index elem = -1;
  int face = -1;
};

struct TriMesh {
  /// Representative coordinates of each topological vertex (periodic copies
  /// keep the coordinates of their first occurrence).
  Points vertices;
  /// Topological vertex ids per element, counter-clockwise. Face f joins
  /// corner f to corner (f + 1) % 3.
  std::vector<std::array<Index, 3>> elements;
  /// Element-local corner coordinates; differ from `vertices` across periodic seams.
  std::vector<std::array<Point, 3>> corners;
  std::vector<std::array<Index, 3>> elem_edges;
  /// True when face f runs along its edge's canonical direction.
  std::vector<std::array<bool, 3>> edge_forward;
  /// Per edge: "" for interior, "periodic", or a boundary label.
  std::vector<std::string> edge_tags;
  std::vector<std::array<FaceLink, 3>> adjacency;
  std::vector<std::pair<FaceRef, FaceRef>> periodic_pairs;
  std::string kernel = "uniform";
  std::string split = "lower-left to upper-right";

  Index num_elements() const { return static_cast<Index>(elements.size()); }
  Index num_vertices() const { return vertices.rows(); }
  Index num_edges() const { return static_cast<Index>(edge_tags.size()); }
  const std::string& face_tag(Index k, int f) const { return edge_tags[elem_edges[k][f]]; }
  bool is_boundary(Index k, int f) const { return adjacency[k][f].elem < 0; }
};

/// Rebuilds adjacency and periodic pairs from the edge table and checks the
/// structural invariants (orientation, at most two uses per edge, tags
/// consistent with use counts, involution). Throws ConstructionError.
void finalize_topology(TriMesh& mesh);

/// Structural check used by tests and mesh import. Returns "" when valid.
std::string validate_mesh(const TriMesh& mesh);

/// m x m squares of the unit square, each split along its lower-left to
/// upper-right diagonal, with both pairs of opposite sides identified.
TriMesh unit_square_periodic_mesh(int m = 1);

/// Same layout without identifications; every outer face tagged "boundary".
TriMesh unit_square_mesh(int m = 1);

enum class Kernel { Uniform, Perturbed };

/// Replace every triangle by the 9-triangle edge-trisection pattern `levels`
/// times. The perturbed kernel moves the edge and interior points off the
/// uniform thirds to avoid smoothly varying element sizes.
TriMesh kernel_refine(const TriMesh& mesh, int levels, Kernel kernel = Kernel::Uniform);

/// Nominal element size after `levels` refinements, (1/3)^levels.
double kernel_h_ref(int levels);

/// Degree-q Lagrange coordinate map per element, nodes uniformly spaced on
/// the reference triangle.
struct LagrangeMap {
  int degree = 1;
  Points ref_nodes;              ///< (q+1)(q+2)/2 lattice nodes on the reference triangle
  std::vector<Points> control;   ///< per element, physical coordinates of the lattice nodes
};

/// Uniform lattice of degree q, ordered by rows j = 0..q then i = 0..q-j.
Points lagrange_lattice(int q);

/// Values and reference derivatives of the degree-q Lagrange basis on the
/// uniform lattice, evaluated at the rows of `at`.
void lagrange_basis(int q, const Points& at, Mat* values, Mat* dxi = nullptr, Mat* deta = nullptr);

/// Control nodes from the element corners through `phys` (identity if empty):
/// lattice points are placed affinely between the element-local corners in
/// parameter space, then mapped.
LagrangeMap build_lagrange_map(const TriMesh& mesh, int degree,
                               const std::function<Point(const Point&)>& phys = {});

/// Quarter annulus 1 <= r <= 3, 0 <= theta <= pi/2: N x N polar quads split in
/// two, degree p+1 map. Tags: "inner" (r = 1), "outer" (r = 3), "side".
std::pair<TriMesh, LagrangeMap> quarter_annulus_mesh(int N, int p);

/// x = xi + sin(3 pi xi) sin(3 pi eta) / 20, y = eta - (same).
Point warp(const Point& xi);

/// 6 x 6 periodic unit square pushed through `warp` with a degree p+1 map.
std::pair<TriMesh, LagrangeMap> warped_periodic_mesh(int p);

struct MetricData {
  // n_k x K arrays: row = SBP node, column = element.
  Mat x, y;
  Mat x_xi, x_eta, y_xi, y_eta;
  Mat J;
  // Scaled contravariant components J d(xi)/dx etc.
  Mat Jxi_x, Jxi_y, Jeta_x, Jeta_y;

  Index num_elements() const { return J.cols(); }
};

/// Throws ConstructionError if J <= 0 at any node.
MetricData compute_metrics(const LagrangeMap& map, const Points& nodes);

}  // namespace csbp
