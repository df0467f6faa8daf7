#pragma once

// Symmetric cubature rules on the reference triangle
//   {(xi, eta) : xi >= -1, eta >= -1, xi + eta <= 0}
// with positive weights, a node at each vertex, p+2 LGL nodes on each face,
// and exactness for total degree 2p.

#include "csbp/types.hpp"

#include <array>
#include <vector>

namespace csbp {

/// Vertices of the reference triangle, counter-clockwise.
inline const std::array<Point, 3>& reference_vertices() {
  static const std::array<Point, 3> v = {Point(-1.0, -1.0), Point(1.0, -1.0), Point(-1.0, 1.0)};
  return v;
}

inline constexpr double kReferenceArea = 2.0;

/// Face f runs from vertex f to vertex (f + 1) % 3.
inline constexpr std::array<std::array<int, 2>, 3> kFaceVertices = {{{0, 1}, {1, 2}, {2, 0}}};

struct TriCubature {
  int p = 0;
  Points nodes;
  Vec weights;
  std::array<int, 3> vertex_ids{};
  /// Per face: start vertex, end vertex, then the interior face nodes in
  /// increasing distance from the start vertex (the FaceRule ordering).
  std::array<std::vector<int>, 3> face_node_ids;

  Index size() const { return weights.size(); }
};

/// LGL rule on one face, ordered endpoints first then interior nodes ascending.
struct FaceRule {
  int p = 0;
  Vec nodes;  ///< abscissae in [-1, 1]
  Vec B;      ///< diagonal face-quadrature weights, scaled to the face length
};

/// Orbit layout used to construct the degree-p rule.
struct OrbitStructure {
  int p = 0;
  int target_degree = 0;  ///< moment degree imposed (2p, or higher to pin a unique rule)
  bool centroid = false;
  int s21_orbits = 0;   ///< interior orbits (a, a, 1-2a)
  int s111_orbits = 0;  ///< interior orbits (a, b, 1-a-b)
};

OrbitStructure orbit_structure(int p);

/// Exact integral of xi^a eta^b over the reference triangle.
double triangle_monomial_moment(int a, int b);

/// Throws InvalidArgument for p outside 0..4, ConstructionError if neither
/// the Newton solve nor the embedded fallback yields a valid rule.
TriCubature build_tri_cubature(int p);

FaceRule face_rule(int p, double face_length);

/// Largest |quadrature - exact| over monomials xi^a eta^b with a + b <= q.
double verify_cubature(const TriCubature& c, int q);

/// Checks every structural invariant (positivity, vertex and face nodes,
/// symmetry, 2p exactness). Returns an empty string when valid, otherwise a
/// description of the first violation.
std::string validate_cubature(const TriCubature& c);

}  // namespace csbp
