#pragma once

// Continuous-SBP global structures: shared-node numbering (the restriction
// operators R_k as index maps), element operators in physical space, the
// assembled norm and Q matrices, and a deterministic element loop.

#include "csbp/mesh.hpp"
#include "csbp/tri_sbp.hpp"
#include "csbp/types.hpp"

#include <iosfwd>
#include <vector>

namespace csbp {

using IndexMat = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

enum class NodeClass { Vertex, Face, Interior };

struct GlobalNumbering {
  Index n = 0;
  IndexMat elem_to_global;           ///< n_k x K: global index of local node i on element k
  std::vector<NodeClass> node_class;  ///< per local node

  Index num_elements() const { return elem_to_global.cols(); }
  Index nodes_per_element() const { return elem_to_global.rows(); }
  /// Number of (element, local node) pairs referencing each global node.
  Vec multiplicity() const;
};

/// Vertices are shared by topological vertex id, face nodes by edge id with
/// the LGL order reversed when a face runs against its edge's canonical
/// direction. Throws InvalidArgument for a face-node count mismatch and
/// ConstructionError on inconsistent orientation.
GlobalNumbering build_global_numbering(const TriMesh& mesh, const TriCubature& c);

/// SBP pieces of one element in physical coordinates, built from nodal metrics:
/// S_x = 1/2 sum_m (Lambda_m S_m + S_m Lambda_m), E_x = sum_m Lambda_m E_m,
/// with Lambda_xi = diag(J dxi/dx), Lambda_eta = diag(J deta/dx), and likewise for y.
struct ElementOps {
  Mat Sx, Sy;
  Vec Ex, Ey;  ///< diagonals
  Vec HJ;      ///< diagonal of J H_k
};

std::vector<ElementOps> element_operators(const SbpTri& op, const MetricData& metrics);

struct GlobalOperator {
  Vec H;  ///< diagonal of the global norm
  SpMat Qx, Qy;

  SpMat Dx() const;
  SpMat Dy() const;
};

/// H = sum R^T J H_k R, Q_x = sum R^T (S_x + E_x / 2) R, and likewise Q_y.
/// The Q matrices are materialized only when `with_q` is true. Throws
/// ConstructionError if a global norm entry is not positive.
GlobalOperator assemble_global(const GlobalNumbering& num, const std::vector<ElementOps>& ops,
                               bool with_q = true);

/// Element-local rows of a global n x c field.
Mat gather(const GlobalNumbering& num, Index k, const Mat& u);

void scatter_add(const GlobalNumbering& num, Index k, const Mat& local, Mat& out);

/// sum_k R_k^T kernel(k, R_k u), visiting elements in ascending order so the
/// result is bitwise reproducible. `kernel` returns an n_k x c matrix.
template <typename Kernel>
Mat element_loop_apply(const GlobalNumbering& num, const Mat& u, Kernel&& kernel) {
  Mat out = Mat::Zero(u.rows(), u.cols());
  for (Index k = 0; k < num.num_elements(); ++k) {
    const Mat local = kernel(k, gather(num, k, u));
    if (local.rows() != num.nodes_per_element() || local.cols() != u.cols())
      throw InvalidArgument("element_loop_apply: kernel output has the wrong shape");
    scatter_add(num, k, local, out);
  }
  return out;
}

/// Global nodal coordinates (n x 2), taken from the first element visiting each node.
Points global_coordinates(const GlobalNumbering& num, const MetricData& metrics);

/// One "row col value" line per stored entry, zero-based, row-major order.
void write_triplets(std::ostream& os, const SpMat& A);

}  // namespace csbp
