#include "csbp/assembly.hpp"

#include <ostream>
#include <sstream>

namespace csbp {

Vec GlobalNumbering::multiplicity() const {
  Vec m = Vec::Zero(n);
  for (Index k = 0; k < num_elements(); ++k)
    for (Index i = 0; i < nodes_per_element(); ++i) m(elem_to_global(i, k)) += 1.0;
  return m;
}

GlobalNumbering build_global_numbering(const TriMesh& mesh, const TriCubature& c) {
  const int p = c.p;
  const Index nk = c.size(), K = mesh.num_elements();
  for (int f = 0; f < 3; ++f)
    if (static_cast<int>(c.face_node_ids[f].size()) != p + 2)
      throw InvalidArgument("build_global_numbering: face node count is not p + 2");

  GlobalNumbering num;
  num.node_class.assign(nk, NodeClass::Interior);
  for (int v = 0; v < 3; ++v) num.node_class[c.vertex_ids[v]] = NodeClass::Vertex;
  for (int f = 0; f < 3; ++f)
    for (int i = 2; i < p + 2; ++i) num.node_class[c.face_node_ids[f][i]] = NodeClass::Face;
  std::vector<Index> interior;
  for (Index i = 0; i < nk; ++i)
    if (num.node_class[i] == NodeClass::Interior) interior.push_back(i);

  const Index V = mesh.num_vertices(), E = mesh.num_edges();
  const Index nint = static_cast<Index>(interior.size());
  num.n = V + E * p + K * nint;
  num.elem_to_global.setConstant(nk, K, -1);
  for (Index k = 0; k < K; ++k) {
    for (int v = 0; v < 3; ++v) num.elem_to_global(c.vertex_ids[v], k) = mesh.elements[k][v];
    for (int f = 0; f < 3; ++f) {
      const Index e = mesh.elem_edges[k][f];
      const bool fwd = mesh.edge_forward[k][f];
      const FaceLink& nb = mesh.adjacency[k][f];
      if (nb.elem >= 0 && mesh.edge_forward[nb.elem][nb.face] == fwd)
        throw ConstructionError("build_global_numbering: neighbors traverse a face in the same direction");
      for (int i = 0; i < p; ++i) {
        const int canon = fwd ? i : p - 1 - i;
        num.elem_to_global(c.face_node_ids[f][2 + i], k) = V + e * p + canon;
      }
    }
    for (Index i = 0; i < nint; ++i) num.elem_to_global(interior[i], k) = V + E * p + k * nint + i;
  }
  return num;
}

std::vector<ElementOps> element_operators(const SbpTri& op, const MetricData& md) {
  const Index K = md.num_elements();
  if (md.J.rows() != op.size()) throw InvalidArgument("element_operators: metric node count mismatch");
  std::vector<ElementOps> out(K);
  for (Index k = 0; k < K; ++k) {
    ElementOps& e = out[k];
    auto combine = [&](const Vec& lxi, const Vec& leta, Mat& S, Vec& Ed) {
      S = 0.5 * (lxi.asDiagonal() * op.Sxi + op.Sxi * lxi.asDiagonal() +
                 leta.asDiagonal() * op.Seta + op.Seta * leta.asDiagonal());
      Ed = lxi.cwiseProduct(op.Exi) + leta.cwiseProduct(op.Eeta);
    };
    combine(md.Jxi_x.col(k), md.Jeta_x.col(k), e.Sx, e.Ex);
    combine(md.Jxi_y.col(k), md.Jeta_y.col(k), e.Sy, e.Ey);
    e.HJ = op.H.cwiseProduct(md.J.col(k));
  }
  return out;
}

SpMat GlobalOperator::Dx() const { return H.cwiseInverse().asDiagonal() * Qx; }
SpMat GlobalOperator::Dy() const { return H.cwiseInverse().asDiagonal() * Qy; }

GlobalOperator assemble_global(const GlobalNumbering& num, const std::vector<ElementOps>& ops,
                               bool with_q) {
  GlobalOperator g;
  g.H = Vec::Zero(num.n);
  const Index nk = num.nodes_per_element();
  std::vector<Triplet> tx, ty;
  if (with_q) {
    tx.reserve(static_cast<std::size_t>(nk * nk * num.num_elements()));
    ty.reserve(tx.capacity());
  }
  for (Index k = 0; k < num.num_elements(); ++k) {
    const ElementOps& e = ops[k];
    for (Index i = 0; i < nk; ++i) {
      const Index gi = num.elem_to_global(i, k);
      g.H(gi) += e.HJ(i);
      if (!with_q) continue;
      for (Index j = 0; j < nk; ++j) {
        const Index gj = num.elem_to_global(j, k);
        double qx = e.Sx(i, j), qy = e.Sy(i, j);
        if (i == j) {
          qx += 0.5 * e.Ex(i);
          qy += 0.5 * e.Ey(i);
        }
        if (qx != 0.0) tx.emplace_back(gi, gj, qx);
        if (qy != 0.0) ty.emplace_back(gi, gj, qy);
      }
    }
  }
  for (Index i = 0; i < num.n; ++i) {
    if (!(g.H(i) > 0.0)) {
      std::ostringstream msg;
      msg << "assemble_global: non-positive norm entry at global node " << i;
      throw ConstructionError(msg.str());
    }
  }
  if (with_q) {
    g.Qx.resize(num.n, num.n);
    g.Qy.resize(num.n, num.n);
    g.Qx.setFromTriplets(tx.begin(), tx.end());
    g.Qy.setFromTriplets(ty.begin(), ty.end());
  }
  return g;
}

Mat gather(const GlobalNumbering& num, Index k, const Mat& u) {
  const Index nk = num.nodes_per_element();
  Mat local(nk, u.cols());
  for (Index i = 0; i < nk; ++i) local.row(i) = u.row(num.elem_to_global(i, k));
  return local;
}

void scatter_add(const GlobalNumbering& num, Index k, const Mat& local, Mat& out) {
  for (Index i = 0; i < num.nodes_per_element(); ++i) out.row(num.elem_to_global(i, k)) += local.row(i);
}

Points global_coordinates(const GlobalNumbering& num, const MetricData& md) {
  Points xy(num.n, 2);
  std::vector<bool> seen(num.n, false);
  for (Index k = 0; k < num.num_elements(); ++k) {
    for (Index i = 0; i < num.nodes_per_element(); ++i) {
      const Index g = num.elem_to_global(i, k);
      if (seen[g]) continue;
      seen[g] = true;
      xy(g, 0) = md.x(i, k);
      xy(g, 1) = md.y(i, k);
    }
  }
  return xy;
}

void write_triplets(std::ostream& os, const SpMat& A) {
  os.precision(17);
  for (Index r = 0; r < A.outerSize(); ++r)
    for (SpMat::InnerIterator it(A, r); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace csbp
