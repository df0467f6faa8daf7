#include "csbp/euler.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace csbp {

namespace {

using Cplx = std::complex<double>;
constexpr double kStep = 1e-30;  // complex-step size

template <typename S>
Vector4<S> row4(const MatrixX<S>& U, Index i) {
  return Vector4<S>(U(i, 0), U(i, 1), U(i, 2), U(i, 3));
}

// -sum P^T H A P W on one element, added to out.
template <typename S>
void add_element_lps(const EulerDiscretization& d, Index k, const MatrixX<S>& Uk, MatrixX<S>& out) {
  const Index nk = Uk.rows();
  const MatrixX<S> P = d.projector.P.cast<S>();
  MatrixX<S> W(nk, 4);
  for (Index i = 0; i < nk; ++i) W.row(i) = entropy_vars(row4(Uk, i)).transpose();
  const MatrixX<S> V = P * W;
  MatrixX<S> Y(nk, 4);
  const MetricData& md = d.metrics;
  for (Index i = 0; i < nk; ++i) {
    const Vector4<S> Ui = row4(Uk, i);
    const auto [sxi, seta] = wave_speeds(Ui, md.Jxi_x(i, k), md.Jxi_y(i, k), md.Jeta_x(i, k), md.Jeta_y(i, k));
    const Vector4<S> vi = V.row(i).transpose();
    Y.row(i) = (S(0.5 * d.op.H(i)) * (sxi + seta) * (dudw(Ui) * vi)).transpose();
  }
  out -= P.transpose() * Y;
}

template <typename S>
void add_element_boundary(const EulerDiscretization& d, Index k, const MatrixX<S>& Uk, MatrixX<S>& out) {
  for (const BoundaryFace& bf : d.boundary[k]) {
    for (std::size_t a = 0; a < bf.nodes.size(); ++a) {
      const Index i = bf.nodes[a];
      const Index ai = static_cast<Index>(a);
      const Vector4<S> Ui = row4(Uk, i);
      const double nx = bf.N(ai, 0), ny = bf.N(ai, 1);
      Vector4<S> F;
      if (bf.kind == BcKind::Slip) {
        F = slip_wall_flux(Ui, nx, ny);
      } else {
        const Vector4<S> Ub = bf.Ubc.row(ai).transpose().cast<S>();
        F = roe_flux(Ui, Ub, nx, ny);
      }
      out.row(i) -= (S(bf.B(ai)) * F).transpose();
    }
  }
}

void add_element_volume(const EulerDiscretization& d, Index k, const Mat& Uk, Mat& out) {
  const ElementOps& e = d.ops[k];
  const Index nk = Uk.rows();
  for (Index i = 0; i < nk; ++i) {
    const Eigen::Vector4d Ui = row4(Uk, i);
    for (Index j = i + 1; j < nk; ++j) {
      const double nx = e.Sx(i, j), ny = e.Sy(i, j);
      if (nx == 0.0 && ny == 0.0) continue;
      const Eigen::Vector4d F = 2.0 * ec_flux(d.flux, Ui, row4(Uk, j), nx, ny);
      out.row(i) -= F.transpose();
      out.row(j) += F.transpose();
    }
  }
}

void check_element(const Mat& Uk, const EulerDiscretization& d, Index k) {
  for (Index i = 0; i < Uk.rows(); ++i) {
    const Eigen::Vector4d Ui = row4(Uk, i);
    if (!admissible(Ui)) require_admissible(Ui, d.num.elem_to_global(i, k), k);
  }
}

Mat element_residual(const EulerDiscretization& d, Index k, const Mat& Uk, const EulerTerms& t) {
  check_element(Uk, d, k);
  Mat out = Mat::Zero(Uk.rows(), 4);
  if (t.volume) add_element_volume(d, k, Uk, out);
  if (t.boundary) add_element_boundary(d, k, Uk, out);
  if (t.lps && d.lps_enabled) add_element_lps(d, k, Uk, out);
  return out;
}

// Dense 4 n_k x 4 n_k Jacobian of element_residual, local index 4 i + c.
Mat element_jacobian(const EulerDiscretization& d, Index k, const Mat& Uk, const EulerTerms& t) {
  check_element(Uk, d, k);
  const Index nk = Uk.rows();
  Mat Jk = Mat::Zero(4 * nk, 4 * nk);
  if (t.volume) {
    // Pair (i, j) adds -2F to row i and +2F to row j; differentiate F in both arguments.
    const ElementOps& e = d.ops[k];
    for (Index i = 0; i < nk; ++i) {
      const Vector4<Cplx> Ui = row4(Uk, i).cast<Cplx>();
      for (Index j = i + 1; j < nk; ++j) {
        const double nx = e.Sx(i, j), ny = e.Sy(i, j);
        if (nx == 0.0 && ny == 0.0) continue;
        const Vector4<Cplx> Uj = row4(Uk, j).cast<Cplx>();
        for (int c = 0; c < 4; ++c) {
          Vector4<Cplx> a = Ui, b = Uj;
          a(c) += Cplx(0.0, kStep);
          b(c) += Cplx(0.0, kStep);
          const Eigen::Vector4d dFi = 2.0 * ec_flux(d.flux, a, Uj, nx, ny).imag() / kStep;
          const Eigen::Vector4d dFj = 2.0 * ec_flux(d.flux, Ui, b, nx, ny).imag() / kStep;
          Jk.block<4, 1>(4 * i, 4 * i + c) -= dFi;
          Jk.block<4, 1>(4 * j, 4 * i + c) += dFi;
          Jk.block<4, 1>(4 * i, 4 * j + c) -= dFj;
          Jk.block<4, 1>(4 * j, 4 * j + c) += dFj;
        }
      }
    }
  }
  const bool bdry = t.boundary && !d.boundary[k].empty();
  if (bdry) {
    // Boundary fluxes couple a node only to itself.
    const MatrixX<Cplx> Uc = Uk.cast<Cplx>();
    for (const BoundaryFace& bf : d.boundary[k]) {
      for (std::size_t a = 0; a < bf.nodes.size(); ++a) {
        const Index i = bf.nodes[a];
        const Index ai = static_cast<Index>(a);
        for (int c = 0; c < 4; ++c) {
          Vector4<Cplx> Ui = row4(Uc, i);
          Ui(c) += Cplx(0.0, kStep);
          const double nx = bf.N(ai, 0), ny = bf.N(ai, 1);
          const Vector4<Cplx> F = bf.kind == BcKind::Slip
                                      ? slip_wall_flux(Ui, nx, ny)
                                      : roe_flux(Ui, Vector4<Cplx>(bf.Ubc.row(ai).transpose().cast<Cplx>()), nx, ny);
          Jk.block<4, 1>(4 * i, 4 * i + c) -= bf.B(ai) * F.imag() / kStep;
        }
      }
    }
  }
  if (t.lps && d.lps_enabled) {
    const MatrixX<Cplx> Uc = Uk.cast<Cplx>();
    for (Index j = 0; j < nk; ++j) {
      for (int c = 0; c < 4; ++c) {
        MatrixX<Cplx> Up = Uc;
        Up(j, c) += Cplx(0.0, kStep);
        MatrixX<Cplx> out = MatrixX<Cplx>::Zero(nk, 4);
        add_element_lps(d, k, Up, out);
        for (Index i = 0; i < nk; ++i)
          for (int r = 0; r < 4; ++r) Jk(4 * i + r, 4 * j + c) += out(i, r).imag() / kStep;
      }
    }
  }
  return Jk;
}

bool field_admissible(const Vec& u) {
  for (Index i = 0; i < u.size() / 4; ++i)
    if (!admissible(u.segment<4>(4 * i))) return false;
  return true;
}

}  // namespace

void EulerField::check_admissible() const {
  for (Index i = 0; i < U.rows(); ++i) require_admissible(U.row(i).transpose(), i);
}

Mat entropy_vars_field(const Mat& U) {
  Mat W(U.rows(), 4);
  for (Index i = 0; i < U.rows(); ++i) {
    const Eigen::Vector4d Ui = U.row(i).transpose();
    require_admissible(Ui, i);
    W.row(i) = entropy_vars(Ui).transpose();
  }
  return W;
}

EulerDiscretization make_euler_discretization(const TriMesh& mesh, const LagrangeMap& map, int p,
                                              const EulerOptions& opt) {
  EulerDiscretization d;
  d.p = p;
  d.mesh = mesh;
  d.map = map;
  d.op = build_sbp_tri(p);
  d.metrics = compute_metrics(map, d.op.cubature.nodes);
  d.num = build_global_numbering(mesh, d.op.cubature);
  d.ops = element_operators(d.op, d.metrics);
  d.H = assemble_global(d.num, d.ops, false).H;
  d.projector = projector_exact(d.op.basis.L, d.op.H);
  d.flux = opt.flux;
  d.lps_enabled = opt.lps_enabled;
  d.exact = opt.exact;
  d.xy = global_coordinates(d.num, d.metrics);

  const MetricData& md = d.metrics;
  d.boundary.assign(static_cast<std::size_t>(mesh.num_elements()), {});
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    for (int f = 0; f < 3; ++f) {
      if (!mesh.is_boundary(k, f)) continue;
      const std::string& tag = mesh.face_tag(k, f);
      const auto it = opt.bc.find(tag);
      if (it == opt.bc.end()) throw InvalidArgument("make_euler_discretization: unknown boundary tag '" + tag + "'");
      BoundaryFace bf;
      bf.face = f;
      bf.kind = it->second;
      bf.tag = tag;
      bf.nodes = d.op.cubature.face_node_ids[f];
      bf.B = d.op.face_rules[f].B;
      const Index m = static_cast<Index>(bf.nodes.size());
      const Point n = d.op.normals[f];
      bf.N.resize(m, 2);
      for (Index a = 0; a < m; ++a) {
        const Index i = bf.nodes[a];
        bf.N(a, 0) = md.Jxi_x(i, k) * n.x() + md.Jeta_x(i, k) * n.y();
        bf.N(a, 1) = md.Jxi_y(i, k) * n.x() + md.Jeta_y(i, k) * n.y();
      }
      if (bf.kind == BcKind::Characteristic) {
        if (!opt.exact)
          throw InvalidArgument("make_euler_discretization: characteristic face '" + tag + "' needs a state");
        bf.Ubc.resize(m, 4);
        for (Index a = 0; a < m; ++a) {
          const Index i = bf.nodes[a];
          bf.Ubc.row(a) = opt.exact(md.x(i, k), md.y(i, k)).transpose();
        }
      }
      d.boundary[k].push_back(std::move(bf));
    }
  }
  return d;
}

Mat euler_residual(const EulerDiscretization& d, const Mat& U, EulerTerms terms) {
  if (U.rows() != d.num.n || U.cols() != 4) throw InvalidArgument("euler_residual: field must be n x 4");
  return element_loop_apply(d.num, U, [&](Index k, const Mat& Uk) { return element_residual(d, k, Uk, terms); });
}

Mat euler_rhs_ec(const EulerDiscretization& d, const Mat& U) {
  return d.H.cwiseInverse().asDiagonal() * euler_residual(d, U, {true, true, false});
}

Mat lps_entropy_rhs(const EulerDiscretization& d, const Mat& U) {
  if (U.rows() != d.num.n || U.cols() != 4) throw InvalidArgument("lps_entropy_rhs: field must be n x 4");
  const Mat r = element_loop_apply(d.num, U, [&](Index k, const Mat& Uk) -> Mat {
    check_element(Uk, d, k);
    Mat out = Mat::Zero(Uk.rows(), 4);
    add_element_lps(d, k, Uk, out);
    return out;
  });
  return d.H.cwiseInverse().asDiagonal() * r;
}

Mat euler_rhs(const EulerDiscretization& d, const Mat& U) {
  return d.H.cwiseInverse().asDiagonal() * euler_residual(d, U);
}

SpMat euler_jacobian(const EulerDiscretization& d, const Mat& U, EulerTerms terms) {
  if (U.rows() != d.num.n || U.cols() != 4) throw InvalidArgument("euler_jacobian: field must be n x 4");
  const Index nk = d.num.nodes_per_element();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(16 * nk * nk * d.num.num_elements()));
  for (Index k = 0; k < d.num.num_elements(); ++k) {
    const Mat Jk = element_jacobian(d, k, gather(d.num, k, U), terms);
    for (Index i = 0; i < nk; ++i) {
      const Index gi = d.num.elem_to_global(i, k);
      for (Index j = 0; j < nk; ++j) {
        const Index gj = d.num.elem_to_global(j, k);
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) {
            const double v = Jk(4 * i + r, 4 * j + c);
            if (v != 0.0) trip.emplace_back(4 * gi + r, 4 * gj + c, v);
          }
      }
    }
  }
  SpMat J(4 * d.num.n, 4 * d.num.n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

Vec flatten(const Mat& U) {
  Vec u(U.size());
  for (Index i = 0; i < U.rows(); ++i)
    for (Index c = 0; c < U.cols(); ++c) u(U.cols() * i + c) = U(i, c);
  return u;
}

Mat unflatten(const Vec& u) {
  if (u.size() % 4 != 0) throw InvalidArgument("unflatten: length must be a multiple of 4");
  Mat U(u.size() / 4, 4);
  for (Index i = 0; i < U.rows(); ++i)
    for (Index c = 0; c < 4; ++c) U(i, c) = u(4 * i + c);
  return U;
}

Mat euler_volume_dense(const EulerDiscretization& d, const Mat& U) {
  return element_loop_apply(d.num, U, [&](Index k, const Mat& Uk) -> Mat {
    const Index nk = Uk.rows();
    const ElementOps& e = d.ops[k];
    Mat out = Mat::Zero(nk, 4);
    for (int c = 0; c < 4; ++c) {
      Mat Fx(nk, nk), Fy(nk, nk);
      for (Index i = 0; i < nk; ++i)
        for (Index j = 0; j < nk; ++j) {
          Fx(i, j) = ec_flux(d.flux, Eigen::Vector4d(row4(Uk, i)), Eigen::Vector4d(row4(Uk, j)), 1.0, 0.0)(c);
          Fy(i, j) = ec_flux(d.flux, Eigen::Vector4d(row4(Uk, i)), Eigen::Vector4d(row4(Uk, j)), 0.0, 1.0)(c);
        }
      out.col(c) = -2.0 * (e.Sx.cwiseProduct(Fx) + e.Sy.cwiseProduct(Fy)).rowwise().sum();
    }
    return out;
  });
}

double total_entropy(const EulerDiscretization& d, const Mat& U) {
  double s = 0.0;
  for (Index i = 0; i < U.rows(); ++i) {
    const Eigen::Vector4d Ui = U.row(i).transpose();
    require_admissible(Ui, i);
    s += d.H(i) * entropy_density(Ui);
  }
  return s;
}

double max_wave_speed(const Mat& U) {
  double s = 0.0;
  for (Index i = 0; i < U.rows(); ++i) {
    const Eigen::Vector4d Ui = U.row(i).transpose();
    require_admissible(Ui, i);
    const double a = std::sqrt(kGamma * pressure(Ui) / Ui(0));
    s = std::max(s, std::hypot(Ui(1), Ui(2)) / Ui(0) + a);
  }
  return s;
}

double min_inradius(const EulerDiscretization& d) {
  const Points& ref = d.map.ref_nodes;
  std::array<Index, 3> corner{-1, -1, -1};
  const auto rv = reference_vertices();
  for (Index a = 0; a < ref.rows(); ++a)
    for (int v = 0; v < 3; ++v)
      if ((ref.row(a).transpose() - rv[v]).norm() < 1e-12) corner[v] = a;
  double r = 1e300;
  for (const Points& ctl : d.map.control) {
    const Point a = ctl.row(corner[0]).transpose(), b = ctl.row(corner[1]).transpose(),
                c = ctl.row(corner[2]).transpose();
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    const double perim = (b - a).norm() + (c - b).norm() + (a - c).norm();
    r = std::min(r, 2.0 * area / perim);
  }
  return r;
}

Vec newton_solve(const ResidualFn& G, const JacobianFn& J, Vec x, const NewtonOptions& opt,
                 NewtonReport* report, const AdmissibleFn& admissible_fn) {
  if (admissible_fn && !admissible_fn(x)) throw InadmissibleState("newton_solve: initial guess is inadmissible");
  NewtonReport rep;
  Vec g = G(x);
  double norm = g.lpNorm<Eigen::Infinity>();
  rep.residual_history.push_back(norm);
  const double target = std::max(opt.rel_tol * norm, opt.abs_tol);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  while (norm > target) {
    if (rep.iterations >= opt.max_iter) {
      std::ostringstream msg;
      msg << "newton_solve: no convergence in " << opt.max_iter << " iterations, residual " << norm;
      throw Error(msg.str());
    }
    const Eigen::SparseMatrix<double> A = J(x);
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error("newton_solve: sparse LU factorization failed");
    const Vec dx = lu.solve(-g);
    if (lu.info() != Eigen::Success || !dx.allFinite()) throw Error("newton_solve: linear solve failed");

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
      const Vec xt = x + lambda * dx;
      if (admissible_fn && !admissible_fn(xt)) continue;
      Vec gt;
      try {
        gt = G(xt);
      } catch (const InadmissibleState&) {
        continue;
      }
      const double nt = gt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(nt) && nt < norm) {
        x = xt;
        g = std::move(gt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    ++rep.iterations;
    if (!accepted && dx.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      // The update is below the resolution of x: the residual is at its roundoff floor.
      rep.residual_history.push_back(norm);
      break;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "newton_solve: line search failed after " << opt.max_halvings << " halvings at iteration "
          << rep.iterations << ", residual " << norm;
      throw Error(msg.str());
    }
    rep.residual_history.push_back(norm);
  }
  rep.converged = true;
  if (report) *report = rep;
  return x;
}

EulerField solve_steady(const EulerDiscretization& d, EulerField field, const NewtonOptions& opt,
                        NewtonReport* report) {
  auto G = [&](const Vec& u) { return flatten(euler_residual(d, unflatten(u))); };
  auto J = [&](const Vec& u) { return euler_jacobian(d, unflatten(u)); };
  if (opt.pseudo_dt <= 0.0) {
    field.U = unflatten(newton_solve(G, J, flatten(field.U), opt, report, field_admissible));
    return field;
  }
  // Pseudo-transient continuation with switched evolution relaxation.
  Vec x = flatten(field.U);
  if (!field_admissible(x)) throw InadmissibleState("solve_steady: initial guess is inadmissible");
  Vec Hf(x.size());
  for (Index i = 0; i < d.num.n; ++i) Hf.segment<4>(4 * i).setConstant(d.H(i));
  NewtonReport rep;
  Vec g = G(x);
  double norm = g.lpNorm<Eigen::Infinity>();
  rep.residual_history.push_back(norm);
  const double target = std::max(opt.rel_tol * norm, opt.abs_tol);
  double tau = opt.pseudo_dt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  while (norm > target) {
    if (rep.iterations >= opt.max_iter) {
      std::ostringstream msg;
      msg << "solve_steady: no convergence in " << opt.max_iter << " iterations, residual " << norm;
      throw Error(msg.str());
    }
    const SpMat Jx = J(x);
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings && !accepted; ++h) {
      SpMat A = -Jx;
      for (Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += Hf(i) / tau;
      lu.compute(Eigen::SparseMatrix<double>(A));
      if (lu.info() == Eigen::Success) {
        const Vec xt = x + lu.solve(g);
        if (xt.allFinite() && field_admissible(xt)) {
          const Vec gt = G(xt);
          const double nt = gt.lpNorm<Eigen::Infinity>();
          if (std::isfinite(nt)) {
            tau = std::min(tau * norm / nt, 1e14);
            x = xt;
            g = gt;
            norm = nt;
            accepted = true;
            break;
          }
        }
      }
      tau *= 0.5;
    }
    ++rep.iterations;
    if (!accepted) {
      std::ostringstream msg;
      msg << "solve_steady: pseudo-time step could not keep the state admissible at iteration " << rep.iterations;
      throw Error(msg.str());
    }
    rep.residual_history.push_back(norm);
  }
  rep.converged = true;
  if (report) *report = rep;
  field.U = unflatten(x);
  return field;
}

EulerField implicit_midpoint_advance(const EulerDiscretization& d, EulerField field, double dt, long steps,
                                     const NewtonOptions& opt, std::vector<EntropyTraceRow>* trace) {
  if (!(dt > 0.0)) throw InvalidArgument("implicit_midpoint_advance: dt must be positive");
  field.check_admissible();
  Vec Hf(4 * d.num.n);
  for (Index i = 0; i < d.num.n; ++i) Hf.segment<4>(4 * i).setConstant(d.H(i));
  auto nodal_entropy = [](const Mat& U) {
    Vec s(U.rows());
    for (Index i = 0; i < U.rows(); ++i) s(i) = entropy_density(Eigen::Vector4d(U.row(i).transpose()));
    return s;
  };
  Vec s_prev = nodal_entropy(field.U);
  if (trace) trace->push_back({0, field.time, d.H.dot(s_prev), 0.0});
  for (long k = 1; k <= steps; ++k) {
    const Vec u = flatten(field.U);
    // Residual scaled by dt so its roundoff floor does not grow as dt shrinks.
    auto G = [&](const Vec& y) -> Vec {
      return Hf.cwiseProduct(y - u) - dt * flatten(euler_residual(d, unflatten(0.5 * (u + y))));
    };
    auto J = [&](const Vec& y) -> SpMat {
      SpMat A = (-0.5 * dt) * euler_jacobian(d, unflatten(0.5 * (u + y)));
      for (Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += Hf(i);
      return A;
    };
    auto ok = [&](const Vec& y) { return field_admissible(y) && field_admissible(0.5 * (u + y)); };
    Vec y;
    try {
      y = newton_solve(G, J, u, opt, nullptr, ok);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "implicit_midpoint_advance: step " << k << " (t = " << field.time + dt << "): " << e.what();
      throw Error(msg.str());
    }
    field.U = unflatten(y);
    field.time += dt;
    const Vec s = nodal_entropy(field.U);
    if (trace) trace->push_back({k, field.time, d.H.dot(s), d.H.dot(s - s_prev)});
    s_prev = s;
  }
  return field;
}

VortexPrimitive vortex_exact(double r) {
  if (!(r >= 1.0)) throw InvalidArgument("vortex_exact: r must be at least r_in = 1");
  const double rho = kVortexRhoIn *
                     std::pow(1.0 + 0.5 * (kGamma - 1.0) * kVortexMachIn * kVortexMachIn * (1.0 - 1.0 / (r * r)),
                              1.0 / (kGamma - 1.0));
  const double a_in = std::sqrt(std::pow(kVortexRhoIn, kGamma - 1.0));
  VortexPrimitive s;
  s.rho = rho;
  s.speed = kVortexMachIn * a_in / r;
  s.p = std::pow(rho, kGamma) / kGamma;
  return s;
}

Eigen::Vector4d vortex_state(double x, double y) {
  const double r = std::hypot(x, y);
  const VortexPrimitive s = vortex_exact(std::max(r, 1.0));
  return conservative(s.rho, -s.speed * y / r, s.speed * x / r, s.p);
}

double vortex_exact_drag() { return -vortex_exact(1.0).p; }

double drag_functional(const EulerDiscretization& d, const Mat& U, const std::string& tag) {
  double drag = 0.0;
  for (Index k = 0; k < d.num.num_elements(); ++k) {
    for (const BoundaryFace& bf : d.boundary[k]) {
      if (bf.tag != tag) continue;
      for (std::size_t a = 0; a < bf.nodes.size(); ++a) {
        const Index ai = static_cast<Index>(a);
        const Eigen::Vector4d Ui = U.row(d.num.elem_to_global(bf.nodes[a], k)).transpose();
        drag += bf.B(ai) * pressure(Ui) * bf.N(ai, 0);
      }
    }
  }
  return drag;
}

EulerDiscretization make_vortex_discretization(int N, int p, bool lps_enabled, FluxKind flux) {
  const auto [mesh, map] = quarter_annulus_mesh(N, p);
  EulerOptions opt;
  opt.flux = flux;
  opt.lps_enabled = lps_enabled;
  opt.bc = {{"inner", BcKind::Slip}, {"outer", BcKind::Characteristic}, {"side", BcKind::Characteristic}};
  opt.exact = vortex_state;
  return make_euler_discretization(mesh, map, p, opt);
}

double density_l2_error(const EulerDiscretization& d, const Mat& U) {
  if (!d.exact) throw InvalidArgument("density_l2_error: discretization has no exact state");
  const MetricData& md = d.metrics;
  double sum = 0.0;
  for (Index k = 0; k < d.num.num_elements(); ++k)
    for (Index i = 0; i < d.num.nodes_per_element(); ++i) {
      const double e = U(d.num.elem_to_global(i, k), 0) - d.exact(md.x(i, k), md.y(i, k))(0);
      sum += d.op.H(i) * md.J(i, k) * e * e;
    }
  return std::sqrt(sum);
}

Mat interpolate_state(const EulerDiscretization& d, const StateFunction& f) {
  Mat U(d.num.n, 4);
  for (Index i = 0; i < d.num.n; ++i) U.row(i) = f(d.xy(i, 0), d.xy(i, 1)).transpose();
  return U;
}

std::vector<VortexRecord> vortex_convergence(int p, const std::vector<int>& Ns, bool lps_enabled, FluxKind flux,
                                             const NewtonOptions& opt) {
  std::vector<VortexRecord> rows;
  const double exact_drag = vortex_exact_drag();
  for (int N : Ns) {
    const EulerDiscretization d = make_vortex_discretization(N, p, lps_enabled, flux);
    NewtonReport rep;
    const EulerField f = solve_steady(d, EulerField{interpolate_state(d, vortex_state), 0.0}, opt, &rep);
    VortexRecord r;
    r.N = N;
    r.p = p;
    r.n_dof = d.num.n;
    r.newton_iterations = rep.iterations;
    r.final_residual = rep.residual_history.back();
    r.density_error = density_l2_error(d, f.U);
    r.drag = drag_functional(d, f.U);
    r.drag_error = std::abs(r.drag - exact_drag);
    if (!rows.empty()) {
      const double ratio = std::log(static_cast<double>(N) / rows.back().N);
      r.density_rate = std::log(rows.back().density_error / r.density_error) / ratio;
      r.drag_rate = std::log(rows.back().drag_error / r.drag_error) / ratio;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_vortex_csv(std::ostream& os, const std::vector<VortexRecord>& rows) {
  os << "N,p,n_dof,newton_iterations,final_residual,density_error,density_rate,drag,drag_error,drag_rate\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.N << ',' << r.p << ',' << r.n_dof << ',' << r.newton_iterations << ',' << r.final_residual << ','
       << r.density_error << ',' << r.density_rate << ',' << r.drag << ',' << r.drag_error << ',' << r.drag_rate
       << '\n';
}

Eigen::Vector4d discontinuous_ic(double x, double y) {
  const double lo = 1.0 / 3.0, hi = 2.0 / 3.0;
  if (x >= lo && x <= hi && y >= lo && y <= hi) return {1.1, 0.0, 0.0, 5.1};
  return {1.0, 0.0, 0.0, 5.0};
}

EulerDiscretization make_warped_periodic_discretization(int p, bool lps_enabled, FluxKind flux) {
  const auto [mesh, map] = warped_periodic_mesh(p);
  EulerOptions opt;
  opt.flux = flux;
  opt.lps_enabled = lps_enabled;
  return make_euler_discretization(mesh, map, p, opt);
}

EntropyTraceResult entropy_trace_study(const EntropyTraceOptions& opt) {
  if (!(opt.cfl > 0.0) || !(opt.final_time > 0.0))
    throw InvalidArgument("entropy_trace_study: cfl and final_time must be positive");
  const EulerDiscretization d = make_warped_periodic_discretization(opt.p, opt.lps_enabled, opt.flux);
  // The IC is evaluated in the reference square so the seam nodes agree.
  EulerField f{interpolate_state(d, [](double x, double y) {
                 return discontinuous_ic(x - std::floor(x), y - std::floor(y));
               }),
               0.0};
  EntropyTraceResult res;
  const double dt0 = opt.cfl * min_inradius(d) / max_wave_speed(f.U);
  res.steps = static_cast<long>(std::ceil(opt.final_time / dt0 - 1e-9));
  res.dt = opt.final_time / res.steps;
  res.final_field = implicit_midpoint_advance(d, std::move(f), res.dt, res.steps, opt.newton, &res.trace);
  res.max_delta = -1e300;
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    res.max_abs_delta = std::max(res.max_abs_delta, std::abs(res.trace[i].delta_entropy));
    res.max_delta = std::max(res.max_delta, res.trace[i].delta_entropy);
  }
  return res;
}

void write_entropy_trace_csv(std::ostream& os, const std::vector<EntropyTraceRow>& rows) {
  os << "step,time,total_entropy,delta_entropy\n";
  os.precision(17);
  for (const auto& r : rows) os << r.step << ',' << r.time << ',' << r.total_entropy << ',' << r.delta_entropy << '\n';
}

void write_nodal_csv(std::ostream& os, const EulerDiscretization& d, const Mat& U) {
  os << "x,y,rho,rho_u,rho_v,e\n";
  os.precision(17);
  for (Index i = 0; i < U.rows(); ++i)
    os << d.xy(i, 0) << ',' << d.xy(i, 1) << ',' << U(i, 0) << ',' << U(i, 1) << ',' << U(i, 2) << ',' << U(i, 3)
       << '\n';
}

}  // namespace csbp
