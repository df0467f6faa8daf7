#include "csbp/advection.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace csbp {

AdvectionProblem make_advection_problem(const TriMesh& mesh, const SbpTri& op, double lx, double ly,
                                        bool lps_enabled) {
  AdvectionProblem pr;
  pr.lx = lx;
  pr.ly = ly;
  pr.lps_enabled = lps_enabled;
  pr.mesh = mesh;
  pr.op = op;
  pr.metrics = compute_metrics(build_lagrange_map(mesh, 1), op.cubature.nodes);
  pr.num = build_global_numbering(mesh, op.cubature);
  pr.glob = assemble_global(pr.num, element_operators(op, pr.metrics));
  pr.projector = projector_exact(op.basis.L, op.H);

  const MetricData& md = pr.metrics;
  const Mat lxi = lx * md.Jxi_x + ly * md.Jxi_y;
  const Mat leta = lx * md.Jeta_x + ly * md.Jeta_y;
  pr.lps_scale = (lxi.array().square() + leta.array().square()).sqrt().matrix();

  const Index nk = op.size();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(nk * nk * mesh.num_elements()));
  const Mat& P = pr.projector.P;
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const Mat Mk = P.transpose() * op.H.cwiseProduct(pr.lps_scale.col(k)).asDiagonal() * P;
    for (Index i = 0; i < nk; ++i)
      for (Index j = 0; j < nk; ++j)
        trip.emplace_back(pr.num.elem_to_global(i, k), pr.num.elem_to_global(j, k), Mk(i, j));
  }
  pr.M_lps.resize(pr.num.n, pr.num.n);
  pr.M_lps.setFromTriplets(trip.begin(), trip.end());

  SpMat A = -lx * pr.glob.Qx - ly * pr.glob.Qy;
  if (lps_enabled) A -= pr.M_lps;
  pr.rhs_op = pr.glob.H.cwiseInverse().asDiagonal() * A;
  pr.rhs_op.prune(0.0);
  return pr;
}

double bell_ic(double x, double y) {
  const double rho2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
  if (rho2 >= 0.25) return 1.0;
  return 1.0 - std::pow(4.0 * rho2 - 1.0, 5);
}

double bell_exact(double x, double y, double t, double lx, double ly) {
  auto wrap = [](double s) { return s - std::floor(s); };
  return bell_ic(wrap(x - lx * t), wrap(y - ly * t));
}

Vec interpolate(const AdvectionProblem& prob, const std::function<double(double, double)>& f) {
  const Points xy = global_coordinates(prob.num, prob.metrics);
  Vec u(prob.num.n);
  for (Index i = 0; i < prob.num.n; ++i) u(i) = f(xy(i, 0), xy(i, 1));
  return u;
}

Vec advection_rhs(const AdvectionProblem& prob, const Vec& u) { return prob.rhs_op * u; }

Vec advection_rhs_elementwise(const AdvectionProblem& prob, const Vec& u) {
  const std::vector<ElementOps> ops = element_operators(prob.op, prob.metrics);
  const Mat& P = prob.projector.P;
  const Mat r = element_loop_apply(prob.num, u, [&](Index k, const Mat& uk) -> Mat {
    const ElementOps& e = ops[k];
    Mat out = -(prob.lx * (e.Sx * uk + 0.5 * e.Ex.cwiseProduct(uk.col(0))) +
                prob.ly * (e.Sy * uk + 0.5 * e.Ey.cwiseProduct(uk.col(0))));
    if (prob.lps_enabled)
      out -= P.transpose() * (prob.op.H.cwiseProduct(prob.lps_scale.col(k)).asDiagonal() * (P * uk));
    return out;
  });
  return r.col(0).cwiseQuotient(prob.glob.H);
}

ScalarField rk4_advance(const std::function<Vec(const Vec&)>& f, ScalarField field, double dt, long steps) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_advance: dt must be positive");
  for (long s = 0; s < steps; ++s) {
    const Vec& u = field.u;
    const Vec k1 = f(u);
    const Vec k2 = f(u + 0.5 * dt * k1);
    const Vec k3 = f(u + 0.5 * dt * k2);
    const Vec k4 = f(u + dt * k3);
    field.u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    field.time += dt;
    if (!field.u.allFinite()) {
      std::ostringstream msg;
      msg << "rk4_advance: non-finite state after step " << s + 1;
      throw Error(msg.str());
    }
  }
  return field;
}

ScalarField rk4_advance(const AdvectionProblem& prob, ScalarField field, double dt, long steps) {
  return rk4_advance([&prob](const Vec& u) -> Vec { return prob.rhs_op * u; }, std::move(field), dt, steps);
}

double l2_error(const AdvectionProblem& prob, const Vec& u, const std::function<double(double, double)>& exact) {
  const MetricData& md = prob.metrics;
  double sum = 0.0;
  for (Index k = 0; k < prob.num.num_elements(); ++k) {
    for (Index i = 0; i < prob.num.nodes_per_element(); ++i) {
      const double d = u(prob.num.elem_to_global(i, k)) - exact(md.x(i, k), md.y(i, k));
      sum += prob.op.H(i) * md.J(i, k) * d * d;
    }
  }
  return std::sqrt(sum);
}

OperatorSpectrum operator_spectrum(const AdvectionProblem& prob, Index size_cap) {
  if (prob.num.n > size_cap) {
    std::ostringstream msg;
    msg << "operator_spectrum: " << prob.num.n << " unknowns exceed the dense cap " << size_cap;
    throw InvalidArgument(msg.str());
  }
  const Mat A = Mat(prob.rhs_op);
  Eigen::EigenSolver<Mat> es(A, false);
  if (es.info() != Eigen::Success) throw ConstructionError("operator_spectrum: eigensolver failed");
  OperatorSpectrum s;
  s.max_real = -1e300;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> l = es.eigenvalues()(i);
    s.eigenvalues.push_back(l);
    s.radius = std::max(s.radius, std::abs(l));
    s.max_real = std::max(s.max_real, l.real());
  }
  return s;
}

void write_operator_spectrum_csv(std::ostream& os, const OperatorSpectrum& s) {
  os << "re,im\n";
  os.precision(17);
  for (const auto& l : s.eigenvalues) os << l.real() << ',' << l.imag() << '\n';
}

std::vector<StudyRecord> convergence_study(const ConvergenceOptions& opt) {
  if (opt.last_level - opt.first_level < 1)
    throw InvalidArgument("convergence_study: need at least two levels");
  if (opt.p < 1 || opt.p > 4) throw InvalidArgument("convergence_study: p must be in 1..4");
  const SbpTri op = build_sbp_tri(opt.p);
  const TriMesh seed = unit_square_periodic_mesh(1);

  // Spectral radius on the two coarsest levels; finer levels extrapolate
  // with the observed growth factor.
  std::vector<double> radius;
  for (int lev = opt.first_level; lev <= opt.first_level + 1; ++lev) {
    const AdvectionProblem pr =
        make_advection_problem(kernel_refine(seed, lev, opt.kernel), op, opt.lx, opt.ly, opt.lps_enabled);
    radius.push_back(operator_spectrum(pr, opt.spectrum_cap).radius);
  }
  const double growth = radius[1] / radius[0];

  std::vector<StudyRecord> rows;
  for (int lev = opt.first_level; lev <= opt.last_level; ++lev) {
    const AdvectionProblem pr =
        make_advection_problem(kernel_refine(seed, lev, opt.kernel), op, opt.lx, opt.ly, opt.lps_enabled);
    const double rho = lev <= opt.first_level + 1 ? radius[lev - opt.first_level]
                                                  : radius[1] * std::pow(growth, lev - opt.first_level - 1);
    const long steps = static_cast<long>(std::ceil(opt.final_time * rho / opt.cfl));
    const double dt = opt.final_time / steps;
    ScalarField f{interpolate(pr, bell_ic), 0.0};
    f = rk4_advance(pr, std::move(f), dt, steps);
    StudyRecord r;
    r.lev = lev;
    r.h_ref = kernel_h_ref(lev);
    r.n_dof = pr.n_dof();
    r.dt = dt;
    r.steps = steps;
    r.l2_error = l2_error(pr, f.u, [&](double x, double y) {
      return bell_exact(x, y, opt.final_time, opt.lx, opt.ly);
    });
    if (!rows.empty()) r.rate = std::log(rows.back().l2_error / r.l2_error) / std::log(3.0);
    rows.push_back(r);
  }
  return rows;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRecord>& rows) {
  os << "lev,h_ref,n_dof,dt,l2_error,rate\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.lev << ',' << r.h_ref << ',' << r.n_dof << ',' << r.dt << ',' << r.l2_error << ',' << r.rate << '\n';
}

}  // namespace csbp
