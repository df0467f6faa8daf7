#pragma once

// Continuous-SBP discretization of constant-coefficient advection
//   u_t + lx u_x + ly u_y = 0
// on affine periodic meshes, with local-projection stabilization, RK4 time
// marching, spectra and convergence studies.

#include "csbp/assembly.hpp"
#include "csbp/lps.hpp"

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

namespace csbp {

struct AdvectionProblem {
  double lx = 1.0, ly = 1.0;
  bool lps_enabled = true;
  TriMesh mesh;
  SbpTri op;
  MetricData metrics;
  GlobalNumbering num;
  GlobalOperator glob;
  Projector projector;
  /// n_k x K LPS scaling sqrt(l_xi^2 + l_eta^2) per node and element.
  Mat lps_scale;
  /// Assembled global LPS matrix sum R^T P^T H_k A_k P R.
  SpMat M_lps;
  /// Assembled right-hand-side operator H^{-1} (-lx Qx - ly Qy - M_lps).
  SpMat rhs_op;

  Index n_dof() const { return num.n; }
};

/// Affine (degree-1 map) problem on `mesh` with the degree-p triangle operator.
AdvectionProblem make_advection_problem(const TriMesh& mesh, const SbpTri& op, double lx, double ly,
                                        bool lps_enabled);

/// 1 - (4 rho^2 - 1)^5 for rho < 1/2, else 1, rho the distance to (1/2, 1/2).
double bell_ic(double x, double y);

/// Nodal interpolant of f on the global nodes.
Vec interpolate(const AdvectionProblem& prob, const std::function<double(double, double)>& f);

/// -(lx Dx + ly Dy) u - H^{-1} sum_k R^T P^T H_k A_k P R u, assembled form.
Vec advection_rhs(const AdvectionProblem& prob, const Vec& u);

/// The same right-hand side evaluated element by element.
Vec advection_rhs_elementwise(const AdvectionProblem& prob, const Vec& u);

struct ScalarField {
  Vec u;
  double time = 0.0;
};

/// Classical four-stage Runge-Kutta for du/dt = f(u). Throws Error naming the
/// step at which the state became non-finite.
ScalarField rk4_advance(const std::function<Vec(const Vec&)>& f, ScalarField field, double dt, long steps);
ScalarField rk4_advance(const AdvectionProblem& prob, ScalarField field, double dt, long steps);

/// sqrt(sum_k (u - u*)^T J H_k (u - u*)) over elements, u* evaluated at the nodes.
double l2_error(const AdvectionProblem& prob, const Vec& u, const std::function<double(double, double)>& exact);

/// Periodic translate of the bell at time t.
double bell_exact(double x, double y, double t, double lx, double ly);

struct OperatorSpectrum {
  std::vector<std::complex<double>> eigenvalues;
  double radius = 0.0;
  double max_real = 0.0;
};

/// Dense eigensolve of the assembled right-hand-side operator. Throws
/// InvalidArgument when n_dof exceeds `size_cap`.
OperatorSpectrum operator_spectrum(const AdvectionProblem& prob, Index size_cap = 4000);

/// CSV with columns re,im.
void write_operator_spectrum_csv(std::ostream& os, const OperatorSpectrum& s);

struct StudyRecord {
  int lev = 0;
  double h_ref = 0.0;
  Index n_dof = 0;
  double dt = 0.0;
  long steps = 0;
  double l2_error = 0.0;
  double rate = 0.0;  ///< log(e_{lev-1}/e_lev) / log 3, zero on the first level
};

struct ConvergenceOptions {
  int p = 1;
  int first_level = 1;
  int last_level = 3;
  bool lps_enabled = true;
  double cfl = 1.0;  ///< dt * spectral radius
  double final_time = 1.0;
  double lx = 1.0, ly = 1.0;
  Kernel kernel = Kernel::Uniform;
  Index spectrum_cap = 4000;
};

/// Bell advected to final_time on the periodic unit square refined from the
/// two-triangle seed. The time step comes from dense spectral radii on the
/// two coarsest levels extrapolated by their growth factor.
std::vector<StudyRecord> convergence_study(const ConvergenceOptions& opt);

/// CSV with columns lev,h_ref,n_dof,dt,l2_error,rate.
void write_study_csv(std::ostream& os, const std::vector<StudyRecord>& rows);

}  // namespace csbp
