#pragma once

// Continuous-SBP discretization of the 2D Euler equations in Hadamard
// (flux-differencing) form on curvilinear triangles, with projection-based
// dissipation on the entropy variables, weak boundary fluxes, Newton's method
// with complex-step element Jacobians, and the implicit midpoint rule.

#include "csbp/assembly.hpp"
#include "csbp/euler_physics.hpp"
#include "csbp/lps.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace csbp {

/// Global field: n x 4 conservative states, one row per global node.
struct EulerField {
  Mat U;
  double time = 0.0;

  Index num_nodes() const { return U.rows(); }
  /// Throws InadmissibleState naming the first bad node.
  void check_admissible() const;
};

/// Per-node entropy variables, n x 4.
Mat entropy_vars_field(const Mat& U);

enum class BcKind { Slip, Characteristic };

using StateFunction = std::function<Eigen::Vector4d(double x, double y)>;

struct EulerOptions {
  FluxKind flux = FluxKind::IsmailRoe;
  bool lps_enabled = false;
  /// Boundary kind per face tag; every tagged boundary face needs an entry.
  std::map<std::string, BcKind> bc;
  /// Far-field state for characteristic faces.
  StateFunction exact;
};

struct BoundaryFace {
  int face = 0;
  BcKind kind = BcKind::Slip;
  std::string tag;
  std::vector<int> nodes;  ///< element-local node ids, face-rule order
  Vec B;                   ///< reference face weights
  Mat N;                   ///< scaled outward normals (nodes x 2), sum_m Lambda_m n_m
  Mat Ubc;                 ///< far-field states (nodes x 4), characteristic faces only
};

struct EulerDiscretization {
  int p = 1;
  TriMesh mesh;
  LagrangeMap map;
  SbpTri op;
  MetricData metrics;
  GlobalNumbering num;
  std::vector<ElementOps> ops;
  Vec H;  ///< global norm diagonal
  Projector projector;
  FluxKind flux = FluxKind::IsmailRoe;
  bool lps_enabled = false;
  StateFunction exact;
  std::vector<std::vector<BoundaryFace>> boundary;  ///< per element
  Points xy;                                        ///< global node coordinates

  Index num_nodes() const { return num.n; }
};

/// Throws InvalidArgument for an unknown boundary tag or a characteristic
/// face without a far-field state.
EulerDiscretization make_euler_discretization(const TriMesh& mesh, const LagrangeMap& map, int p,
                                              const EulerOptions& opt);

/// Which pieces of H du/dt to include.
struct EulerTerms {
  bool volume = true;
  bool boundary = true;
  bool lps = true;  ///< only if the discretization has LPS enabled
};

/// H du/dt as an n x 4 matrix (not divided by H).
Mat euler_residual(const EulerDiscretization& d, const Mat& U, EulerTerms terms = {});

/// du/dt of the entropy-conservative part (volume Hadamard form and boundary fluxes).
Mat euler_rhs_ec(const EulerDiscretization& d, const Mat& U);

/// -H^{-1} sum_k R^T P^T H_k A_k P R W(U), regardless of d.lps_enabled.
Mat lps_entropy_rhs(const EulerDiscretization& d, const Mat& U);

/// Total du/dt.
Mat euler_rhs(const EulerDiscretization& d, const Mat& U);

/// d(euler_residual)/dU with unknowns ordered 4 * node + component.
SpMat euler_jacobian(const EulerDiscretization& d, const Mat& U, EulerTerms terms = {});

/// n x 4 <-> 4n with index 4 * node + component.
Vec flatten(const Mat& U);
Mat unflatten(const Vec& u);

/// Full Hadamard form -2 sum_m (S_m o F_m) 1 built with dense flux matrices,
/// element by element; a brute-force reference for the stencil loop.
Mat euler_volume_dense(const EulerDiscretization& d, const Mat& U);

/// sum_i H_i S(U_i).
double total_entropy(const EulerDiscretization& d, const Mat& U);

/// Maximum over nodes of |u| + a.
double max_wave_speed(const Mat& U);

/// Smallest inradius of the straight triangles spanned by the mapped corners.
double min_inradius(const EulerDiscretization& d);

struct NewtonOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iter = 30;
  int max_halvings = 20;
  /// Initial pseudo-time step for solve_steady; 0 disables continuation.
  double pseudo_dt = 0.0;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< infinity norms, starting with the initial guess
  bool converged = false;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<SpMat(const Vec&)>;
using AdmissibleFn = std::function<bool(const Vec&)>;

/// Newton's method with a sparse LU solve and step halving. Stops when
/// ||G||_inf <= max(rel_tol ||G(x0)||_inf, abs_tol). Throws Error on
/// line-search failure, a singular Jacobian, or max_iter. A step that fails
/// the line search but is below 1e-14 relative to x ends the iteration: the
/// residual has reached its roundoff floor.
Vec newton_solve(const ResidualFn& G, const JacobianFn& J, Vec x0, const NewtonOptions& opt,
                 NewtonReport* report = nullptr, const AdmissibleFn& admissible = {});

/// Newton on euler_residual(U) = 0. With opt.pseudo_dt > 0 the iteration
/// solves (H / dtau - dR/dU) dU = R, growing dtau by the residual ratio, so
/// it can start far from the solution (e.g. from a uniform state).
EulerField solve_steady(const EulerDiscretization& d, EulerField U0, const NewtonOptions& opt,
                        NewtonReport* report = nullptr);

struct EntropyTraceRow {
  long step = 0;
  double time = 0.0;
  double total_entropy = 0.0;
  double delta_entropy = 0.0;  ///< 1^T H (s^k - s^{k-1})
};

/// H (U^{k+1} - U^k) = dt R((U^k + U^{k+1}) / 2), solved by Newton each
/// step; the Newton tolerances apply to this dt-scaled residual. The trace
/// starts with step 0. Throws Error naming the failing step.
EulerField implicit_midpoint_advance(const EulerDiscretization& d, EulerField field, double dt, long steps,
                                     const NewtonOptions& opt, std::vector<EntropyTraceRow>* trace = nullptr);

// Steady isentropic vortex on the quarter annulus.

struct VortexPrimitive {
  double rho = 0.0;
  double speed = 0.0;  ///< counter-clockwise tangential speed
  double p = 0.0;
};

inline constexpr double kVortexRhoIn = 2.0;
inline constexpr double kVortexMachIn = 0.95;

/// Throws InvalidArgument for r < 1.
VortexPrimitive vortex_exact(double r);

/// Conservative vortex state at (x, y).
Eigen::Vector4d vortex_state(double x, double y);

/// -p(r = 1), the x-force of the exact vortex on the inner arc.
double vortex_exact_drag();

/// sum over "inner" faces of B p N_x at the face nodes.
double drag_functional(const EulerDiscretization& d, const Mat& U, const std::string& tag = "inner");

/// Slip on "inner", characteristic with the exact vortex elsewhere.
EulerDiscretization make_vortex_discretization(int N, int p, bool lps_enabled = true,
                                               FluxKind flux = FluxKind::IsmailRoe);

/// sqrt(sum_k sum_i H_i J_i (rho - rho*)^2).
double density_l2_error(const EulerDiscretization& d, const Mat& U);

/// Nodal interpolant of a state function.
Mat interpolate_state(const EulerDiscretization& d, const StateFunction& f);

struct VortexRecord {
  int N = 0;
  int p = 1;
  Index n_dof = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;
  double density_error = 0.0;
  double drag = 0.0;
  double drag_error = 0.0;
  double density_rate = 0.0;  ///< against the previous record, log2 for N doubling
  double drag_rate = 0.0;
};

/// Newton is started from the exact nodal solution.
std::vector<VortexRecord> vortex_convergence(int p, const std::vector<int>& Ns, bool lps_enabled = true,
                                             FluxKind flux = FluxKind::IsmailRoe,
                                             const NewtonOptions& opt = {});

void write_vortex_csv(std::ostream& os, const std::vector<VortexRecord>& rows);

// Periodic entropy experiments.

/// [1.1, 0, 0, 5.1] if 1/3 <= x, y <= 2/3, else [1, 0, 0, 5].
Eigen::Vector4d discontinuous_ic(double x, double y);

EulerDiscretization make_warped_periodic_discretization(int p, bool lps_enabled,
                                                        FluxKind flux = FluxKind::IsmailRoe);

struct EntropyTraceOptions {
  int p = 1;
  bool lps_enabled = false;
  double cfl = 0.1;
  double final_time = 1.0;
  FluxKind flux = FluxKind::IsmailRoe;
  NewtonOptions newton{1e-13, 1e-17, 30, 20};
};

struct EntropyTraceResult {
  double dt = 0.0;
  long steps = 0;
  std::vector<EntropyTraceRow> trace;
  EulerField final_field;
  double max_abs_delta = 0.0;
  double max_delta = 0.0;
};

/// Discontinuous IC on the warped periodic mesh; dt = cfl h_min / sigma_max.
EntropyTraceResult entropy_trace_study(const EntropyTraceOptions& opt);

/// step,time,total_entropy,delta_entropy
void write_entropy_trace_csv(std::ostream& os, const std::vector<EntropyTraceRow>& rows);

/// x,y,rho,rho_u,rho_v,e
void write_nodal_csv(std::ostream& os, const EulerDiscretization& d, const Mat& U);

}  // namespace csbp
