// Acceptance checks: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is nonzero if any criterion fails.

#include "csbp/advection.hpp"
#include "csbp/euler.hpp"
#include "csbp/lps.hpp"
#include "csbp/ref1d.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace csbp;
using V4 = Eigen::Vector4d;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::ostringstream line;
  line << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << name << "; " << o.detail << "; "
       << std::setprecision(3) << secs << " s (budget " << budget_s << " s" << (in_time ? "" : ", exceeded") << ")";
  std::cout << line.str() << std::endl;
}

std::string num(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

Mat random_euler_field(Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> r(0.5, 2.0), u(-0.5, 0.5), p(0.5, 2.0);
  Mat U(n, 4);
  for (Index i = 0; i < n; ++i) U.row(i) = conservative(r(rng), u(rng), u(rng), p(rng)).transpose();
  return U;
}

// W^T H rhs and the matching magnitude sum used as the relative scale.
std::pair<double, double> entropy_product(const EulerDiscretization& d, const Mat& U, const Mat& rhs) {
  const Mat W = entropy_vars_field(U);
  const Mat Hr = d.H.asDiagonal() * rhs;
  return {(W.array() * Hr.array()).sum(), (W.cwiseAbs().array() * Hr.cwiseAbs().array()).sum()};
}

Outcome table1() {
  const double paper[] = {1.0, 3.0, 675.0, 44100.0};
  Outcome o{true, "alpha"};
  for (int p = 0; p <= 3; ++p) {
    const Sbp1D op = build_sbp_1d(p, p + 2);
    const Vec ones = Vec::Ones(op.n);
    const RankOneEquivalence eq = rank_one_equivalence(derivative_dissipation_1d(op, p + 1, ones).matrix,
                                                       lps_dissipation_1d(op, legendre_vandermonde(p, op.nodes, op.H), ones));
    const bool ok = std::abs(eq.alpha - paper[p]) <= 1e-9 * paper[p];
    o.pass &= ok;
    o.detail += " p" + std::to_string(p) + "=" + num(eq.alpha, 12) + (ok ? "" : " (paper " + num(paper[p]) + ")");
  }
  return o;
}

Outcome table2_projection() {
  Outcome o{true, "ratio/zeros"};
  for (int p = 0; p <= 4; ++p) {
    const SbpTri op = build_sbp_tri(p);
    const Index n = op.size(), np = op.basis.size();
    const Spectrum s = dissipation_spectrum(lps_matrix(projector_exact(op.basis.L, op.H), op.H, Mat::Identity(n, n)).M, op.H);
    o.pass &= std::abs(s.ratio - 1.0) <= 1e-8 && s.zero_count == np;
    o.detail += " p" + std::to_string(p) + "=" + num(s.ratio, 10) + "/" + std::to_string(s.zero_count);
  }
  return o;
}

Outcome table2_derivative() {
  const double paper[] = {3.00, 16.65, 13.28, 91.43, 743.93};
  double ratio[5], proj[5];
  bool match = true;
  Outcome o{true, "ratios"};
  for (int p = 0; p <= 4; ++p) {
    const SbpTri op = build_sbp_tri(p);
    const Index n = op.size();
    const Vec ones = Vec::Ones(n);
    ratio[p] = dissipation_spectrum(derivative_dissipation_tri(op, p + 1, ones, ones), op.H).ratio;
    proj[p] = dissipation_spectrum(lps_matrix(projector_exact(op.basis.L, op.H), op.H, Mat::Identity(n, n)).M, op.H).ratio;
    const bool m = std::abs(ratio[p] - paper[p]) <= 0.02 * paper[p];
    match &= m;
    o.detail += " p" + std::to_string(p) + "=" + num(ratio[p], 6) + (m ? "" : " (paper " + num(paper[p], 3) + ")");
  }
  if (match) {
    o.detail += "; all within 2% of the paper";
    return o;
  }
  bool fallback = ratio[4] > 100.0 * ratio[0];
  for (int p = 1; p <= 4; ++p) fallback &= ratio[p] > proj[p];
  o.pass = fallback;
  o.detail += std::string("; not all within 2%, fallback property ") + (fallback ? "holds" : "fails") +
              " (derivative > projection for p>=1, ratio(4)/ratio(0) = " + num(ratio[4] / ratio[0], 5) + ")";
  return o;
}

Outcome printed_matrices() {
  Mat Pp(5, 5), Mp(5, 5);
  Pp << 2, -4, 2, 0, 0, -1, 2, -1, 0, 0, 0, -1, 2, -1, 0, 0, 0, -1, 2, -1, 0, 0, 2, -4, 2;
  Mp << 6, -12, 6, 0, 0, -12, 26, -16, 2, 0, 6, -16, 20, -16, 6, 0, 2, -16, 26, -12, 0, 0, 6, -12, 6;
  const Projector P = projector_fd(5);
  const double h = 1.0;
  Vec H(5);
  H << 1, 2, 2, 2, 1;
  H *= h / 2;
  const double eP = (P.P - 0.5 * Pp).cwiseAbs().maxCoeff();
  const double eM = (lps_matrix(P, H, Mat::Identity(5, 5)).M - h / 8 * Mp).cwiseAbs().maxCoeff();
  return {eP <= 1e-14 && eM <= 1e-14, "projector error " + num(eP, 3) + ", LPS matrix error " + num(eM, 3)};
}

Outcome energy() {
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  double worst_off = 0.0, worst_on = -1e300;
  for (bool lps : {false, true}) {
    const AdvectionProblem pr = make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), 1, Kernel::Perturbed),
                                                       build_sbp_tri(2), 1.0, 0.5, lps);
    for (int t = 0; t < 100; ++t) {
      Vec u(pr.n_dof());
      for (Index i = 0; i < u.size(); ++i) u(i) = N(rng);
      const double rate = u.dot(pr.glob.H.cwiseProduct(advection_rhs(pr, u))) / u.dot(pr.glob.H.cwiseProduct(u));
      if (lps) {
        worst_on = std::max(worst_on, rate);
      } else {
        worst_off = std::max(worst_off, std::abs(rate));
      }
    }
  }
  return {worst_off <= 1e-12 && worst_on <= 1e-12,
          "LPS off max |u^T H rhs|/|u|_H^2 = " + num(worst_off, 3) + ", LPS on max = " + num(worst_on, 3)};
}

Outcome advection_rates() {
  Outcome o{true, "finest rates"};
  for (int p = 1; p <= 2; ++p) {
    ConvergenceOptions opt;
    opt.p = p;
    const auto rows = convergence_study(opt);
    const double rate = rows.back().rate;
    o.pass &= rate >= p + 0.5;
    o.detail += " p" + std::to_string(p) + "=" + num(rate, 4) + " (>= " + num(p + 0.5) + ", error " +
                num(rows.back().l2_error, 3) + ")";
  }
  return o;
}

Outcome spectrum_structure() {
  Outcome o{true, ""};
  double radius[3];
  for (int lev = 0; lev <= 2; ++lev) {
    for (bool lps : {false, true}) {
      const AdvectionProblem pr =
          make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), lev), build_sbp_tri(1), 1.0, 1.0, lps);
      const OperatorSpectrum s = operator_spectrum(pr);
      if (lps) {
        o.pass &= s.max_real <= 1e-10 * s.radius;
      } else {
        double re = 0.0;
        for (const auto& z : s.eigenvalues) re = std::max(re, std::abs(z.real()));
        o.pass &= re <= 1e-8 * s.radius;
        radius[lev] = s.radius;
        o.detail += "lev" + std::to_string(lev) + " max|Re|/rho " + num(re / s.radius, 3) + ", ";
      }
    }
  }
  for (int lev = 1; lev <= 2; ++lev) {
    const double g = radius[lev] / radius[lev - 1];
    o.pass &= g >= 2.5 && g <= 3.5;
    o.detail += "growth " + std::to_string(lev - 1) + "->" + std::to_string(lev) + " = " + num(g, 4) + (lev == 1 ? ", " : "");
  }
  return o;
}

Outcome entropy_sweep(bool stability) {
  std::mt19937 rng(stability ? 9 : 8);
  double worst = stability ? -1e300 : 0.0;
  for (int p = 1; p <= 4; ++p) {
    const EulerDiscretization d = make_warped_periodic_discretization(p, true);
    for (int t = 0; t <= 20; ++t) {
      const Mat U = t < 20 ? random_euler_field(d.num_nodes(), rng) : interpolate_state(d, discontinuous_ic);
      const auto [prod, scale] = entropy_product(d, U, stability ? euler_rhs(d, U) : euler_rhs_ec(d, U));
      worst = stability ? std::max(worst, prod / scale) : std::max(worst, std::abs(prod) / scale);
    }
  }
  if (stability) return {worst <= 1e-11, "max W^T H rhs / scale = " + num(worst, 3) + " (<= 0 + 1e-11)"};
  return {worst <= 1e-11, "max |W^T H rhs_EC| / scale = " + num(worst, 3)};
}

Outcome entropy_traces() {
  EntropyTraceOptions ec;
  ec.p = 1;
  ec.lps_enabled = false;
  ec.final_time = 1.0;
  ec.cfl = 0.1;
  const EntropyTraceResult a = entropy_trace_study(ec);
  ec.cfl = 0.01;
  const EntropyTraceResult b = entropy_trace_study(ec);
  const double ratio = a.max_abs_delta / b.max_abs_delta;
  const double drift_a = std::abs(a.trace.back().total_entropy - a.trace.front().total_entropy);
  const double drift_b = std::abs(b.trace.back().total_entropy - b.trace.front().total_entropy);

  EntropyTraceOptions es = ec;
  es.lps_enabled = true;
  es.cfl = 0.1;
  const EntropyTraceResult c = entropy_trace_study(es);
  const bool ec_ok = ratio >= 50.0 && ratio <= 200.0;
  const bool es_ok = c.max_delta <= 0.0;
  return {ec_ok && es_ok, "EC max|ds| " + num(a.max_abs_delta, 3) + " / " + num(b.max_abs_delta, 3) + " = ratio " +
                              num(ratio, 4) + " (band [50, 200]) " + (ec_ok ? "ok" : "outside band") +
                              ", net drift ratio " + num(drift_a / drift_b, 4) + "; ES " + std::to_string(c.steps) +
                              " steps, max ds " + num(c.max_delta, 3) + (es_ok ? " <= 0" : " > 0")};
}

Outcome vortex() {
  Outcome o{true, ""};
  for (int p = 1; p <= 2; ++p) {
    const auto rows = vortex_convergence(p, {4, 8, 16});
    const double rr = rows.back().density_rate;
    o.pass &= rr >= p + 0.5;
    for (const auto& r : rows) o.pass &= r.final_residual <= 1e-10;
    o.detail += "p" + std::to_string(p) + " density rate " + num(rr, 4) + " (>= " + num(p + 0.5) + ")";
    if (p == 1) {
      const double dr = rows.back().drag_rate;
      o.pass &= dr >= 2.5;
      o.detail += ", drag rate " + num(dr, 4) + " (>= 2.5); ";
    } else {
      o.detail += ", drag rate " + num(rows.back().drag_rate, 4) + " (info)";
    }
  }
  return o;
}

Outcome flux_oracle() {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> r(0.1, 5.0), u(-3.0, 3.0), p(0.05, 10.0);
  double sym = 0.0, cons = 0.0, tadmor = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const V4 L = conservative(r(rng), u(rng), u(rng), p(rng)), R = conservative(r(rng), u(rng), u(rng), p(rng));
    const EntropyPotentials eL = entropy_and_potentials(L), eR = entropy_and_potentials(R);
    const V4 dW = entropy_vars(L) - entropy_vars(R);
    for (int dir = 0; dir < 2; ++dir) {
      const V4 f = ec_flux(dir, L, R);
      const double fs = f.cwiseAbs().maxCoeff();
      sym = std::max(sym, (f - ec_flux(dir, R, L)).cwiseAbs().maxCoeff() / fs);
      const V4 F = euler_flux(L, dir == 0 ? 1.0 : 0.0, dir == 0 ? 0.0 : 1.0);
      cons = std::max(cons, (ec_flux(dir, L, L) - F).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff());
      const double psi = dir == 0 ? eL.psi_x - eR.psi_x : eL.psi_y - eR.psi_y;
      tadmor = std::max(tadmor, std::abs(dW.dot(f) - psi) / (dW.cwiseAbs().dot(f.cwiseAbs()) + std::abs(psi)));
    }
  }
  return {sym <= 1e-12 && cons <= 1e-12 && tadmor <= 1e-12,
          "symmetry " + num(sym, 3) + ", consistency " + num(cons, 3) + ", Tadmor " + num(tadmor, 3)};
}

}  // namespace

int main() {
  run(1, "1D rank-one equivalence factors", 1.0, table1);
  run(2, "triangle projection spectra", 5.0, table2_projection);
  run(3, "triangle derivative spectra", 60.0, table2_derivative);
  run(4, "reconstruction projector and LPS matrix", 1.0, printed_matrices);
  run(5, "semi-discrete energy balance", 10.0, energy);
  run(6, "advection convergence", 600.0, advection_rates);
  run(7, "advection spectrum structure", 120.0, spectrum_structure);
  run(8, "entropy conservation", 120.0, [] { return entropy_sweep(false); });
  run(9, "entropy stability", 120.0, [] { return entropy_sweep(true); });
  run(10, "fully discrete entropy traces", 1200.0, entropy_traces);
  run(11, "vortex accuracy", 900.0, vortex);
  run(12, "two-point flux oracle", 5.0, flux_oracle);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
