// csbp: operator verification, fixtures, spectra, advection and Euler studies.
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error.

#include "csbp/advection.hpp"
#include "csbp/euler.hpp"
#include "csbp/io.hpp"
#include "csbp/lps.hpp"
#include "csbp/ref1d.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace csbp;

namespace {

// Exception type for check failures, mapped to exit code 1.
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Checks {
 public:
  void report(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    failed_ |= !ok;
  }
  int exit_code() const { return failed_ ? 1 : 0; }

 private:
  bool failed_ = false;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  std::cout << "wrote " << path << '\n';
  return out;
}

// ops-verify ---------------------------------------------------------------

struct OpsVerifyConfig {
  int p = 1;
  std::string fixture;
  std::string cubature_fixture;
};

int cmd_ops_verify(const OpsVerifyConfig& c) {
  Checks checks;
  const std::string cub_path = c.cubature_fixture.empty() ? cubature_fixture_path(c.p) : c.cubature_fixture;
  const std::string op_path = c.fixture.empty() ? operator_fixture_path(c.p) : c.fixture;

  TriCubature cub;
  try {
    cub = cubature_from_json(read_json_file(cub_path));
    checks.report(true, "cubature fixture", cub_path + ", degree " + std::to_string(2 * c.p) + " moments " +
                                                fmt(verify_cubature(cub, 2 * c.p), 3));
  } catch (const Error& e) {
    checks.report(false, "cubature fixture", e.what());
  }

  SbpTri op;
  bool have_op = false;
  try {
    op = sbp_tri_from_json(read_json_file(op_path));
    have_op = true;
    checks.report(true, "operator fixture", op_path + ", " + verify_sbp(op).summary());
  } catch (const Error& e) {
    checks.report(false, "operator fixture", e.what());
  }

  const SbpTri fresh = build_sbp_tri(c.p);
  const SbpReport rep = verify_sbp(fresh);
  checks.report(rep.ok(), "constructed operator", rep.summary());
  if (have_op) {
    const double diff = std::max({(op.Qxi() - fresh.Qxi()).cwiseAbs().maxCoeff(),
                                  (op.Qeta() - fresh.Qeta()).cwiseAbs().maxCoeff(),
                                  (op.H - fresh.H).cwiseAbs().maxCoeff()});
    checks.report(diff <= 1e-10, "fixture matches construction", "max entry difference " + fmt(diff, 3));
  }

  // One-dimensional derivative/projection equivalence on p + 2 LGL nodes.
  const Sbp1D op1 = build_sbp_1d(c.p, c.p + 2);
  const Vec ones1 = Vec::Ones(op1.n);
  const Vandermonde1D V = legendre_vandermonde(c.p, op1.nodes, op1.H);
  try {
    const RankOneEquivalence eq = rank_one_equivalence(derivative_dissipation_1d(op1, c.p + 1, ones1).matrix,
                                                       lps_dissipation_1d(op1, V, ones1));
    checks.report(true, "1D rank-one equivalence", "alpha = " + fmt(eq.alpha, 12));
  } catch (const Error& e) {
    checks.report(false, "1D rank-one equivalence", e.what());
  }

  const SbpTri& tri = have_op ? op : fresh;
  const Index n = tri.size();
  const Projector P = projector_exact(tri.basis.L, tri.H);
  const Spectrum sp = dissipation_spectrum(lps_matrix(P, tri.H, Mat::Identity(n, n)).M, tri.H);
  const Index np = (c.p + 1) * (c.p + 2) / 2;
  checks.report(std::abs(sp.ratio - 1.0) <= 1e-8 && sp.zero_count == np, "projection spectrum",
                "ratio " + fmt(sp.ratio, 12) + ", zero eigenvalues " + std::to_string(sp.zero_count) + " (expect " +
                    std::to_string(np) + ")");
  const Vec ones = Vec::Ones(n);
  const Spectrum sd = dissipation_spectrum(derivative_dissipation_tri(tri, c.p + 1, ones, ones), tri.H);
  std::cout << "INFO derivative spectrum: ratio " << fmt(sd.ratio, 6) << ", zero eigenvalues " << sd.zero_count
            << '\n';
  return checks.exit_code();
}

// cubature -------------------------------------------------------------------

struct CubatureConfig {
  int p = 1;
  std::string out;
  std::string verify;
  bool bundle = false;
};

int cmd_cubature(const CubatureConfig& c) {
  if (!c.verify.empty()) {
    const Json j = read_json_file(c.verify);
    if (j.contains("cubature")) {
      const SbpTri op = sbp_tri_from_json(j);
      std::cout << "PASS operator bundle " << c.verify << ": " << verify_sbp(op).summary() << '\n';
    } else {
      const TriCubature cub = cubature_from_json(j);
      std::cout << "PASS cubature " << c.verify << ": p = " << cub.p << ", " << cub.size() << " nodes, moments "
                << fmt(verify_cubature(cub, 2 * cub.p), 3) << '\n';
    }
    return 0;
  }
  Json j;
  if (c.bundle) {
    const SbpTri op = build_sbp_tri(c.p);
    const SbpReport rep = verify_sbp(op);
    if (!rep.ok()) throw CheckFailure("constructed operator fails verification: " + rep.summary());
    j = sbp_tri_to_json(op);
  } else {
    const TriCubature cub = build_tri_cubature(c.p);
    const std::string why = validate_cubature(cub);
    if (!why.empty()) throw CheckFailure("constructed rule invalid: " + why);
    j = cubature_to_json(cub);
  }
  if (c.out.empty()) {
    std::cout << j.dump(1) << '\n';
  } else {
    fs::path path(c.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_json_file(c.out, j);
    std::cout << "wrote " << c.out << '\n';
  }
  return 0;
}

// spectra ------------------------------------------------------------------

struct SpectraConfig {
  int p = 1;
  std::string kind = "projection";
  int level = 1;
  bool lps = true;
  std::string out = "out";
};

int cmd_spectra(const SpectraConfig& c) {
  if (c.kind == "advection") {
    if (c.p < 1) throw InvalidArgument("spectra: advection needs p >= 1");
    const AdvectionProblem pr =
        make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), c.level), build_sbp_tri(c.p), 1.0, 1.0,
                               c.lps);
    const OperatorSpectrum s = operator_spectrum(pr);
    auto out = open_out(c.out, "advection_spectrum_p" + std::to_string(c.p) + "_lev" + std::to_string(c.level) +
                                   (c.lps ? "_lps" : "_nolps") + ".csv");
    write_operator_spectrum_csv(out, s);
    std::cout << "n_dof " << pr.n_dof() << ", spectral radius " << fmt(s.radius, 10) << ", max real part "
              << fmt(s.max_real, 3) << '\n';
    return 0;
  }
  const SbpTri op = build_sbp_tri(c.p);
  const Index n = op.size();
  Mat M;
  if (c.kind == "projection") {
    M = lps_matrix(projector_exact(op.basis.L, op.H), op.H, Mat::Identity(n, n)).M;
  } else if (c.kind == "derivative") {
    M = derivative_dissipation_tri(op, c.p + 1, Vec::Ones(n), Vec::Ones(n));
  } else {
    throw InvalidArgument("spectra: kind must be projection, derivative or advection");
  }
  const Spectrum s = dissipation_spectrum(M, op.H);
  auto out = open_out(c.out, c.kind + "_spectrum_p" + std::to_string(c.p) + ".csv");
  write_spectrum_csv(out, s);
  std::cout << c.kind << " p = " << c.p << ": ratio " << fmt(s.ratio, 8) << ", zero eigenvalues " << s.zero_count
            << '\n';
  return 0;
}

// advect -------------------------------------------------------------------

struct AdvectConfig {
  int p = 1;
  int first_level = 1;
  int last_level = 3;
  bool lps = true;
  double cfl = 1.0;
  double final_time = 1.0;
  std::string kernel = "uniform";
  double min_rate = 0.0;
  std::string out = "out";
};

int cmd_advect(const AdvectConfig& c) {
  ConvergenceOptions o;
  o.p = c.p;
  o.first_level = c.first_level;
  o.last_level = c.last_level;
  o.lps_enabled = c.lps;
  o.cfl = c.cfl;
  o.final_time = c.final_time;
  if (c.kernel == "uniform") {
    o.kernel = Kernel::Uniform;
  } else if (c.kernel == "perturbed") {
    o.kernel = Kernel::Perturbed;
  } else {
    throw InvalidArgument("advect: kernel must be uniform or perturbed");
  }
  const std::vector<StudyRecord> rows = convergence_study(o);
  const std::string tag = "p" + std::to_string(c.p) + (c.lps ? "_lps" : "_nolps");
  {
    auto out = open_out(c.out, "advect_" + tag + ".csv");
    write_study_csv(out, rows);
  }
  write_study_csv(std::cout, rows);
  const AdvectionProblem pr = make_advection_problem(
      kernel_refine(unit_square_periodic_mesh(1), c.first_level, o.kernel), build_sbp_tri(c.p), 1.0, 1.0, c.lps);
  const OperatorSpectrum s = operator_spectrum(pr);
  auto out = open_out(c.out, "advect_spectrum_" + tag + "_lev" + std::to_string(c.first_level) + ".csv");
  write_operator_spectrum_csv(out, s);
  std::cout << "spectrum level " << c.first_level << ": radius " << fmt(s.radius, 8) << ", max real part "
            << fmt(s.max_real, 3) << '\n';
  if (c.min_rate > 0.0) {
    Checks checks;
    checks.report(rows.back().rate >= c.min_rate, "finest-level rate",
                  fmt(rows.back().rate, 4) + " (required >= " + fmt(c.min_rate, 4) + ")");
    return checks.exit_code();
  }
  return 0;
}

// euler --------------------------------------------------------------------

struct EulerConfig {
  std::string study = "vortex-converge";
  int p = 1;
  std::vector<int> N{4, 8, 16};
  bool lps = true;
  std::string flux = "ismail-roe";
  std::string init = "exact";
  std::vector<double> cfl{0.1, 0.01};
  double final_time = 1.0;
  double min_rate = 0.0;
  std::string out = "out";
};

FluxKind parse_flux(const std::string& s) {
  if (s == "ismail-roe") return FluxKind::IsmailRoe;
  if (s == "chandrashekar") return FluxKind::Chandrashekar;
  throw InvalidArgument("euler: flux must be ismail-roe or chandrashekar");
}

int cmd_vortex(const EulerConfig& c) {
  const FluxKind flux = parse_flux(c.flux);
  if (c.init != "exact" && c.init != "free-stream") throw InvalidArgument("euler: init must be exact or free-stream");
  std::vector<VortexRecord> rows;
  if (c.init == "exact") {
    rows = vortex_convergence(c.p, c.N, c.lps, flux);
  } else {
    // Quiescent uniform start; pseudo-transient continuation carries Newton in.
    const double exact_drag = vortex_exact_drag();
    for (int N : c.N) {
      const EulerDiscretization d = make_vortex_discretization(N, c.p, c.lps, flux);
      const VortexPrimitive far = vortex_exact(3.0);
      const Eigen::Vector4d U0 = conservative(far.rho, 0.0, 0.0, far.p);
      NewtonOptions opt;
      opt.pseudo_dt = 1.0;
      opt.max_iter = 200;
      NewtonReport rep;
      const EulerField f = solve_steady(d, EulerField{interpolate_state(d, [&](double, double) { return U0; }), 0.0},
                                        opt, &rep);
      VortexRecord r;
      r.N = N;
      r.p = c.p;
      r.n_dof = d.num_nodes();
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
  }
  {
    auto out = open_out(c.out, "vortex_p" + std::to_string(c.p) + ".csv");
    write_vortex_csv(out, rows);
  }
  write_vortex_csv(std::cout, rows);
  Checks checks;
  for (const auto& r : rows)
    checks.report(r.final_residual <= 1e-10, "Newton N=" + std::to_string(r.N),
                  std::to_string(r.newton_iterations) + " iterations, residual " + fmt(r.final_residual, 3));
  if (c.min_rate > 0.0 && rows.size() > 1)
    checks.report(rows.back().density_rate >= c.min_rate, "density rate",
                  fmt(rows.back().density_rate, 4) + " (required >= " + fmt(c.min_rate, 4) + ")");
  return checks.exit_code();
}

int cmd_entropy_trace(const EulerConfig& c) {
  Checks checks;
  std::vector<double> amplitude;
  for (double cfl : c.cfl) {
    EntropyTraceOptions o;
    o.p = c.p;
    o.lps_enabled = c.lps;
    o.cfl = cfl;
    o.final_time = c.final_time;
    o.flux = parse_flux(c.flux);
    const EntropyTraceResult r = entropy_trace_study(o);
    std::ostringstream name;
    name << "entropy_trace_p" << c.p << (c.lps ? "_es" : "_ec") << "_cfl" << cfl;
    {
      auto out = open_out(c.out, name.str() + ".csv");
      write_entropy_trace_csv(out, r.trace);
    }
    {
      auto out = open_out(c.out, name.str() + "_final.csv");
      write_nodal_csv(out, make_warped_periodic_discretization(c.p, c.lps, o.flux), r.final_field.U);
    }
    std::cout << "cfl " << cfl << ": dt " << fmt(r.dt, 8) << ", " << r.steps << " steps, max |delta_entropy| "
              << fmt(r.max_abs_delta, 4) << ", max delta_entropy " << fmt(r.max_delta, 4) << ", total change "
              << fmt(r.trace.back().total_entropy - r.trace.front().total_entropy, 4) << '\n';
    amplitude.push_back(r.max_abs_delta);
    if (c.lps)
      checks.report(r.max_delta <= 0.0, "entropy decay at cfl " + fmt(cfl, 3),
                    "max delta_entropy " + fmt(r.max_delta, 4));
  }
  if (!c.lps && amplitude.size() == 2) {
    const double ratio = amplitude[0] / amplitude[1];
    checks.report(ratio >= 50.0 && ratio <= 200.0, "entropy amplitude ratio",
                  fmt(ratio, 4) + " (band [50, 200])");
  }
  return checks.exit_code();
}

int cmd_euler(const EulerConfig& c) {
  if (c.study == "vortex-converge") return cmd_vortex(c);
  if (c.study == "entropy-trace") return cmd_entropy_trace(c);
  throw InvalidArgument("euler: study must be vortex-converge or entropy-trace");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csbp: continuous summation-by-parts operators, stabilization and flow studies"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "flat key = value file, one [section] per subcommand");
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit")->configurable(false);
  app.require_subcommand(1);

  OpsVerifyConfig ov;
  auto* s_ov = app.add_subcommand("ops-verify", "verify operator fixtures, 1D equivalence and LPS spectra");
  s_ov->add_option("--p", ov.p, "degree")->check(CLI::Range(0, 4));
  s_ov->add_option("--fixture", ov.fixture, "operator bundle (default: data/operators/tri_p<p>.json)");
  s_ov->add_option("--cubature-fixture", ov.cubature_fixture, "cubature rule (default: data/cubature/p<p>.json)");

  CubatureConfig cc;
  auto* s_cub = app.add_subcommand("cubature", "construct, write or verify triangle cubature rules");
  s_cub->add_option("--p", cc.p, "degree")->check(CLI::Range(0, 4));
  s_cub->add_option("--out", cc.out, "output JSON file (default: stdout)");
  s_cub->add_option("--verify", cc.verify, "load and verify a rule or operator bundle instead");
  s_cub->add_flag("--bundle", cc.bundle, "emit the full SBP operator bundle");

  SpectraConfig sc;
  auto* s_sp = app.add_subcommand("spectra", "dissipation or advection operator spectra");
  s_sp->add_option("--p", sc.p, "degree")->check(CLI::Range(0, 4));
  s_sp->add_option("--kind", sc.kind, "projection | derivative | advection")
      ->check(CLI::IsMember({"projection", "derivative", "advection"}));
  s_sp->add_option("--level", sc.level, "kernel refinement level (advection)")->check(CLI::Range(0, 3));
  s_sp->add_option("--lps", sc.lps, "LPS on (advection)");
  s_sp->add_option("--out", sc.out, "output directory");

  AdvectConfig ac;
  auto* s_adv = app.add_subcommand("advect", "bell advection convergence study");
  s_adv->add_option("--p", ac.p, "degree")->check(CLI::Range(1, 4));
  s_adv->add_option("--first-level", ac.first_level, "coarsest kernel level")->check(CLI::Range(0, 4));
  s_adv->add_option("--last-level", ac.last_level, "finest kernel level")->check(CLI::Range(1, 5));
  s_adv->add_option("--lps", ac.lps, "local projection stabilization");
  s_adv->add_option("--cfl", ac.cfl, "dt times spectral radius")->check(CLI::PositiveNumber);
  s_adv->add_option("--final-time", ac.final_time, "final time")->check(CLI::PositiveNumber);
  s_adv->add_option("--kernel", ac.kernel, "uniform | perturbed")->check(CLI::IsMember({"uniform", "perturbed"}));
  s_adv->add_option("--min-rate", ac.min_rate, "fail if the finest rate is below this (0 = no check)");
  s_adv->add_option("--out", ac.out, "output directory");

  EulerConfig ec;
  auto* s_eu = app.add_subcommand("euler", "steady vortex and entropy-trace studies");
  s_eu->add_option("--study", ec.study, "vortex-converge | entropy-trace")
      ->check(CLI::IsMember({"vortex-converge", "entropy-trace"}));
  s_eu->add_option("--p", ec.p, "degree")->check(CLI::Range(1, 4));
  s_eu->add_option("--N", ec.N, "vortex mesh sizes")->check(CLI::PositiveNumber);
  s_eu->add_option("--lps", ec.lps, "projection stabilization on the entropy variables");
  s_eu->add_option("--flux", ec.flux, "ismail-roe | chandrashekar")
      ->check(CLI::IsMember({"ismail-roe", "chandrashekar"}));
  s_eu->add_option("--init", ec.init, "vortex initial guess: exact | free-stream")
      ->check(CLI::IsMember({"exact", "free-stream"}));
  s_eu->add_option("--cfl", ec.cfl, "entropy-trace CFL numbers")->check(CLI::PositiveNumber);
  s_eu->add_option("--final-time", ec.final_time, "entropy-trace final time")->check(CLI::PositiveNumber);
  s_eu->add_option("--min-rate", ec.min_rate, "fail if the finest density rate is below this (0 = no check)");
  s_eu->add_option("--out", ec.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (dump_config) {
    std::cout << app.config_to_str(true, true);
    return 0;
  }

  try {
    if (s_ov->parsed()) return cmd_ops_verify(ov);
    if (s_cub->parsed()) return cmd_cubature(cc);
    if (s_sp->parsed()) return cmd_spectra(sc);
    if (s_adv->parsed()) return cmd_advect(ac);
    if (s_eu->parsed()) return cmd_euler(ec);
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const CheckFailure& e) {
    std::cout << "FAIL " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cout << "FAIL " << e.what() << '\n';
    return 1;
  }
  return 2;
}
