#include "csbp/euler.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace csbp;
using V4 = Eigen::Vector4d;

namespace {

Mat random_field(Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> r(0.5, 2.0), u(-0.5, 0.5), p(0.5, 2.0);
  Mat U(n, 4);
  for (Index i = 0; i < n; ++i) U.row(i) = conservative(r(rng), u(rng), u(rng), p(rng)).transpose();
  return U;
}

double entropy_production(const EulerDiscretization& d, const Mat& U, const Mat& rhs) {
  return (entropy_vars_field(U).array() * (d.H.asDiagonal() * rhs).array()).sum();
}

double entropy_scale(const EulerDiscretization& d, const Mat& U, const Mat& rhs) {
  return (entropy_vars_field(U).cwiseAbs().array() * (d.H.asDiagonal() * rhs).cwiseAbs().array()).sum();
}

}  // namespace

TEST_SUITE("euler") {
  TEST_CASE("entropy conservation and stability on the warped mesh") {
    std::mt19937 rng(21);
    for (int p = 1; p <= 3; ++p) {
      CAPTURE(p);
      const EulerDiscretization d = make_warped_periodic_discretization(p, true);
      for (int t = 0; t < 3; ++t) {
        const Mat U = random_field(d.num_nodes(), rng);
        const Mat ec = euler_rhs_ec(d, U);
        CHECK(std::abs(entropy_production(d, U, ec)) <= 1e-11 * entropy_scale(d, U, ec));
        const Mat lps = lps_entropy_rhs(d, U);
        CHECK(entropy_production(d, U, lps) <= 1e-12 * entropy_scale(d, U, lps));
        CHECK((euler_volume_dense(d, U) - euler_residual(d, U, {true, false, false})).cwiseAbs().maxCoeff() <=
              1e-12 * ec.cwiseAbs().maxCoeff());
      }
    }
  }

  TEST_CASE("free-stream preservation") {
    for (int p = 1; p <= 4; ++p) {
      const EulerDiscretization d = make_warped_periodic_discretization(p, true);
      const V4 Uc = conservative(1.0, 0.3, -0.2, 1.0);
      const Mat U = Uc.transpose().replicate(d.num_nodes(), 1);
      const double scale = euler_flux(Uc, 1.0, 1.0).cwiseAbs().maxCoeff();
      CHECK(euler_rhs(d, U).cwiseAbs().maxCoeff() <= 1e-10 * scale);
      CHECK(lps_entropy_rhs(d, U).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("Jacobian against finite differences") {
    std::mt19937 rng(22);
    for (bool lps : {false, true}) {
      const EulerDiscretization d = make_warped_periodic_discretization(2, lps, FluxKind::Chandrashekar);
      const Mat U = random_field(d.num_nodes(), rng);
      const SpMat J = euler_jacobian(d, U);
      Vec v = Vec::Random(4 * d.num_nodes());
      const double h = 1e-6;
      const Vec fd = (flatten(euler_residual(d, unflatten(flatten(U) + h * v))) -
                      flatten(euler_residual(d, unflatten(flatten(U) - h * v)))) /
                     (2 * h);
      const Vec Jv = J * v;
      CHECK((Jv - fd).cwiseAbs().maxCoeff() <= 1e-6 * Jv.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("flatten ordering") {
    Mat U(2, 4);
    U << 1, 2, 3, 4, 5, 6, 7, 8;
    const Vec u = flatten(U);
    CHECK(u(5) == 6.0);
    CHECK(unflatten(u) == U);
  }

  TEST_CASE("discontinuous initial condition") {
    CHECK(discontinuous_ic(0.5, 0.5) == V4(1.1, 0, 0, 5.1));
    CHECK(discontinuous_ic(0.1, 0.9) == V4(1.0, 0, 0, 5.0));
    CHECK(discontinuous_ic(1.0 / 3.0, 2.0 / 3.0) == V4(1.1, 0, 0, 5.1));
  }

  TEST_CASE("newton converges in one step on a linear problem") {
    Mat A(3, 3);
    A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Vec xs(Vec::LinSpaced(3, 1, 3));
    const SpMat As = A.sparseView();
    NewtonReport rep;
    const Vec x = newton_solve([&](const Vec& x) -> Vec { return A * (x - xs); }, [&](const Vec&) { return As; },
                               Vec::Zero(3), NewtonOptions{}, &rep);
    CHECK(rep.iterations == 1);
    CHECK(rep.converged);
    CHECK((x - xs).cwiseAbs().maxCoeff() <= 1e-14);
    NewtonOptions few;
    few.max_iter = 2;
    CHECK_THROWS_AS(newton_solve([](const Vec& x) -> Vec { return x.array().exp() + 10.0; },
                                 [](const Vec& x) -> SpMat { return Mat(x.array().exp().matrix().asDiagonal()).sparseView(); },
                                 Vec::Zero(1), few),
                    Error);
  }

  TEST_CASE("implicit midpoint is second order in time") {
    const EulerDiscretization d = make_warped_periodic_discretization(1, false);
    const Mat U0 = interpolate_state(d, [](double x, double y) {
      return conservative(1.0 + 0.2 * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y), 0.5, 0.25, 1.0);
    });
    NewtonOptions opt{1e-13, 1e-15, 30, 20};
    const double T = 0.02;
    auto run = [&](long steps) { return implicit_midpoint_advance(d, EulerField{U0, 0.0}, T / steps, steps, opt).U; };
    const Mat ref = run(64);
    const double e1 = (run(4) - ref).cwiseAbs().maxCoeff(), e2 = (run(8) - ref).cwiseAbs().maxCoeff();
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    // Uniform flow is a fixed point and carries no entropy change.
    const Mat Uf = conservative(1.0, 0.3, 0.1, 1.0).transpose().replicate(d.num_nodes(), 1);
    std::vector<EntropyTraceRow> trace;
    const EulerField out = implicit_midpoint_advance(d, EulerField{Uf, 0.0}, 0.01, 3, opt, &trace);
    CHECK((out.U - Uf).cwiseAbs().maxCoeff() <= 1e-13);
    REQUIRE(trace.size() == 4);
    CHECK(std::abs(trace.back().delta_entropy) <= 1e-13);
    CHECK(out.time == doctest::Approx(0.03));
  }

  TEST_CASE("vortex exact solution") {
    CHECK(vortex_exact(1.0).rho == doctest::Approx(2.0));
    CHECK(vortex_exact(1e6).rho == doctest::Approx(2.0 * std::pow(1 + 0.2 * 0.9025, 2.5)).epsilon(1e-10));
    const VortexPrimitive v = vortex_exact(1.7);
    CHECK(v.p == doctest::Approx(std::pow(v.rho, kGamma) / kGamma));
    CHECK_THROWS_AS(vortex_exact(0.5), InvalidArgument);
    CHECK(vortex_exact_drag() == doctest::Approx(-std::pow(2.0, 1.4) / 1.4));
  }

  TEST_CASE("drag functional") {
    const EulerDiscretization d = make_vortex_discretization(4, 2);
    const double p0 = 1.3;
    const Mat U = conservative(1.0, 0.0, 0.0, p0).transpose().replicate(d.num_nodes(), 1);
    CHECK(drag_functional(d, U) == doctest::Approx(-p0).epsilon(1e-6));
    const Mat Ue = interpolate_state(d, vortex_state);
    CHECK(drag_functional(d, Ue) == doctest::Approx(vortex_exact_drag()).epsilon(1e-4));
  }

  TEST_CASE("vortex steady solve") {
    const auto rows = vortex_convergence(1, {4, 8});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.final_residual <= 1e-10);
    CHECK(rows[1].density_rate >= 1.5);
    // Quiescent start with pseudo-transient continuation.
    const EulerDiscretization d = make_vortex_discretization(4, 1);
    const VortexPrimitive far = vortex_exact(3.0);
    NewtonOptions opt;
    opt.pseudo_dt = 1.0;
    opt.max_iter = 200;
    NewtonReport rep;
    const EulerField f = solve_steady(
        d, EulerField{interpolate_state(d, [&](double, double) { return conservative(far.rho, 0.0, 0.0, far.p); }), 0.0},
        opt, &rep);
    CHECK(rep.converged);
    CHECK(rep.residual_history.back() <= 1e-10);
    CHECK(density_l2_error(d, f.U) == doctest::Approx(rows[0].density_error).epsilon(1e-6));
  }

  TEST_CASE("configuration errors") {
    const auto [mesh, map] = quarter_annulus_mesh(2, 1);
    EulerOptions opt;
    opt.bc = {{"inner", BcKind::Slip}, {"outer", BcKind::Characteristic}};
    CHECK_THROWS_AS(make_euler_discretization(mesh, map, 1, opt), InvalidArgument);
    opt.bc["side"] = BcKind::Characteristic;
    CHECK_THROWS_AS(make_euler_discretization(mesh, map, 1, opt), InvalidArgument);
    EulerField bad{Mat::Ones(3, 4), 0.0};
    bad.U(1, 0) = -1.0;
    CHECK_THROWS_AS(bad.check_admissible(), InadmissibleState);
  }
}
