#include "csbp/advection.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace csbp;

TEST_SUITE("advection") {
  TEST_CASE("bell") {
    CHECK(bell_ic(0.9, 0.9) == 1.0);
    CHECK(bell_ic(0.5, 0.5) == 2.0);
    CHECK(bell_ic(0.5, 0.5 + 0.5 - 1e-12) == doctest::Approx(1.0));
    CHECK(bell_exact(0.6, 0.5, 0.1, 1.0, 0.0) == doctest::Approx(2.0));
  }

  TEST_CASE("energy balance") {
    std::mt19937 rng(3);
    std::normal_distribution<double> N;
    for (int p = 1; p <= 2; ++p)
      for (bool lps : {false, true}) {
        const AdvectionProblem pr =
            make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), 1, Kernel::Perturbed), build_sbp_tri(p),
                                   1.0, 0.5, lps);
        for (int t = 0; t < 20; ++t) {
          Vec u(pr.n_dof());
          for (Index i = 0; i < u.size(); ++i) u(i) = N(rng);
          const Vec r = advection_rhs(pr, u);
          const double energy = u.dot(pr.glob.H.cwiseProduct(r)), norm = u.dot(pr.glob.H.cwiseProduct(u));
          if (lps) {
            CHECK(energy <= 1e-12 * norm);
          } else {
            CHECK(std::abs(energy) <= 1e-12 * norm);
          }
          CHECK((r - advection_rhs_elementwise(pr, u)).cwiseAbs().maxCoeff() <= 1e-10 * r.cwiseAbs().maxCoeff());
        }
        CHECK(advection_rhs(pr, Vec::Ones(pr.n_dof())).cwiseAbs().maxCoeff() <= 1e-11);
      }
  }

  TEST_CASE("rk4 on the test equation") {
    const auto f = [](const Vec& u) -> Vec { return -u; };
    for (double dt : {0.1, 0.05}) {
      const ScalarField out = rk4_advance(f, ScalarField{Vec::Ones(1), 0.0}, dt, 1);
      const double taylor = 1 - dt + dt * dt / 2 - dt * dt * dt / 6 + std::pow(dt, 4) / 24;
      CHECK(out.u(0) == doctest::Approx(taylor).epsilon(1e-15));
      CHECK(std::abs(out.u(0) - std::exp(-dt)) <= std::pow(dt, 5) / 100);
      CHECK(out.time == doctest::Approx(dt));
    }
    const ScalarField z = rk4_advance([](const Vec& u) -> Vec { return Vec::Zero(u.size()); },
                                      ScalarField{Vec::Constant(3, 2.0), 0.0}, 0.1, 5);
    CHECK((z.u.array() == 2.0).all());
    CHECK_THROWS_AS(rk4_advance([](const Vec& u) -> Vec { return 1e300 * u.cwiseProduct(u); },
                                ScalarField{Vec::Ones(1), 0.0}, 1.0, 10),
                    Error);
  }

  TEST_CASE("l2 error") {
    const AdvectionProblem pr =
        make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), 1), build_sbp_tri(2), 1.0, 1.0, true);
    const Vec u = interpolate(pr, bell_ic);
    CHECK(l2_error(pr, u, bell_ic) <= 1e-14);
    CHECK(l2_error(pr, (u.array() + 0.25).matrix(), bell_ic) == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("spectra") {
    for (bool lps : {false, true}) {
      const AdvectionProblem pr =
          make_advection_problem(kernel_refine(unit_square_periodic_mesh(1), 1), build_sbp_tri(1), 1.0, 1.0, lps);
      const OperatorSpectrum s = operator_spectrum(pr);
      if (lps) {
        CHECK(s.max_real <= 1e-10 * s.radius);
      } else {
        double worst = 0.0;
        for (const auto& z : s.eigenvalues) worst = std::max(worst, std::abs(z.real()));
        CHECK(worst <= 1e-8 * s.radius);
      }
      CHECK_THROWS_AS(operator_spectrum(pr, 10), InvalidArgument);
    }
  }

  TEST_CASE("convergence on a small study") {
    ConvergenceOptions o;
    o.p = 1;
    o.first_level = 1;
    o.last_level = 2;
    o.final_time = 0.25;
    const auto rows = convergence_study(o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].l2_error < rows[0].l2_error);
    CHECK(rows[1].rate > 1.0);
  }
}
