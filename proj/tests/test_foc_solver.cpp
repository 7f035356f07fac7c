#include <doctest.h>

#include "esgopt/foc_solver.hpp"
#include "esgopt/homogeneous.hpp"
#include "test_support.hpp"

using namespace esg;
using esg::testing::EconomyGenerator;

TEST_SUITE("foc_solver") {
  TEST_CASE("table 1 at gamma_P = 0 matches the rational forms") {
    const testing::RationalGp0 r = testing::rational_gp0(6, 1.2, 1.0, 1.0, 0.6, 1.0);
    CHECK(r.D == doctest::Approx(8.808).epsilon(1e-14));
    for (const Sensitivities& s : {solve_direct(testing::table1(0.0)),
                                   solve_closed_form(testing::table1(0.0))}) {
      CHECK(s.zS(0) == doctest::Approx(r.z_s).epsilon(1e-12));
      CHECK(s.zQ(0, 1) == doctest::Approx(r.z_o).epsilon(1e-12));
      CHECK(s.zQ(3, 3) == doctest::Approx(r.z_d).epsilon(1e-12));
      CHECK(s.zS(0) == doctest::Approx(-0.16686).epsilon(1e-4));
      CHECK(s.zQ(2, 4) == doctest::Approx(0.04087).epsilon(1e-4));
      CHECK(s.zQ(5, 5) == doctest::Approx(0.47684).epsilon(1e-4));
    }
  }

  TEST_CASE("zero correlation decouples the S-tilts") {
    ModelParams p = testing::table2(2.0);
    p.rho.setZero();
    CHECK(solve_direct(p).zS.lpNorm<Eigen::Infinity>() <= 1e-15);
    CHECK(solve_closed_form(p).zS.lpNorm<Eigen::Infinity>() == 0.0);
  }

  TEST_CASE("table 3 diagonal crosses zero near gamma_P = 0.629") {
    const double z33 = solve_direct(testing::table3(0.629)).zQ(2, 2);
    CHECK(std::abs(z33) < 1e-3);
    CHECK(solve_direct(testing::table3(0.5)).zQ(2, 2) > 0.0);
    CHECK(solve_direct(testing::table3(0.8)).zQ(2, 2) < 0.0);
  }

  TEST_CASE("closed-form intermediates") {
    const ClosedFormIntermediates t1 = compute_intermediates(testing::table1(1.0));
    for (int i = 0; i < 6; ++i) CHECK(t1.A(i) == doctest::Approx(1.0 + 1.0 / 1.2).epsilon(1e-15));

    const ClosedFormIntermediates z = compute_intermediates(testing::table2(0.0));
    CHECK(z.alpha.isZero(0.0));
    CHECK(z.lambda_n == 0.0);
    CHECK(z.kappa.isOnes(0.0));

    ModelParams p0 = testing::table2(3.0);
    p0.rho.setZero();
    CHECK(compute_intermediates(p0).m.isZero(0.0));

    EconomyGenerator gen(31);
    for (int k = 0; k < 100; ++k) {
      const ModelParams p = gen.economy();
      const ClosedFormIntermediates ci = compute_intermediates(p);
      CHECK((ci.A.array() > p.gamma.array()).all());
      CHECK((ci.kappa.array() >= 1.0).all());
      CHECK((ci.muDiag.array() > 0.0).all());
      CHECK(ci.lambda_n > 0.0);
      CHECK(ci.s_vec.cwiseProduct(ci.muDiag).isOnes(1e-14));
    }
  }

  TEST_CASE("closed form agrees with the direct solve") {
    EconomyGenerator gen(32);
    for (int k = 0; k < 200; ++k) {
      ModelParams p = gen.economy();
      p = with_gamma_P(p, gen.uniform(0.0, 50.0));
      const Sensitivities d = solve_direct(p);
      const Sensitivities c = solve_closed_form(p);
      CHECK(testing::max_abs_diff(d, c) <= 1e-10);
      CHECK(foc_residual(p, d) <= 1e-10 * (1.0 + hessian_blocks(p).rhs().lpNorm<Eigen::Infinity>()));
      CHECK(gradient(p, c).pack().lpNorm<Eigen::Infinity>() <= 1e-9);
    }
  }

  TEST_CASE("large gamma_P approaches the pooling limits") {
    const Sensitivities s = solve_closed_form(testing::table1(1e6));
    CHECK(s.zQ(0, 1) == doctest::Approx(0.098361).epsilon(1e-4));
    CHECK(s.zQ(0, 0) == doctest::Approx(0.508197).epsilon(1e-4));
    CHECK(std::abs(s.zS(0)) < 1e-4);
  }

  TEST_CASE("one agent at gamma_P = 0") {
    const ModelParams p = homogeneous_params(1, 1.2, 1.0, 1.0, 0.6, 1.0, 0.0);
    const Sensitivities s = solve_closed_form(p);
    // Oracle: denominator 1 + c gamma nu^2 (1 - rho^2) = 1.768.
    CHECK(s.zS(0) == doctest::Approx(-0.6 / 1.768).epsilon(1e-13));
    CHECK(s.zQ(0, 0) == doctest::Approx(1.0 / 1.768).epsilon(1e-13));
    CHECK(s.zS(0) == doctest::Approx(-0.339367).epsilon(1e-6));
    CHECK(s.zQ(0, 0) == doctest::Approx(0.565611).epsilon(1e-6));
  }

  TEST_CASE("brute-force oracle agrees with the analytic solvers") {
    const Sensitivities b1 = brute_force_maximize(testing::table1(1.0), 1e-9);
    CHECK(testing::max_abs_diff(b1, solve_direct(testing::table1(1.0))) <= 1e-6);
    const Sensitivities b2 = brute_force_maximize(testing::table2(40.0), 1e-9);
    CHECK(testing::max_abs_diff(b2, solve_closed_form(testing::table2(40.0))) <= 1e-6);

    EconomyGenerator gen(33);
    for (int k = 0; k < 20; ++k) {
      const ModelParams p = gen.economy();
      CHECK(testing::max_abs_diff(brute_force_maximize(p, 1e-9), solve_direct(p)) <= 1e-6);
    }
  }

  TEST_CASE("brute force rejects a non-positive tolerance") {
    CHECK_THROWS_AS(brute_force_maximize(testing::table1(1.0), 0.0), ValidationError);
  }

  TEST_CASE("maximiser beats every coordinate perturbation") {
    EconomyGenerator gen(34);
    for (int k = 0; k < 30; ++k) {
      const ModelParams p = gen.economy();
      const Sensitivities s = solve_closed_form(p);
      const double f_star = eval_f(p, s);
      const Eigen::VectorXd x = s.pack();
      for (int e = 0; e < x.size(); ++e) {
        for (double d : {-1e-3, 1e-3}) {
          Eigen::VectorXd y = x;
          y(e) += d;
          CHECK(eval_f(p, Sensitivities::unpack(y, p.n)) <= f_star);
        }
      }
    }
  }

  TEST_CASE("column residual matches its affine form at the solution") {
    EconomyGenerator gen(35);
    for (int k = 0; k < 50; ++k) {
      const ModelParams p = gen.economy();
      const Sensitivities s = solve_closed_form(p);
      const ClosedFormIntermediates ci = compute_intermediates(p);
      const double sqn = std::sqrt(double(p.n));
      for (int j = 0; j < p.n; ++j) {
        const double K_def =
            p.nu(j) - p.nu(j) * s.zQ.col(j).sum() - p.rho(j) * p.sigma / sqn * s.zS.sum();
        CHECK(std::abs(K_def - ci.K(j, s.zS)) <= 1e-10);
      }
    }
  }
}
