#include <doctest.h>

#include <vector>

#include "esgopt/foc_solver.hpp"
#include "esgopt/homogeneous.hpp"
#include "esgopt/row_decoupled_limit.hpp"
#include "test_support.hpp"

using namespace esg;
using esg::testing::EconomyGenerator;

namespace {

std::vector<double> step_grid(double a, double b, double h) {
  std::vector<double> g;
  for (long k = 0; a + k * h <= b + 1e-9; ++k) g.push_back(a + k * h);
  return g;
}

}  // namespace

TEST_SUITE("row_decoupled_limit") {
  TEST_CASE("table 2 agent 1") {
    const ModelParams p = testing::table2(0.0);
    const Gp0Solution g = gp0_heterogeneous(p);
    CHECK(g.pi(0) == doctest::Approx(1.01932).epsilon(1e-5));
    CHECK(g.s0(0) == doctest::Approx(-0.16766).epsilon(1e-4));
    const Sensitivities d = solve_direct(with_gamma_P(p, 1e-8));
    CHECK(std::abs(d.zS(0) - g.s0(0)) <= 1e-6);
  }

  TEST_CASE("an uncorrelated agent has a flat row") {
    ModelParams p = testing::table2(0.0);
    p.rho(2) = 0.0;
    const Gp0Solution g = gp0_heterogeneous(p);
    CHECK(g.s0(2) == 0.0);
    for (int j = 0; j < p.n; ++j) {
      if (j != 2) CHECK(g.q0_matrix(2, j) == 0.0);
    }
  }

  TEST_CASE("homogeneous replication matches the symmetric forms") {
    const Gp0Solution g = gp0_heterogeneous(testing::table1(0.0));
    const HomogeneousGp0 h = gp0_homogeneous({6, 1.2, 1.0, 1.0, 0.6, 1.0});
    const Sensitivities s = g.sensitivities(testing::table1(0.0).nu);
    const Sensitivities e = expand_homogeneous(6, h.z_s0, *h.z_o0, h.z_d0);
    CHECK(testing::max_abs_diff(s, e) <= 1e-12);
    CHECK((g.nu_dagger.array() - h.nu_dagger).abs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("sign reports") {
    const ModelParams t2 = testing::table2(0.0);
    const SignReport r2 = sign_pattern(gp0_heterogeneous(t2).sensitivities(t2.nu), t2.rho);
    CHECK(r2.diagonal_all_positive);
    CHECK(r2.s_tilt_anti_rho);
    CHECK(r2.off_diagonal_matches_rho);

    Sensitivities z = Sensitivities::zeros(3);
    z.zQ.setIdentity();
    const SignReport rz = sign_pattern(z, Eigen::VectorXd::Zero(3));
    CHECK(rz.s_tilt_anti_rho);
    CHECK(rz.zS_expected.isZero());
    CHECK(rz.off_diag_expected.isZero());
    CHECK(rz.zS_sign.isZero());

    const ModelParams t3 = testing::table3(1.0);
    CHECK_FALSE(sign_pattern(solve_direct(t3), t3.rho).diagonal_all_positive);

    CHECK_THROWS_AS(sign_pattern(z, Eigen::VectorXd::Zero(2)), ValidationError);
  }

  TEST_CASE("persistence scans") {
    const std::vector<double> fine = step_grid(0.01, 40.0, 0.01);
    const PersistenceResult t2 = persistence_scan(testing::table2(0.0), fine);
    REQUIRE(t2.last_stable.has_value());
    CHECK(*t2.last_stable >= 0.01);
    MESSAGE("table 2 persistence bound: " << *t2.last_stable << " first flip "
            << t2.first_flip.value_or(-1.0) << " " << t2.first_flip_entry);

    const PersistenceResult t3 =
        persistence_scan(testing::table3(0.0), step_grid(0.0, 2.0, 0.01), SignScope::diagonal);
    REQUIRE(t3.last_stable.has_value());
    REQUIRE(t3.first_flip.has_value());
    CHECK(*t3.last_stable == doctest::Approx(0.62).epsilon(1e-9));
    CHECK(*t3.first_flip == doctest::Approx(0.63).epsilon(1e-9));
    CHECK(t3.first_flip_entry == "zQ(3,3)");

    const PersistenceResult t1 = persistence_scan(testing::table1(0.0), step_grid(0.0, 10.0, 0.05));
    CHECK_FALSE(t1.first_flip.has_value());
    CHECK(*t1.last_stable == doctest::Approx(10.0));

    CHECK_THROWS_AS(persistence_scan(testing::table1(0.0), std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(persistence_scan(testing::table1(0.0), std::vector<double>{0.0, 0.5, 0.5}),
                    ValidationError);
  }

  TEST_CASE("small gamma_P keeps the strict risk-neutral signs") {
    EconomyGenerator gen(51);
    for (int k = 0; k < 50; ++k) {
      const ModelParams p = gen.economy();
      const std::vector<double> grid{0.0, 1e-8, 1e-6, 1e-5};
      const PersistenceResult r = persistence_scan(p, grid);
      CHECK_FALSE(r.first_flip.has_value());
    }
  }

  TEST_CASE("risk-neutral closed forms against the solver and their signs") {
    EconomyGenerator gen(52);
    for (int k = 0; k < 100; ++k) {
      const ModelParams p = gen.economy();
      const Gp0Solution g = gp0_heterogeneous(p);
      const Sensitivities s = g.sensitivities(p.nu);
      CHECK(testing::max_abs_diff(s, solve_direct(with_gamma_P(p, 1e-8))) <= 1e-6);
      CHECK((g.pi.array() >= 0.0).all());
      CHECK((g.pi.array() < p.n).all());
      const SignReport rep = sign_pattern(s, p.rho);
      CHECK(rep.diagonal_all_positive);
      CHECK(rep.s_tilt_anti_rho);
      CHECK(rep.off_diagonal_matches_rho);
      const double sqn = std::sqrt(double(p.n));
      for (int i = 0; i < p.n; ++i) {
        for (int j = 0; j < p.n; ++j) {
          if (i == j) continue;
          CHECK(std::abs(g.q0_matrix(i, j)) ==
                doctest::Approx(p.sigma / sqn * std::abs(g.s0(i)) * std::abs(p.rho(j))).epsilon(1e-14));
        }
      }
    }
  }

  TEST_CASE("comparative statics of row i") {
    EconomyGenerator gen(53);
    for (int k = 0; k < 30; ++k) {
      const ModelParams base = gen.economy(2 + gen.n() % 6);
      const int i = 0;
      auto row_with = [&](auto mutate, double x) {
        ModelParams p = base;
        mutate(p, x);
        return gp0_heterogeneous(validate(p));
      };
      const double sr = base.rho(i) >= 0 ? 1.0 : -1.0;
      double prev_s = 0.0, prev_d = 0.0;
      for (int m = 0; m < 50; ++m) {
        const double mag = 0.02 + 0.93 * m / 49.0;
        const Gp0Solution g = row_with([&](ModelParams& p, double x) { p.rho(i) = sr * x; }, mag);
        if (m > 0) {
          CHECK(std::abs(g.s0(i)) > prev_s + 1e-14);
          CHECK(g.q0_matrix(i, i) > prev_d);
        }
        prev_s = std::abs(g.s0(i));
        prev_d = g.q0_matrix(i, i);
      }
      double prev_c = std::numeric_limits<double>::infinity();
      for (int m = 0; m < 50; ++m) {
        const double c = 0.2 + 4.8 * m / 49.0;
        const Gp0Solution g = row_with([&](ModelParams& p, double x) { p.c(i) = x; }, c);
        CHECK(std::abs(g.s0(i)) < prev_c);
        prev_c = std::abs(g.s0(i));
      }
      // Hump in nu_i around nu_dagger_i.
      const double nd = gp0_heterogeneous(base).nu_dagger(i);
      auto s_at = [&](double nu) {
        return std::abs(row_with([&](ModelParams& p, double x) { p.nu(i) = x; }, nu).s0(i));
      };
      CHECK(s_at(0.95 * nd) > s_at(0.9 * nd));
      CHECK(s_at(1.1 * nd) < s_at(1.05 * nd));
      CHECK(s_at(nd) >= s_at(0.99 * nd));
      CHECK(s_at(nd) >= s_at(1.01 * nd));
    }
  }

  TEST_CASE("row decoupling: other agents enter only through the correlation norm") {
    EconomyGenerator gen(54);
    for (int k = 0; k < 30; ++k) {
      const ModelParams p = gen.economy(2 + gen.n() % 6);
      ModelParams q = p;
      for (int j = 1; j < p.n; ++j) {
        q.c(j) = gen.log_uniform(0.2, 5.0);
        q.gamma(j) = gen.log_uniform(0.2, 5.0);
        q.nu(j) = gen.log_uniform(0.2, 5.0);
      }
      const Gp0Solution a = gp0_heterogeneous(p);
      const Gp0Solution b = gp0_heterogeneous(q);
      CHECK(a.s0(0) == doctest::Approx(b.s0(0)).epsilon(1e-14));
      CHECK(a.q0_matrix(0, 0) == doctest::Approx(b.q0_matrix(0, 0)).epsilon(1e-14));
      for (int j = 1; j < p.n; ++j) {
        CHECK(a.q0_matrix(0, j) == doctest::Approx(b.q0_matrix(0, j)).epsilon(1e-14));
      }
    }
  }
}
