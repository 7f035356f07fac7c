#include <doctest.h>

#include "esgopt/model_params.hpp"
#include "test_support.hpp"

using namespace esg;
using esg::testing::EconomyGenerator;

TEST_SUITE("model_params") {
  TEST_CASE("table 1 record is accepted") {
    const ModelParams p = homogeneous_params(6, 1.2, 1.0, 1.0, 0.6, 1.0, 0.0);
    CHECK(p.n == 6);
    CHECK(p.c(5) == 1.2);
    CHECK(p.rho(0) == 0.6);
    CHECK(p.q0.isZero());
    CHECK(p.r.isZero());
    CHECK(testing::preset("table1.json") == with_gamma_P(p, 1.0));
  }

  TEST_CASE("one-agent and zero-correlation economies are valid") {
    CHECK_NOTHROW(homogeneous_params(1, 1.2, 1.0, 1.0, 0.6, 1.0, 0.0));
    const ModelParams p = homogeneous_params(3, 1.0, 1.0, 1.0, 0.0, 1.0, 0.5);
    CHECK(p.rho.isZero());
  }

  TEST_CASE("boundary correlation is rejected with field and index") {
    ModelParams p = homogeneous_params(6, 1.2, 1.0, 1.0, 0.6, 1.0, 0.0);
    p.rho(2) = 1.0;
    try {
      validate(p);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "rho");
      CHECK(e.index() == 2);
      CHECK(std::string(e.what()).find("correlation out of open interval") != std::string::npos);
    }
    p.rho(2) = -1.0;
    CHECK_THROWS_AS(validate(p), ValidationError);
  }

  TEST_CASE("shape mismatch is rejected") {
    ModelParams p = homogeneous_params(6, 1.2, 1.0, 1.0, 0.6, 1.0, 0.0);
    p.c.conservativeResize(5);
    try {
      validate(p);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "c");
      CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
    }
  }

  TEST_CASE("non-positive scalars and negative gamma_P are rejected") {
    const ModelParams base = homogeneous_params(2, 1.0, 1.0, 1.0, 0.2, 1.0, 0.0);
    auto expect_field = [](ModelParams p, const char* field) {
      try {
        validate(p);
        FAIL("expected ValidationError for " << field);
      } catch (const ValidationError& e) {
        CHECK(e.field() == field);
      }
    };
    ModelParams p = base;
    p.c(1) = 0.0;
    expect_field(p, "c");
    p = base;
    p.gamma(0) = -1.0;
    expect_field(p, "gamma");
    p = base;
    p.nu(0) = 0.0;
    expect_field(p, "nu");
    p = base;
    p.sigma = 0.0;
    expect_field(p, "sigma");
    p = base;
    p.s0 = -1.0;
    expect_field(p, "s0");
    p = base;
    p.T = 0.0;
    expect_field(p, "T");
    p = base;
    p.gamma_P = -0.1;
    expect_field(p, "gamma_P");
    p = base;
    p.n = 0;
    expect_field(p, "n");
  }

  TEST_CASE("validate is idempotent and serialisation round-trips") {
    EconomyGenerator gen(11);
    for (int k = 0; k < 50; ++k) {
      ModelParams p = gen.economy();
      p.q0 = Eigen::VectorXd::Random(p.n);
      p.r = Eigen::VectorXd::Random(p.n);
      p.mu = gen.uniform(-1.0, 1.0);
      p.T = gen.log_uniform(0.1, 10.0);
      CHECK(validate(validate(p)) == validate(p));
      CHECK(load_config(serialize(p)) == p);
    }
  }

  TEST_CASE("presets reproduce the calibration tables") {
    const ModelParams t2 = testing::preset("table2.json");
    CHECK(t2.n == 6);
    CHECK(t2.c(4) == 2.0);
    CHECK(t2.gamma(4) == 1.3);
    CHECK(t2.nu(5) == 0.8);
    CHECK(t2.rho(0) == 0.75);
    CHECK(t2.rho.squaredNorm() == doctest::Approx(1.275).epsilon(1e-14));

    const ModelParams t3 = testing::preset("table3.json");
    CHECK(t3.n == 4);
    CHECK(t3.c(2) == 25.315806);
    CHECK(t3.gamma(0) == 2.328781);
    CHECK(t3.nu(1) == 1.945208);
    CHECK(t3.rho(3) == -0.605495);
  }

  TEST_CASE("optional keys take documented defaults and scalars broadcast") {
    const ModelParams p =
        load_config(R"({"n": 3, "c": 1.5, "gamma": [1, 2, 3], "nu": 1, "rho": 0.1,
                        "sigma": 0.8, "gamma_P": 2})");
    CHECK(p.mu == 0.0);
    CHECK(p.s0 == 1.0);
    CHECK(p.T == 1.0);
    CHECK(p.q0.isZero());
    CHECK(p.r.isZero());
    CHECK(p.c == Eigen::VectorXd::Constant(3, 1.5));
    CHECK(p.gamma(2) == 3.0);
  }

  TEST_CASE("malformed configs raise ConfigError or ValidationError") {
    CHECK_THROWS_AS(load_config("{\"n\": 2,"), ConfigError);
    try {
      load_config("{\"n\": 2,");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(R"({"n": 1, "c": 1, "gamma": 1, "nu": 1, "rho": 0,
                                    "sigma": 1, "gamma_P": 0, "colour": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"n": 1, "c": 1, "gamma": 1, "nu": 1, "rho": 0})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config(R"({"n": 2, "c": [1, 2, 3], "gamma": 1, "nu": 1, "rho": 0,
                                    "sigma": 1, "gamma_P": 0})"),
                    ValidationError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/economy.json"), ConfigError);
  }
}
