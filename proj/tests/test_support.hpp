#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg::testing {

/// Randomised economies: c, gamma, nu log-uniform on [0.2, 5]; rho uniform on
/// [-0.95, 0.95]; gamma_P log-uniform on [1e-3, 1e3]; n uniform on [1, 8].
class EconomyGenerator {
 public:
  explicit EconomyGenerator(std::uint64_t seed) : gen_(seed) {}

  int n() { return std::uniform_int_distribution<int>(1, 8)(gen_); }

  double log_uniform(double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(gen_));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  ModelParams economy(int n) {
    ModelParams p;
    p.n = n;
    p.c.resize(n);
    p.gamma.resize(n);
    p.nu.resize(n);
    p.rho.resize(n);
    for (int i = 0; i < n; ++i) {
      p.c(i) = log_uniform(0.2, 5.0);
      p.gamma(i) = log_uniform(0.2, 5.0);
      p.nu(i) = log_uniform(0.2, 5.0);
      p.rho(i) = uniform(-0.95, 0.95);
    }
    p.sigma = log_uniform(0.5, 2.0);
    p.mu = uniform(-0.1, 0.1);
    p.q0 = Eigen::VectorXd::Zero(n);
    p.r = Eigen::VectorXd::Zero(n);
    p.gamma_P = log_uniform(1e-3, 1e3);
    return validate(p);
  }

  ModelParams economy() { return economy(n()); }

  Sensitivities point(int n, double scale = 1.0) {
    Sensitivities s;
    s.zQ.resize(n, n);
    s.zS.resize(n);
    for (int i = 0; i < n; ++i) {
      s.zS(i) = uniform(-scale, scale);
      for (int j = 0; j < n; ++j) s.zQ(i, j) = uniform(-scale, scale);
    }
    return s;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline ModelParams preset(const std::string& name) {
  return load_config_file(preset_directory() + "/" + name);
}

inline ModelParams table1(double gamma_P) { return with_gamma_P(preset("table1.json"), gamma_P); }
inline ModelParams table2(double gamma_P) { return with_gamma_P(preset("table2.json"), gamma_P); }
inline ModelParams table3(double gamma_P) { return with_gamma_P(preset("table3.json"), gamma_P); }

inline double max_abs_diff(const Sensitivities& a, const Sensitivities& b) {
  return std::max((a.zQ - b.zQ).cwiseAbs().maxCoeff(), (a.zS - b.zS).cwiseAbs().maxCoeff());
}

inline double rel_inf(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

inline double rel_inf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

/// Symmetric economy with gamma_P = 0 through the rational forms that share
/// the denominator D = c gamma n (1 - rho^2) nu^2 + n (1 - rho^2) + rho^2.
struct RationalGp0 {
  double z_s, z_o, z_d, D;
};

inline RationalGp0 rational_gp0(int n, double c, double gamma, double nu, double rho,
                                double sigma) {
  const double u = 1.0 - rho * rho;
  const double D = c * gamma * n * u * nu * nu + n * u + rho * rho;
  return {-std::sqrt(double(n)) * rho * nu / (sigma * D), rho * rho / D, (n * u + rho * rho) / D, D};
}

}  // namespace esg::testing
