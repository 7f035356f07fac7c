#pragma once

#include <optional>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// Symmetric team: every agent shares (c, gamma, nu, rho).
struct HomogeneousEconomy {
  int n = 1;
  double c = 1.0;
  double gamma = 1.0;
  double nu = 1.0;
  double rho = 0.0;
  double sigma = 1.0;

  ModelParams to_params(double gamma_P) const;
};

struct HomogeneousIntermediates {
  double A;              // gamma + 1 / (c nu^2)
  double delta;          // 1 / (A c nu^2)
  double alpha_n;        // gamma_P / (n gamma)
  double beta_n;         // sigma rho / sqrt(n)
  double kappa_tilde_n;  // A + (gamma_P / n)((n - 1) A / gamma + 1)
  double kappa_n;        // kappa_tilde_n / A
  double Delta_n;        // denominator of z_s, > 0
  double eta_n;          // rho^2 ((n - 1) + gamma / A), in [0, n)
};

HomogeneousIntermediates homogeneous_intermediates(const HomogeneousEconomy& e, double gamma_P);

/// Common sensitivities of the symmetric maximiser: S-tilt z_s, off-diagonal
/// z_o (absent for n = 1), diagonal z_d, and the common column residual K*.
struct HomogeneousSolution {
  double z_s;
  std::optional<double> z_o;
  double z_d;
  double K_star;
  HomogeneousIntermediates intermediates;
};

HomogeneousSolution closed_form_homogeneous(const HomogeneousEconomy& e, double gamma_P);

/// Exact gamma_P = 0 values plus the threshold in nu where |z_s| peaks.
struct HomogeneousGp0 {
  double z_s0;
  std::optional<double> z_o0;
  double z_d0;
  double nu_dagger;
};
HomogeneousGp0 gp0_homogeneous(const HomogeneousEconomy& e);

/// gamma_P -> infinity limits. z_d_inf + (n - 1) z_o_inf = 1.
struct HomogeneousLimits {
  double z_s_inf;
  std::optional<double> z_o_inf;
  double z_d_inf;
};
HomogeneousLimits gp_infinity_limits(const HomogeneousEconomy& e);

/// Single-agent benchmark.
struct OneAgentBenchmark {
  double z_s1;
  double z_d1;
};
OneAgentBenchmark n1_benchmark(double c, double gamma, double nu, double rho, double sigma,
                               double gamma_P);

/// Expands the symmetric triple into a full n x n / n-vector sensitivity record.
Sensitivities expand_homogeneous(int n, double z_s, double z_o, double z_d);

}  // namespace esg
