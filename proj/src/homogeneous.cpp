#include "esgopt/homogeneous.hpp"

#include <cmath>

namespace esg {

ModelParams HomogeneousEconomy::to_params(double gamma_P) const {
  return homogeneous_params(n, c, gamma, nu, rho, sigma, gamma_P);
}

namespace {

void check(const HomogeneousEconomy& e) {
  validate(homogeneous_params(e.n, e.c, e.gamma, e.nu, e.rho, e.sigma, 0.0));
}

}  // namespace

HomogeneousIntermediates homogeneous_intermediates(const HomogeneousEconomy& e, double gamma_P) {
  check(e);
  if (!(gamma_P >= 0.0)) throw ValidationError("gamma_P", -1, "must be >= 0");
  const double nd = e.n;
  HomogeneousIntermediates h;
  h.A = e.gamma + 1.0 / (e.c * e.nu * e.nu);
  h.delta = 1.0 / (h.A * e.c * e.nu * e.nu);
  h.alpha_n = gamma_P / (nd * e.gamma);
  h.beta_n = e.sigma * e.rho / std::sqrt(nd);
  h.kappa_tilde_n = h.A + gamma_P / nd * ((nd - 1.0) * h.A / e.gamma + 1.0);
  h.kappa_n = h.kappa_tilde_n / h.A;
  const double rho2 = e.rho * e.rho;
  h.Delta_n = (e.gamma + gamma_P) * (1.0 - rho2) + e.gamma * rho2 * h.delta / nd +
              gamma_P * rho2 * h.delta * h.delta / (nd * nd * h.kappa_n);
  h.eta_n = rho2 * ((nd - 1.0) + e.gamma / h.A);
  return h;
}

HomogeneousSolution closed_form_homogeneous(const HomogeneousEconomy& e, double gamma_P) {
  const HomogeneousIntermediates h = homogeneous_intermediates(e, gamma_P);
  const double nd = e.n;
  HomogeneousSolution sol;
  sol.intermediates = h;
  sol.z_s = -e.rho * e.gamma / (h.A * e.c * e.sigma * e.nu * std::sqrt(nd) * h.Delta_n) *
            (1.0 - gamma_P / (nd * h.kappa_tilde_n));
  sol.K_star = (e.gamma * e.nu / h.A - h.beta_n * h.delta * sol.z_s) / h.kappa_n;
  if (e.n >= 2) sol.z_o = (h.alpha_n * sol.K_star - h.beta_n * sol.z_s) / e.nu;
  sol.z_d = (gamma_P / nd * sol.K_star - e.gamma * h.beta_n * sol.z_s + 1.0 / (e.c * e.nu)) /
            (e.nu * h.A);
  return sol;
}

HomogeneousGp0 gp0_homogeneous(const HomogeneousEconomy& e) {
  const HomogeneousIntermediates h = homogeneous_intermediates(e, 0.0);
  const double nd = e.n;
  const double rho2 = e.rho * e.rho;
  const double gap = nd - h.eta_n;
  HomogeneousGp0 out;
  out.z_s0 = -std::sqrt(nd) / e.sigma * e.rho / (h.A * e.c * e.nu) / gap;
  if (e.n >= 2) out.z_o0 = rho2 / (h.A * e.c * e.nu * e.nu) / gap;
  out.z_d0 = (1.0 + e.gamma * rho2 / h.A / gap) / (h.A * e.c * e.nu * e.nu);
  out.nu_dagger = std::sqrt((nd * (1.0 - rho2) + rho2) / (e.gamma * e.c * nd * (1.0 - rho2)));
  return out;
}

HomogeneousLimits gp_infinity_limits(const HomogeneousEconomy& e) {
  check(e);
  const double A = e.gamma + 1.0 / (e.c * e.nu * e.nu);
  const double nd = e.n;
  const double denom = (nd - 1.0) * A + e.gamma;
  HomogeneousLimits out;
  out.z_s_inf = 0.0;
  if (e.n >= 2) out.z_o_inf = e.gamma / denom;
  out.z_d_inf = ((nd - 1.0) * A - (nd - 2.0) * e.gamma) / denom;
  return out;
}

OneAgentBenchmark n1_benchmark(double c, double gamma, double nu, double rho, double sigma,
                               double gamma_P) {
  check({1, c, gamma, nu, rho, sigma});
  if (!(gamma_P >= 0.0)) throw ValidationError("gamma_P", -1, "must be >= 0");
  const double g_tot = gamma + gamma_P;
  const double unhedged = 1.0 - rho * rho;
  OneAgentBenchmark out;
  out.z_s1 = -gamma * nu * rho / (sigma * g_tot * (1.0 + c * nu * nu * g_tot * unhedged));
  out.z_d1 = (1.0 + gamma_P * c * nu * nu * unhedged) / (1.0 + g_tot * c * nu * nu * unhedged);
  return out;
}

Sensitivities expand_homogeneous(int n, double z_s, double z_o, double z_d) {
  Sensitivities s;
  s.zQ = Eigen::MatrixXd::Constant(n, n, z_o);
  s.zQ.diagonal().setConstant(z_d);
  s.zS = Eigen::VectorXd::Constant(n, z_s);
  return s;
}

}  // namespace esg
