#pragma once

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// Per-agent constants of the closed-form maximiser.
struct ClosedFormIntermediates {
  Eigen::VectorXd A;       // gamma_i + 1 / (c_i nu_i^2)
  Eigen::VectorXd alpha;   // gamma_P / (n gamma_i)
  Eigen::VectorXd kappa;   // column-residual feedback factor, >= 1
  Eigen::VectorXd d;       // intercept of K_i(zS)
  Eigen::VectorXd m;       // slope of K_i(zS) in zS(i)
  Eigen::VectorXd muDiag;  // diagonal of D_n, > 0
  Eigen::VectorXd ell;     // right-hand side of the reduced S system
  double lambda_n = 0.0;   // weight of the rank-one term 1 1^T
  Eigen::VectorXd s_vec;   // 1 / muDiag
  double y_n = 0.0;        // Sherman-Morrison scalar

  /// Column residual as an affine function of the S-tilts: d_i - m_i zS(i).
  double K(int i, const Eigen::VectorXd& zS) const { return d(i) - m(i) * zS(i); }
};

ClosedFormIntermediates compute_intermediates(const ModelParams& p);

/// Dense solve of the full (n^2 + n) stationarity system. H is negative
/// definite for every valid economy (also at gamma_P = 0), so an LDL^T
/// factorisation of -H is used; a non-positive pivot raises NumericalError.
Sensitivities solve_direct(const ModelParams& p);

/// Residual sup-norm of H x + b for a candidate x.
double foc_residual(const ModelParams& p, const Sensitivities& s);

/// Closed form: the S-tilts from the diagonal-plus-rank-one reduced system
/// (inverted with Sherman-Morrison), then each zQ entry row by row.
Sensitivities solve_closed_form(const ModelParams& p);

/// Independent oracle. Builds the Hessian and the gradient purely from central
/// differences of eval_f (never touching the analytic blocks), solves the
/// stationarity system, and refines with finite-difference Newton steps until
/// the finite-difference gradient sup-norm is <= tol. Throws NumericalError
/// with a condition estimate on failure.
struct BruteForceOptions {
  double hessian_step = 1e-1;
  double gradient_step = 1e-1;
  int max_refinements = 20;
};
Sensitivities brute_force_maximize(const ModelParams& p, double tol,
                                   const BruteForceOptions& options = {});

/// Central-difference gradient and Hessian of eval_f at s.
Eigen::VectorXd fd_gradient(const ModelParams& p, const Sensitivities& s, double step);
Eigen::MatrixXd fd_hessian(const ModelParams& p, const Sensitivities& s, double step);

}  // namespace esg
