#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// Affine map whose weighted residual is the aggregate-exposure penalty:
/// phi(x) = (O x - o)^T W (O x - o). The feasible set O x = o fixes every
/// column sum of zQ to 1 and the sum of the S-tilts to 0.
struct ConstraintOperator {
  Eigen::MatrixXd O;        // (n + 1) x (n^2 + n)
  Eigen::VectorXd o;        // (nu_1, ..., nu_n, 0)
  Eigen::VectorXd weights;  // diagonal of W

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const { return O * x - o; }
  double weighted_residual_sq(const Eigen::VectorXd& x) const;
  /// Minimum-norm correction onto the feasible set: x + O^T (O O^T)^{-1} (o - O x).
  Eigen::VectorXd project_feasible(const Eigen::VectorXd& x) const;
};

/// Throws NumericalError if O is numerically rank deficient.
ConstraintOperator build_constraint_operator(const ModelParams& p);

/// Maximiser of g on the feasible set together with its multipliers.
struct ConstrainedSolution {
  Eigen::MatrixXd zQ_bar;
  Eigen::VectorXd zS_bar;
  Eigen::VectorXd mu_bar;  // column multipliers
  double theta_star = 0.0; // multiplier of the market-neutrality constraint (row form)
  Eigen::VectorXd iota;    // KKT multiplier of O x = o, length n + 1

  Sensitivities sensitivities() const { return {zQ_bar, zS_bar}; }
};

/// Bordered symmetric system [[H_g, O^T], [O, 0]] (x; iota) = (-h; o).
ConstrainedSolution solve_kkt(const ModelParams& p);

/// Quantities of the reduced S-tilt system (I - L) zS = V theta + U.
struct ColumnSolutionIntermediates {
  Eigen::MatrixXd p;        // p(i, j): row-wise diagonal resolvent entries
  Eigen::VectorXd Theta;    // column sums of p
  Eigen::VectorXd zeta;     // p(j, j) / c_j, in (0, 1)
  Eigen::VectorXd a;        // rho_j zeta_j / nu_j
  Eigen::MatrixXd M;        // rho_j nu_j p(k, j)
  Eigen::VectorXd upsilon;  // sum_j rho_j^2 nu_j^2 p(k, j)
  Eigen::VectorXd phi;      // 1 - gamma_k upsilon_k / n, in (0, 1)
  Eigen::VectorXd w;        // 1 / (n Theta_j)
  Eigen::MatrixXd L;        // nonnegative feedback matrix
  Eigen::VectorXd U, V;
  Eigen::VectorXd C, r_vec; // the two parts of U before the -1/phi scaling
  Eigen::MatrixXd resolvent;  // (I - L)^{-1}
  Eigen::VectorXd u, v;       // resolvent images of V and U
  double theta_star = 0.0;
};

ColumnSolutionIntermediates column_intermediates(const ModelParams& p);

/// Closed-form constrained maximiser through the M-matrix resolvent.
ConstrainedSolution solve_explicit_column(const ModelParams& p);

struct MMatrixDiagnostics {
  double spectral_radius = 0.0;
  double min_resolvent_entry = 0.0;
  bool L_nonneg = false;
  Eigen::VectorXd weighted_row_gap;  // phi - L^T phi
  double expected_gap = 0.0;         // 1 - ||rho||^2 / n
  bool weighted_row_test = false;    // every gap entry > 0
  double neumann_deviation = 0.0;    // max |sum_{m<50} L^m - (I - L)^{-1}|
};

MMatrixDiagnostics m_matrix_diagnostics(const ModelParams& p);

enum class DiagonalClass {
  zero_correlation,       // rho_i = 0: diagonal automatically positive
  standard_tilt,          // zS_i rho_i <= 0: diagonal guaranteed positive
  aligned_tilt_positive,  // tilt aligned with rho_i but below the flip threshold
  aligned_tilt_negative,  // tilt aligned with rho_i and above the threshold
};

const char* to_string(DiagonalClass c);

struct DiagonalSignRow {
  double B;           // sign discriminant; zQ_bar(i, i) = p(i, i) * B
  double baseline;    // (1 - zeta_i) / Theta_i + 1 / c_i
  double correction;  // sigma / sqrt(n) zS_i rho_i (gamma_i nu_i + p_ii / (c_i nu_i Theta_i))
  double threshold;   // |zS_i| above which an aligned tilt flips the diagonal (inf if rho_i = 0)
  double zQ_bar_diag;
  DiagonalClass classification;
};

std::vector<DiagonalSignRow> diag_sign_test(const ModelParams& p);

enum class MixedSignVerdict { all_zero, mixed, violation, not_applicable };

const char* to_string(MixedSignVerdict v);

/// Dichotomy for one-sided correlations: the limiting S-tilts are either all
/// zero or contain both signs (tolerance 1e-10).
MixedSignVerdict mixed_sign_check(const ConstrainedSolution& solution,
                                  const Eigen::VectorXd& rho);

struct ConvergenceRow {
  double gamma_P;
  double resid_W;   // ||O x_gamma - o||_W
  double err_x;     // ||x_gamma - x*||
  double err_iota;  // ||-gamma_P W (O x_gamma - o) - iota*||
  double gap_g;     // |g(x*) - g(x_gamma)|
};

/// Penalised maximisers against the constrained limit along an increasing
/// gamma_P list (all > 0). Scaled columns are gamma_P times each error.
std::vector<ConvergenceRow> penalty_convergence_study(const ModelParams& p,
                                                      std::span<const double> gamma_P_list);

}  // namespace esg
