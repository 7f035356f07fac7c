#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// Values below this magnitude are treated as zero in every sign comparison.
inline constexpr double kStrictSignTol = 1e-12;

/// Risk-neutral (gamma_P = 0) maximiser. The objective separates by row, so
/// row i depends on the other agents only through ||rho||^2.
struct Gp0Solution {
  Eigen::VectorXd s0;         // S-tilts
  Eigen::MatrixXd q0_matrix;  // q0(i, j) = nu_j * zQ(i, j)
  Eigen::VectorXd pi;         // ||rho||^2 - rho_i^2 + (gamma_i / A_i) rho_i^2, in [0, n)
  Eigen::VectorXd nu_dagger;  // nu_i at which |s0_i| peaks

  Sensitivities sensitivities(const Eigen::VectorXd& nu) const;
};

/// gamma_P in `p` is ignored.
Gp0Solution gp0_heterogeneous(const ModelParams& p);

/// Maximiser used by the front ends: exact row-decoupled formulas at
/// gamma_P == 0, the direct solve otherwise.
Sensitivities optimal_sensitivities(const ModelParams& p);

/// Classification of a sensitivity record against the risk-neutral sign rules:
/// diagonal > 0, sgn(zS_i) = -sgn(rho_i), sgn(zQ_ij) = sgn(rho_i rho_j).
struct SignReport {
  Eigen::MatrixXi zQ_sign;            // -1, 0, +1 with |x| <= kStrictSignTol -> 0
  Eigen::VectorXi zS_sign;
  Eigen::MatrixXi off_diag_expected;  // sgn(rho_i rho_j); 0 = unconstrained (and 0 on the diagonal)
  Eigen::VectorXi zS_expected;        // -sgn(rho_i); 0 = unconstrained
  bool diagonal_all_positive = false;
  bool s_tilt_anti_rho = false;
  bool off_diagonal_matches_rho = false;
};

SignReport sign_pattern(const Sensitivities& s, const Eigen::VectorXd& rho);

enum class SignScope { all, diagonal, s_tilt, off_diagonal };

struct PersistenceResult {
  std::optional<double> last_stable;  // largest grid value before the first flip
  std::optional<double> first_flip;   // first grid value where a strict sign changed
  std::string first_flip_entry;       // e.g. "zQ(3,3)" (1-based), empty if none
};

/// Walks an increasing gamma_P grid and reports how long the strict signs of
/// the gamma_P = 0 maximiser survive (restricted to `scope`).
PersistenceResult persistence_scan(const ModelParams& p, std::span<const double> gamma_P_grid,
                                   SignScope scope = SignScope::all);

}  // namespace esg
