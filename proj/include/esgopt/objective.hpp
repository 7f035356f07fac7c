#pragma once

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"

namespace esg {

/// Contract sensitivities.
///
/// zQ(i, j) is contract i's loading on signal Q^j (rows index the recipient
/// contract, columns the signal); the diagonal drives agent i's action.
/// zS(i) is contract i's tilt on log(S_T / S_0).
///
/// The flat layout used by every linear system in this library is
/// x = (vec(zQ), zS) with vec stacking the columns of zQ, so zQ(i, j) sits at
/// index j * n + i and zS(k) at n * n + k.
struct Sensitivities {
  Eigen::MatrixXd zQ;
  Eigen::VectorXd zS;

  static Sensitivities zeros(int n);
  static Sensitivities unpack(const Eigen::VectorXd& x, int n);

  int n() const { return static_cast<int>(zS.size()); }
  Eigen::VectorXd pack() const;
};

inline int q_index(int n, int i, int j) { return j * n + i; }
inline int s_index(int n, int k) { return n * n + k; }
inline int flat_size(int n) { return n * n + n; }

/// Hessian blocks and right-hand side of the stationarity system
///   [H_QQ  H_QS; H_QS^T  H_SS] (vec(zQ); zS) = -(vec(b_Q); b_S).
struct FocSystem {
  Eigen::MatrixXd H_QQ;  // n^2 x n^2
  Eigen::MatrixXd H_QS;  // n^2 x n
  Eigen::MatrixXd H_SS;  // n x n
  Eigen::MatrixXd b_Q;   // n x n, b_Q(i, j)
  Eigen::VectorXd b_S;   // n

  Eigen::MatrixXd hessian() const;
  Eigen::VectorXd rhs() const;  // (vec(b_Q), b_S), i.e. the gradient of f at zero
};

/// Principal's reduced objective, evaluated term by term in its double-sum form.
double eval_f(const ModelParams& p, const Sensitivities& s);

/// Same function written as a constant minus completed squares.
double eval_f_decomposed(const ModelParams& p, const Sensitivities& s);

/// Split f = g - (gamma_P / 2) phi into the agents' part g and the aggregate
/// exposure penalty phi >= 0.
struct GPhi {
  double g;
  double phi;
};
GPhi eval_g_phi(const ModelParams& p, const Sensitivities& s);

/// Analytic gradient of f, shaped like the argument.
Sensitivities gradient(const ModelParams& p, const Sensitivities& s);

/// Constant Hessian blocks and gradient-at-zero of f.
FocSystem hessian_blocks(const ModelParams& p);

/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace esg
