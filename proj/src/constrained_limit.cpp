#include "esgopt/constrained_limit.hpp"

#include <cmath>
#include <limits>

#include "esgopt/foc_solver.hpp"

namespace esg {

double ConstraintOperator::weighted_residual_sq(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = residual(x);
  return r.dot(weights.cwiseProduct(r));
}

Eigen::VectorXd ConstraintOperator::project_feasible(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd OOt = O * O.transpose();
  return x + O.transpose() * OOt.ldlt().solve(o - O * x);
}

ConstraintOperator build_constraint_operator(const ModelParams& p) {
  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  ConstraintOperator op;
  op.O = Eigen::MatrixXd::Zero(n + 1, flat_size(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) op.O(j, q_index(n, i, j)) = p.nu(j);
    for (int k = 0; k < n; ++k) op.O(j, s_index(n, k)) = p.rho(j) * p.sigma / sqn;
  }
  for (int k = 0; k < n; ++k) op.O(n, s_index(n, k)) = 1.0;

  op.o = Eigen::VectorXd::Zero(n + 1);
  op.o.head(n) = p.nu;

  op.weights = Eigen::VectorXd::Constant(n + 1, 1.0 / (double(n) * n));
  op.weights(n) = p.sigma * p.sigma / std::pow(double(n), 3) * (n - p.rho.squaredNorm());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.O);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw NumericalError("constraint operator is rank deficient");
  }
  return op;
}

namespace {

struct AgentQuadratic {
  Eigen::MatrixXd H;  // Hessian of g
  Eigen::VectorXd h;  // gradient of g at zero
};

AgentQuadratic agent_quadratic(const ModelParams& p) {
  const FocSystem sys = hessian_blocks(with_gamma_P(p, 0.0));
  return {sys.hessian(), sys.rhs()};
}

}  // namespace

ConstrainedSolution solve_kkt(const ModelParams& p) {
  validate(p);
  const int n = p.n;
  const int dim = flat_size(n);
  const ConstraintOperator op = build_constraint_operator(p);
  const AgentQuadratic q = agent_quadratic(p);

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim + n + 1, dim + n + 1);
  K.topLeftCorner(dim, dim) = q.H;
  K.topRightCorner(dim, n + 1) = op.O.transpose();
  K.bottomLeftCorner(n + 1, dim) = op.O;
  Eigen::VectorXd rhs(dim + n + 1);
  rhs << -q.h, op.o;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw NumericalError("bordered KKT system is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);

  ConstrainedSolution out;
  const Sensitivities s = Sensitivities::unpack(sol.head(dim), n);
  out.zQ_bar = s.zQ;
  out.zS_bar = s.zS;
  out.iota = sol.tail(n + 1);
  // Column multipliers of the row-scaled problem: mu_j = nu_j iota_j.
  out.mu_bar = p.nu.cwiseProduct(out.iota.head(n));
  out.theta_star =
      p.sigma / std::sqrt(double(n)) * p.rho.dot(out.iota.head(n)) + out.iota(n);
  return out;
}

ColumnSolutionIntermediates column_intermediates(const ModelParams& p) {
  validate(p);
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const double sig = p.sigma;

  ColumnSolutionIntermediates ci;
  ci.p.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double h = p.gamma(i) * p.nu(j) * p.nu(j) + (i == j ? 1.0 / p.c(i) : 0.0);
      ci.p(i, j) = 1.0 / h;
    }
  }
  ci.Theta = ci.p.colwise().sum().transpose();
  ci.zeta = ci.p.diagonal().cwiseQuotient(p.c);
  ci.a = p.rho.cwiseProduct(ci.zeta).cwiseQuotient(p.nu);
  const Eigen::VectorXd rho_nu = p.rho.cwiseProduct(p.nu);
  ci.M = ci.p * rho_nu.asDiagonal();
  ci.upsilon = ci.p * rho_nu.cwiseProduct(rho_nu);
  ci.phi = Eigen::VectorXd::Ones(n) - p.gamma.cwiseProduct(ci.upsilon) / nd;
  ci.w = (nd * ci.Theta).cwiseInverse();

  ci.L.resize(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) ci.L(k, j) = ci.w(j) * ci.a(j) * ci.M(k, j) / ci.phi(k);
  }
  ci.V.resize(n);
  ci.U.resize(n);
  ci.C.resize(n);
  ci.r_vec.resize(n);
  for (int k = 0; k < n; ++k) {
    double c_k = 0.0;
    for (int j = 0; j < n; ++j) c_k += (1.0 - ci.zeta(j)) / ci.Theta(j) * ci.M(k, j);
    ci.C(k) = c_k / (sig * sqn);
    ci.r_vec(k) = rho_nu(k) / p.c(k) * ci.p(k, k) / (sig * sqn);
    ci.V(k) = nd / (p.gamma(k) * sig * sig * ci.phi(k));
    ci.U(k) = -(ci.C(k) + ci.r_vec(k)) / ci.phi(k);
  }

  const Eigen::MatrixXd IminusL = Eigen::MatrixXd::Identity(n, n) - ci.L;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(IminusL);
  if (!lu.isInvertible()) {
    throw NumericalError("I - L is singular: spectral radius of L reached 1");
  }
  ci.resolvent = lu.inverse();
  ci.u = ci.resolvent * ci.V;
  ci.v = ci.resolvent * ci.U;
  ci.theta_star = -ci.v.sum() / ci.u.sum();
  return ci;
}

ConstrainedSolution solve_explicit_column(const ModelParams& p) {
  const ColumnSolutionIntermediates ci = column_intermediates(p);
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const double sig = p.sigma;

  ConstrainedSolution out;
  out.theta_star = ci.theta_star;
  out.zS_bar = ci.u * ci.theta_star + ci.v;
  out.mu_bar.resize(n);
  for (int j = 0; j < n; ++j) {
    out.mu_bar(j) =
        (1.0 - ci.zeta(j) - sig / sqn * ci.a(j) * out.zS_bar(j)) / (nd * ci.Theta(j));
  }
  out.zQ_bar.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.zQ_bar(i, j) = ci.p(i, j) * (nd * out.mu_bar(j) + (i == j ? 1.0 / p.c(i) : 0.0) -
                                       p.gamma(i) * sig / sqn * out.zS_bar(i) * p.rho(j) * p.nu(j));
    }
  }
  out.iota.resize(n + 1);
  out.iota.head(n) = out.mu_bar.cwiseQuotient(p.nu);
  out.iota(n) = out.theta_star - sig / sqn * p.rho.dot(out.iota.head(n));
  return out;
}

MMatrixDiagnostics m_matrix_diagnostics(const ModelParams& p) {
  const ColumnSolutionIntermediates ci = column_intermediates(p);
  const int n = p.n;
  MMatrixDiagnostics d;
  Eigen::EigenSolver<Eigen::MatrixXd> es(ci.L, false);
  d.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  d.min_resolvent_entry = ci.resolvent.minCoeff();
  d.L_nonneg = ci.L.minCoeff() >= 0.0;
  d.weighted_row_gap = ci.phi - ci.L.transpose() * ci.phi;
  d.expected_gap = 1.0 - p.rho.squaredNorm() / n;
  d.weighted_row_test = d.weighted_row_gap.minCoeff() > 0.0;

  Eigen::MatrixXd series = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int m = 1; m < 50; ++m) {
    power = power * ci.L;
    series += power;
  }
  d.neumann_deviation = (series - ci.resolvent).cwiseAbs().maxCoeff();
  return d;
}

const char* to_string(DiagonalClass c) {
  switch (c) {
    case DiagonalClass::zero_correlation: return "zero_correlation_positive";
    case DiagonalClass::standard_tilt: return "standard_tilt_positive";
    case DiagonalClass::aligned_tilt_positive: return "aligned_tilt_positive";
    case DiagonalClass::aligned_tilt_negative: return "negative_diagonal";
  }
  return "unknown";
}

std::vector<DiagonalSignRow> diag_sign_test(const ModelParams& p) {
  const ColumnSolutionIntermediates ci = column_intermediates(p);
  const ConstrainedSolution sol = solve_explicit_column(p);
  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  const double sig = p.sigma;

  std::vector<DiagonalSignRow> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double pii = ci.p(i, i);
    const double lever = p.gamma(i) * p.nu(i) + pii / (p.c(i) * p.nu(i) * ci.Theta(i));
    DiagonalSignRow row;
    row.baseline = (1.0 - ci.zeta(i)) / ci.Theta(i) + 1.0 / p.c(i);
    row.correction = sig / sqn * sol.zS_bar(i) * p.rho(i) * lever;
    row.B = row.baseline - row.correction;
    row.zQ_bar_diag = sol.zQ_bar(i, i);
    if (p.rho(i) == 0.0) {
      row.threshold = std::numeric_limits<double>::infinity();
      row.classification = DiagonalClass::zero_correlation;
    } else {
      row.threshold = sqn / (sig * std::abs(p.rho(i)) * lever) * row.baseline;
      if (sol.zS_bar(i) * p.rho(i) <= 0.0) {
        row.classification = DiagonalClass::standard_tilt;
      } else if (std::abs(sol.zS_bar(i)) > row.threshold) {
        row.classification = DiagonalClass::aligned_tilt_negative;
      } else {
        row.classification = DiagonalClass::aligned_tilt_positive;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

const char* to_string(MixedSignVerdict v) {
  switch (v) {
    case MixedSignVerdict::all_zero: return "all_zero";
    case MixedSignVerdict::mixed: return "mixed";
    case MixedSignVerdict::violation: return "violation";
    case MixedSignVerdict::not_applicable: return "not_applicable";
  }
  return "unknown";
}

MixedSignVerdict mixed_sign_check(const ConstrainedSolution& solution,
                                  const Eigen::VectorXd& rho) {
  constexpr double tol = 1e-10;
  const bool any_pos = (rho.array() > 0.0).any();
  const bool any_neg = (rho.array() < 0.0).any();
  if (any_pos == any_neg) return MixedSignVerdict::not_applicable;  // two-sided or all zero

  const Eigen::VectorXd& z = solution.zS_bar;
  if (z.lpNorm<Eigen::Infinity>() <= tol) return MixedSignVerdict::all_zero;
  if (z.maxCoeff() > tol && z.minCoeff() < -tol) return MixedSignVerdict::mixed;
  return MixedSignVerdict::violation;
}

std::vector<ConvergenceRow> penalty_convergence_study(const ModelParams& p,
                                                      std::span<const double> gamma_P_list) {
  if (gamma_P_list.empty()) throw ValidationError("gamma_P_list", -1, "empty list");
  for (std::size_t k = 0; k < gamma_P_list.size(); ++k) {
    if (!(gamma_P_list[k] > 0.0)) {
      throw ValidationError("gamma_P_list", static_cast<int>(k), "values must be > 0");
    }
    if (k > 0 && !(gamma_P_list[k] > gamma_P_list[k - 1])) {
      throw ValidationError("gamma_P_list", static_cast<int>(k), "grid must increase");
    }
  }
  const ConstraintOperator op = build_constraint_operator(p);
  const ConstrainedSolution star = solve_kkt(p);
  const Eigen::VectorXd x_star = star.sensitivities().pack();
  const double g_star = eval_g_phi(p, star.sensitivities()).g;

  std::vector<ConvergenceRow> rows;
  rows.reserve(gamma_P_list.size());
  for (double gp : gamma_P_list) {
    const Sensitivities s = solve_direct(with_gamma_P(p, gp));
    const Eigen::VectorXd x = s.pack();
    const Eigen::VectorXd r = op.residual(x);
    const Eigen::VectorXd iota_hat = -gp * op.weights.cwiseProduct(r);
    ConvergenceRow row;
    row.gamma_P = gp;
    row.resid_W = std::sqrt(r.dot(op.weights.cwiseProduct(r)));
    row.err_x = (x - x_star).norm();
    row.err_iota = (iota_hat - star.iota).norm();
    row.gap_g = std::abs(g_star - eval_g_phi(p, s).g);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace esg
