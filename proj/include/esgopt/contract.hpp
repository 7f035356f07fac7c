#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// Induced Nash actions a_i = zQ(i, i) / c_i.
Eigen::VectorXd optimal_actions(const Sensitivities& s, const ModelParams& p);

/// Agent i is paid constant(i) + zQ_row.row(i) . (Q_T - Q_0) + zS(i) log(S_T / S_0).
struct ContractCoefficients {
  Eigen::VectorXd constant;
  Eigen::MatrixXd zQ_row;
  Eigen::VectorXd zS;

  int n() const { return static_cast<int>(zS.size()); }
  double payment(int i, const Eigen::VectorXd& dQ, double log_s_ratio) const;
};

ContractCoefficients contract_coefficients(const ModelParams& p, const Sensitivities& s);

/// Mean and variance of agent i's payment under constant actions `a`.
struct GaussianMoments {
  double mean;
  double variance;
};
GaussianMoments payment_moments(const ModelParams& p, const ContractCoefficients& k, int i,
                                const Eigen::VectorXd& a);

/// Closed-form certainty equivalent of agent i's net wealth (payment minus
/// effort cost) under constant actions `a`.
double analytic_agent_ce(const ModelParams& p, const ContractCoefficients& k, int i,
                         const Eigen::VectorXd& a);

/// Exact draws of the terminal state under constant actions.
struct PathBundle {
  Eigen::MatrixXd QT;          // n_paths x n
  Eigen::VectorXd logS_ratio;  // log(S_T / S_0)
  std::uint64_t seed = 0;
  long n_paths = 0;
  Eigen::VectorXd actions;
};

/// Paths are generated in fixed-size blocks, each with its own generator
/// seeded from (seed, block index), so the result is independent of the
/// number of worker threads.
PathBundle simulate_paths(const ModelParams& p, const Eigen::VectorXd& actions, long n_paths,
                          std::uint64_t seed);

struct McEstimate {
  double value;
  double se;
};

/// CE_i = -(1/gamma_i) log(-E[U_i(payment_i - c_i a_i^2 T / 2)]) with a
/// delta-method standard error.
std::vector<McEstimate> agent_certainty_equivalents(const ModelParams& p,
                                                    const ContractCoefficients& k,
                                                    const PathBundle& bundle);

struct PrincipalValue {
  double mc;
  double se;
  double analytic;  // -exp(-gamma_P (1^T (q0 - r) / n + T f(z)))
};

/// Principal's expected utility of (1^T Q_T - sum of payments) / n. At
/// gamma_P == 0 the utility is the identity and `analytic` is the mean.
PrincipalValue principal_value(const ModelParams& p, const ContractCoefficients& k,
                               const Sensitivities& s, const PathBundle& bundle);

struct DeviationPoint {
  double delta;
  double utility;       // MC mean of U_i under action a*_i + delta
  double se;
  double diff_to_zero;  // utility(delta) - utility(0), paired over common draws
  double diff_se;
  double analytic;      // exponential-Gaussian closed form
};

struct DeviationCurve {
  int agent;
  std::vector<DeviationPoint> points;
  double argmax_delta;
};

/// Constant unilateral deviations of one agent, all others at a*. Every grid
/// point reuses the same draws. The grid must contain 0.
DeviationCurve nash_deviation_check(const ModelParams& p, const ContractCoefficients& k,
                                    int agent_index, std::span<const double> deviation_grid,
                                    long n_paths, std::uint64_t seed);

}  // namespace esg
