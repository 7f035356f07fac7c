#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include "esgopt/errors.hpp"

namespace esg {

/// The economy: n agents contracted by one principal, with one traded factor S.
///
/// Per-agent vectors (c, gamma, nu, rho, q0, r) all have length n. A value of
/// gamma_P == 0 denotes the risk-neutral limit regime.
struct ModelParams {
  int n = 0;
  Eigen::VectorXd c;      // effort-cost scales, > 0
  Eigen::VectorXd gamma;  // agent risk aversions, > 0
  Eigen::VectorXd nu;     // signal volatilities, > 0
  Eigen::VectorXd rho;    // correlation of each signal with S, in (-1, 1)
  double sigma = 1.0;     // volatility of S, > 0
  double mu = 0.0;        // drift of S
  double s0 = 1.0;        // initial price of S, > 0
  Eigen::VectorXd q0;     // initial signal levels
  double gamma_P = 0.0;   // principal risk aversion, >= 0
  double T = 1.0;         // horizon, > 0
  Eigen::VectorXd r;      // reservation certainty equivalents

  bool operator==(const ModelParams& other) const;
};

/// Checks every range and shape constraint; returns the record unchanged.
/// Throws ValidationError naming the first offending field and index.
ModelParams validate(const ModelParams& raw);

/// Symmetric economy: every per-agent field is the given scalar replicated n times.
ModelParams homogeneous_params(int n, double c, double gamma, double nu, double rho, double sigma,
                               double gamma_P, double mu = 0.0, double s0 = 1.0,
                               double q0 = 0.0, double T = 1.0, double r = 0.0);

/// Parses one JSON document. Per-agent keys accept a scalar (broadcast to n) or
/// an array of length n. Optional keys: mu (0), s0 (1), q0 (0), T (1), r (0).
ModelParams load_config(std::string_view source);
ModelParams load_config_file(const std::string& path);

/// Inverse of load_config; doubles are written with round-trip precision.
std::string serialize(const ModelParams& p);

/// Replaces gamma_P and revalidates.
ModelParams with_gamma_P(ModelParams p, double gamma_P);

/// Directory holding the shipped table1/table2/table3 presets.
std::string preset_directory();

}  // namespace esg
