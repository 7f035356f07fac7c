#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esgopt/contract.hpp"
#include "esgopt/model_params.hpp"
#include "esgopt/objective.hpp"

namespace esg {

/// `start:stop:step`, inclusive of stop up to half a step. Values are
/// start + k * step, so no drift accumulates.
std::vector<double> parse_grid(std::string_view text);

/// `a,b` with a < b.
std::pair<double, double> parse_bracket(std::string_view text);

struct SweepResult {
  std::vector<double> gamma_P;
  std::vector<Sensitivities> points;
  std::vector<double> f_star;

  double sum_zS(std::size_t k) const { return points[k].zS.sum(); }
  Eigen::VectorXd column_sums(std::size_t k) const {
    return points[k].zQ.colwise().sum().transpose();
  }
};

/// One maximiser per grid value (strictly increasing, >= 0).
SweepResult sweep(const ModelParams& p, std::span<const double> grid);

/// Header: gamma_P, zS_1..zS_n, zQ_1_1..zQ_n_n (row-major), sum_zS, colsum_1..colsum_n, f_star.
void write_sweep_csv(std::ostream& os, const SweepResult& r);

/// Long format `quantity,i,j,value` (1-based indices, 0 where unused).
void write_solve_csv(std::ostream& os, const ModelParams& p, const Sensitivities& s);

struct FlipResult {
  double gamma_P_dagger;
  double lo, hi;  // final bracket, hi - lo <= tol
  int iterations;
  int sign_changes_in_scan;  // > 1 means the crossing is not unique
};

/// Zero of gamma_P -> zQ(row, row) by bisection. The bracket is first scanned
/// on a uniform grid and bisection runs inside the first sub-interval with a
/// sign change, which also covers non-monotone paths. Throws NoSignChange
/// when the scan sees none.
FlipResult flip_threshold(const ModelParams& p, int row, double a, double b, double tol = 1e-4,
                          int max_iter = 60);

class NoSignChange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Long format `section,name,i,j,value` covering the constrained maximiser,
/// the multipliers and every structural diagnostic.
void write_constrained_csv(std::ostream& os, const ModelParams& p);

/// Header: gamma_P, resid_W, err_x, err_iota, gap_g, then the four columns scaled by gamma_P.
void write_convergence_csv(std::ostream& os, const ModelParams& p,
                           std::span<const double> gamma_P_list);

struct SimulationReport {
  std::vector<McEstimate> ce;
  PrincipalValue principal;
  std::vector<DeviationCurve> deviations;
};

/// Monte Carlo check of the optimal contract at the configured gamma_P:
/// participation, principal value and constant-deviation curves.
SimulationReport run_simulation(const ModelParams& p, long n_paths, std::uint64_t seed,
                                std::span<const double> deviation_grid);

/// Header: agent, CE, SE, r, pass (pass = |CE - r| <= 3 SE).
void write_simulate_csv(std::ostream& os, const ModelParams& p, const SimulationReport& r);

/// Figure presets: fig3 -> table1 on 0:10:0.25, fig4 -> table2 on 0:40:1,
/// fig5 -> table3 on 0:5:0.01.
struct FigurePreset {
  std::string config_path;
  std::vector<double> grid;
};
FigurePreset figure_preset(std::string_view name);

/// Default deviation grid {-0.2, -0.15, ..., 0.2}.
std::vector<double> default_deviation_grid();

}  // namespace esg
