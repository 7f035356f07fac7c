#include "esgopt/experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "esgopt/constrained_limit.hpp"
#include "esgopt/row_decoupled_limit.hpp"

namespace esg {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

double parse_double(std::string_view text, const char* field) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ValidationError(field, -1, "cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

void check_increasing(std::span<const double> grid, const char* field) {
  if (grid.empty()) throw ValidationError(field, -1, "empty grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0)) throw ValidationError(field, static_cast<int>(k), "values must be >= 0");
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw ValidationError(field, static_cast<int>(k), "grid must increase");
    }
  }
}

double diagonal_at(const ModelParams& p, int row, double gp) {
  return optimal_sensitivities(with_gamma_P(p, gp)).zQ(row, row);
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) {
    throw ValidationError("grid", -1, "expected start:stop:step");
  }
  const double start = parse_double(text.substr(0, c1), "grid");
  const double stop = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid");
  const double step = parse_double(text.substr(c2 + 1), "grid");
  if (!(step > 0.0)) throw ValidationError("grid", -1, "step must be > 0");
  if (stop < start) throw ValidationError("grid", -1, "grid must increase");
  const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(count);
  for (long k = 0; k < count; ++k) g[k] = start + k * step;
  return g;
}

std::pair<double, double> parse_bracket(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ValidationError("bracket", -1, "expected a,b");
  const double a = parse_double(text.substr(0, comma), "bracket");
  const double b = parse_double(text.substr(comma + 1), "bracket");
  if (!(a >= 0.0) || !(b > a)) throw ValidationError("bracket", -1, "need 0 <= a < b");
  return {a, b};
}

SweepResult sweep(const ModelParams& p, std::span<const double> grid) {
  check_increasing(grid, "grid");
  SweepResult r;
  r.gamma_P.assign(grid.begin(), grid.end());
  r.points.reserve(grid.size());
  r.f_star.reserve(grid.size());
  for (double gp : grid) {
    const ModelParams q = with_gamma_P(p, gp);
    r.points.push_back(optimal_sensitivities(q));
    r.f_star.push_back(eval_f(q, r.points.back()));
  }
  return r;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  const int n = r.points.empty() ? 0 : r.points.front().n();
  os << "gamma_P";
  for (int i = 1; i <= n; ++i) os << ",zS_" << i;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) os << ",zQ_" << i << '_' << j;
  }
  os << ",sum_zS";
  for (int j = 1; j <= n; ++j) os << ",colsum_" << j;
  os << ",f_star\n";
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    const Sensitivities& s = r.points[k];
    os << num(r.gamma_P[k]);
    for (int i = 0; i < n; ++i) os << ',' << num(s.zS(i));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) os << ',' << num(s.zQ(i, j));
    }
    os << ',' << num(r.sum_zS(k));
    const Eigen::VectorXd cs = r.column_sums(k);
    for (int j = 0; j < n; ++j) os << ',' << num(cs(j));
    os << ',' << num(r.f_star[k]) << '\n';
  }
}

void write_solve_csv(std::ostream& os, const ModelParams& p, const Sensitivities& s) {
  const int n = p.n;
  const Eigen::VectorXd a = optimal_actions(s, p);
  os << "quantity,i,j,value\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) os << "zQ," << i + 1 << ',' << j + 1 << ',' << num(s.zQ(i, j)) << '\n';
  }
  for (int i = 0; i < n; ++i) os << "zS," << i + 1 << ",0," << num(s.zS(i)) << '\n';
  for (int i = 0; i < n; ++i) os << "action," << i + 1 << ",0," << num(a(i)) << '\n';
  os << "f_star,0,0," << num(eval_f(p, s)) << '\n';
}

FlipResult flip_threshold(const ModelParams& p, int row, double a, double b, double tol,
                          int max_iter) {
  validate(p);
  if (row < 0 || row >= p.n) throw ValidationError("row", row, "row index out of range");
  if (!(a >= 0.0) || !(b > a)) throw ValidationError("bracket", -1, "need 0 <= a < b");
  if (!(tol > 0.0)) throw ValidationError("tol", -1, "must be > 0");
  if (max_iter < 1) throw ValidationError("max_iter", -1, "must be >= 1");

  constexpr int kScan = 64;
  std::vector<double> xs(kScan + 1), ys(kScan + 1);
  for (int k = 0; k <= kScan; ++k) {
    xs[k] = a + (b - a) * k / kScan;
    ys[k] = diagonal_at(p, row, xs[k]);
  }
  int changes = 0;
  int first = -1;
  for (int k = 0; k < kScan; ++k) {
    if (sign_of(ys[k]) != sign_of(ys[k + 1])) {
      ++changes;
      if (first < 0) first = k;
    }
  }
  if (first < 0) {
    throw NoSignChange("no sign change of zQ(" + std::to_string(row + 1) + "," +
                       std::to_string(row + 1) + ") on [" + num(a) + ", " + num(b) + "]");
  }

  FlipResult res;
  res.sign_changes_in_scan = changes;
  double lo = xs[first], hi = xs[first + 1];
  const int s_lo = sign_of(ys[first]);
  int it = 0;
  if (s_lo == 0) {
    hi = lo;
  } else {
    while (hi - lo > tol && it < max_iter) {
      const double mid = 0.5 * (lo + hi);
      const int s_mid = sign_of(diagonal_at(p, row, mid));
      ++it;
      if (s_mid == 0) {
        lo = hi = mid;
        break;
      }
      (s_mid == s_lo ? lo : hi) = mid;
    }
    if (hi - lo > tol) throw NumericalError("bisection did not reach tolerance");
  }
  res.lo = lo;
  res.hi = hi;
  res.iterations = it;
  res.gamma_P_dagger = 0.5 * (lo + hi);
  return res;
}

void write_constrained_csv(std::ostream& os, const ModelParams& p) {
  const int n = p.n;
  const ConstrainedSolution kkt = solve_kkt(p);
  const ConstrainedSolution col = solve_explicit_column(p);
  const MMatrixDiagnostics d = m_matrix_diagnostics(p);
  const std::vector<DiagonalSignRow> diag = diag_sign_test(p);
  const MixedSignVerdict verdict = mixed_sign_check(col, p.rho);

  os << "section,name,i,j,value\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      os << "solution,zQ_bar," << i + 1 << ',' << j + 1 << ',' << num(col.zQ_bar(i, j)) << '\n';
    }
  }
  for (int i = 0; i < n; ++i) os << "solution,zS_bar," << i + 1 << ",0," << num(col.zS_bar(i)) << '\n';
  for (int j = 0; j < n; ++j) os << "multiplier,mu_bar," << j + 1 << ",0," << num(col.mu_bar(j)) << '\n';
  os << "multiplier,theta_star,0,0," << num(col.theta_star) << '\n';
  for (int k = 0; k <= n; ++k) os << "multiplier,iota," << k + 1 << ",0," << num(col.iota(k)) << '\n';

  const double kkt_gap = std::max(
      (kkt.zQ_bar - col.zQ_bar).cwiseAbs().maxCoeff(), (kkt.zS_bar - col.zS_bar).cwiseAbs().maxCoeff());
  os << "check,kkt_vs_column_max_abs,0,0," << num(kkt_gap) << '\n';
  os << "check,sum_zS_bar,0,0," << num(col.zS_bar.sum()) << '\n';
  const Eigen::VectorXd cs = col.zQ_bar.colwise().sum().transpose();
  for (int j = 0; j < n; ++j) os << "check,colsum," << j + 1 << ",0," << num(cs(j)) << '\n';

  os << "m_matrix,spectral_radius,0,0," << num(d.spectral_radius) << '\n';
  os << "m_matrix,min_resolvent_entry,0,0," << num(d.min_resolvent_entry) << '\n';
  os << "m_matrix,L_nonneg,0,0," << (d.L_nonneg ? 1 : 0) << '\n';
  for (int j = 0; j < n; ++j) {
    os << "m_matrix,weighted_row_gap," << j + 1 << ",0," << num(d.weighted_row_gap(j)) << '\n';
  }
  os << "m_matrix,expected_gap,0,0," << num(d.expected_gap) << '\n';
  os << "m_matrix,weighted_row_test,0,0," << (d.weighted_row_test ? 1 : 0) << '\n';
  os << "m_matrix,neumann_deviation,0,0," << num(d.neumann_deviation) << '\n';

  for (int i = 0; i < n; ++i) {
    const DiagonalSignRow& r = diag[i];
    os << "diag_sign,B," << i + 1 << ",0," << num(r.B) << '\n';
    os << "diag_sign,baseline," << i + 1 << ",0," << num(r.baseline) << '\n';
    os << "diag_sign,correction," << i + 1 << ",0," << num(r.correction) << '\n';
    os << "diag_sign,threshold," << i + 1 << ",0," << num(r.threshold) << '\n';
    os << "diag_sign,class," << i + 1 << ",0," << to_string(r.classification) << '\n';
  }
  os << "mixed_sign,verdict,0,0," << to_string(verdict) << '\n';
}

void write_convergence_csv(std::ostream& os, const ModelParams& p,
                           std::span<const double> gamma_P_list) {
  const std::vector<ConvergenceRow> rows = penalty_convergence_study(p, gamma_P_list);
  os << "gamma_P,resid_W,err_x,err_iota,gap_g,scaled_resid,scaled_err,scaled_iota,scaled_gap\n";
  for (const ConvergenceRow& r : rows) {
    const double g = r.gamma_P;
    os << num(g) << ',' << num(r.resid_W) << ',' << num(r.err_x) << ',' << num(r.err_iota) << ','
       << num(r.gap_g) << ',' << num(g * r.resid_W) << ',' << num(g * r.err_x) << ','
       << num(g * r.err_iota) << ',' << num(g * r.gap_g) << '\n';
  }
}

SimulationReport run_simulation(const ModelParams& p, long n_paths, std::uint64_t seed,
                                std::span<const double> deviation_grid) {
  validate(p);
  if (n_paths < 1) throw ValidationError("n_paths", -1, "must be >= 1");
  const Sensitivities s = optimal_sensitivities(p);
  const ContractCoefficients k = contract_coefficients(p, s);
  const PathBundle b = simulate_paths(p, optimal_actions(s, p), n_paths, seed);
  SimulationReport rep;
  rep.ce = agent_certainty_equivalents(p, k, b);
  rep.principal = principal_value(p, k, s, b);
  for (int i = 0; i < p.n; ++i) {
    rep.deviations.push_back(nash_deviation_check(p, k, i, deviation_grid, n_paths, seed));
  }
  return rep;
}

void write_simulate_csv(std::ostream& os, const ModelParams& p, const SimulationReport& r) {
  os << "agent,CE,SE,r,pass\n";
  for (int i = 0; i < p.n; ++i) {
    const bool pass = std::abs(r.ce[i].value - p.r(i)) <= 3.0 * r.ce[i].se;
    os << i + 1 << ',' << num(r.ce[i].value) << ',' << num(r.ce[i].se) << ',' << num(p.r(i)) << ','
       << (pass ? 1 : 0) << '\n';
  }
}

FigurePreset figure_preset(std::string_view name) {
  const std::filesystem::path dir = preset_directory();
  if (name == "fig3") return {(dir / "table1.json").string(), parse_grid("0:10:0.25")};
  if (name == "fig4") return {(dir / "table2.json").string(), parse_grid("0:40:1")};
  if (name == "fig5") return {(dir / "table3.json").string(), parse_grid("0:5:0.01")};
  throw ValidationError("preset", -1, "unknown preset '" + std::string(name) + "'");
}

std::vector<double> default_deviation_grid() {
  std::vector<double> g;
  for (int k = -4; k <= 4; ++k) g.push_back(0.05 * k);
  return g;
}

}  // namespace esg
