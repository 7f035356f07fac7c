#include "esgopt/row_decoupled_limit.hpp"

#include <cmath>

#include "esgopt/foc_solver.hpp"

namespace esg {

namespace {

int strict_sign(double x) {
  if (x > kStrictSignTol) return 1;
  if (x < -kStrictSignTol) return -1;
  return 0;
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

std::string entry_name(const char* what, int i, int j = -1) {
  std::string s = std::string(what) + "(" + std::to_string(i + 1);
  if (j >= 0) s += "," + std::to_string(j + 1);
  return s + ")";
}

}  // namespace

Sensitivities Gp0Solution::sensitivities(const Eigen::VectorXd& nu) const {
  Sensitivities s;
  s.zQ = q0_matrix * nu.cwiseInverse().asDiagonal();
  s.zS = s0;
  return s;
}

Gp0Solution gp0_heterogeneous(const ModelParams& p) {
  validate(p);
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const double rho_sq = p.rho.squaredNorm();

  Gp0Solution out;
  out.s0.resize(n);
  out.q0_matrix.resize(n, n);
  out.pi.resize(n);
  out.nu_dagger.resize(n);
  for (int i = 0; i < n; ++i) {
    const double A = p.gamma(i) + 1.0 / (p.c(i) * p.nu(i) * p.nu(i));
    const double rho2 = p.rho(i) * p.rho(i);
    out.pi(i) = rho_sq - rho2 + p.gamma(i) / A * rho2;
    out.s0(i) = -sqn / p.sigma * p.rho(i) / (A * p.c(i) * p.nu(i) * (nd - out.pi(i)));
    for (int j = 0; j < n; ++j) {
      out.q0_matrix(i, j) = -p.sigma / sqn * out.s0(i) * p.rho(j);
    }
    out.q0_matrix(i, i) =
        (1.0 / (p.c(i) * p.nu(i)) - p.gamma(i) * p.sigma / sqn * p.rho(i) * out.s0(i)) / A;
    out.nu_dagger(i) =
        std::sqrt((nd - rho_sq + rho2) / (p.gamma(i) * p.c(i) * (nd - rho_sq)));
  }
  return out;
}

Sensitivities optimal_sensitivities(const ModelParams& p) {
  if (p.gamma_P == 0.0) return gp0_heterogeneous(p).sensitivities(p.nu);
  return solve_direct(p);
}

SignReport sign_pattern(const Sensitivities& s, const Eigen::VectorXd& rho) {
  const int n = s.n();
  if (rho.size() != n) throw ValidationError("rho", -1, "dimension mismatch");
  SignReport rep;
  rep.zQ_sign.resize(n, n);
  rep.zS_sign.resize(n);
  rep.off_diag_expected = Eigen::MatrixXi::Zero(n, n);
  rep.zS_expected.resize(n);
  rep.diagonal_all_positive = true;
  rep.s_tilt_anti_rho = true;
  rep.off_diagonal_matches_rho = true;
  for (int i = 0; i < n; ++i) {
    rep.zS_sign(i) = strict_sign(s.zS(i));
    rep.zS_expected(i) = -sgn(rho(i));
    if (rep.zS_expected(i) != 0 && rep.zS_sign(i) != rep.zS_expected(i)) {
      rep.s_tilt_anti_rho = false;
    }
    for (int j = 0; j < n; ++j) {
      rep.zQ_sign(i, j) = strict_sign(s.zQ(i, j));
      if (i == j) {
        if (rep.zQ_sign(i, i) != 1) rep.diagonal_all_positive = false;
        continue;
      }
      rep.off_diag_expected(i, j) = sgn(rho(i) * rho(j));
      if (rep.off_diag_expected(i, j) != 0 && rep.zQ_sign(i, j) != rep.off_diag_expected(i, j)) {
        rep.off_diagonal_matches_rho = false;
      }
    }
  }
  return rep;
}

PersistenceResult persistence_scan(const ModelParams& p, std::span<const double> gamma_P_grid,
                                   SignScope scope) {
  if (gamma_P_grid.empty()) throw ValidationError("gamma_P_grid", -1, "empty grid");
  for (std::size_t k = 0; k < gamma_P_grid.size(); ++k) {
    if (!(gamma_P_grid[k] >= 0.0) || (k > 0 && !(gamma_P_grid[k] > gamma_P_grid[k - 1]))) {
      throw ValidationError("gamma_P_grid", static_cast<int>(k),
                            "grid must be non-negative and strictly increasing");
    }
  }
  const int n = p.n;
  const Sensitivities ref = gp0_heterogeneous(p).sensitivities(p.nu);
  const bool use_diag = scope == SignScope::all || scope == SignScope::diagonal;
  const bool use_s = scope == SignScope::all || scope == SignScope::s_tilt;
  const bool use_off = scope == SignScope::all || scope == SignScope::off_diagonal;

  PersistenceResult result;
  for (double gp : gamma_P_grid) {
    const Sensitivities s = optimal_sensitivities(with_gamma_P(p, gp));
    std::string flipped;
    for (int i = 0; i < n && flipped.empty(); ++i) {
      if (use_s) {
        const int r = strict_sign(ref.zS(i));
        if (r != 0 && strict_sign(s.zS(i)) != r) flipped = entry_name("zS", i);
      }
      for (int j = 0; j < n && flipped.empty(); ++j) {
        if ((i == j && !use_diag) || (i != j && !use_off)) continue;
        const int r = strict_sign(ref.zQ(i, j));
        if (r != 0 && strict_sign(s.zQ(i, j)) != r) flipped = entry_name("zQ", i, j);
      }
    }
    if (!flipped.empty()) {
      result.first_flip = gp;
      result.first_flip_entry = flipped;
      return result;
    }
    result.last_stable = gp;
  }
  return result;
}

}  // namespace esg
