#include "esgopt/foc_solver.hpp"

#include <cmath>
#include <sstream>

namespace esg {

ClosedFormIntermediates compute_intermediates(const ModelParams& p) {
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const double gp = p.gamma_P;
  const double sig = p.sigma;
  const double inv_gamma_sum = p.gamma.cwiseInverse().sum();
  const double rho_sq_sum = p.rho.squaredNorm();

  ClosedFormIntermediates ci;
  ci.A.resize(n);
  ci.alpha.resize(n);
  ci.kappa.resize(n);
  ci.d.resize(n);
  ci.m.resize(n);
  ci.muDiag.resize(n);
  ci.ell.resize(n);
  for (int i = 0; i < n; ++i) {
    const double c = p.c(i), g = p.gamma(i), nu = p.nu(i), rho = p.rho(i);
    const double A = g + 1.0 / (c * nu * nu);
    // 1 - gamma_i / A_i, the share of A_i not due to risk aversion.
    const double resid = 1.0 - g / A;
    const double kappa = 1.0 + gp / nd * (inv_gamma_sum - resid / g);
    ci.A(i) = A;
    ci.alpha(i) = gp / (nd * g);
    ci.kappa(i) = kappa;
    ci.d(i) = (nu - 1.0 / (c * nu * A)) / kappa;
    ci.m(i) = sig / (sqn * kappa) * rho * resid;
    ci.muDiag(i) = g * sig * sig / nd * (1.0 - rho_sq_sum / nd + resid * rho * rho / nd) +
                   gp * sig * sig * rho * rho / (kappa * nd * nd * nd) * resid * resid;
    ci.ell(i) = gp * sig * rho / std::pow(nd, 2.5) * resid * ci.d(i) -
                g * sig / std::pow(nd, 1.5) * rho / (A * c * nu);
  }
  ci.lambda_n = gp * sig * sig / (nd * nd * nd) * (nd - rho_sq_sum);
  ci.s_vec = ci.muDiag.cwiseInverse();
  ci.y_n = ci.lambda_n / (1.0 + ci.lambda_n * ci.s_vec.sum());
  return ci;
}

Sensitivities solve_direct(const ModelParams& p) {
  const FocSystem sys = hessian_blocks(p);
  const Eigen::MatrixXd negH = -sys.hessian();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(negH);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("stationarity system is singular or not definite");
  }
  const Eigen::VectorXd D = ldlt.vectorD();
  if (D.minCoeff() <= 1e-14 * D.cwiseAbs().maxCoeff()) {
    throw NumericalError("stationarity system is numerically singular (|rho| near 1?)");
  }
  // H x = -b  <=>  (-H) x = b
  const Eigen::VectorXd x = ldlt.solve(sys.rhs());
  return Sensitivities::unpack(x, p.n);
}

double foc_residual(const ModelParams& p, const Sensitivities& s) {
  const FocSystem sys = hessian_blocks(p);
  return (sys.hessian() * s.pack() + sys.rhs()).lpNorm<Eigen::Infinity>();
}

Sensitivities solve_closed_form(const ModelParams& p) {
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const ClosedFormIntermediates ci = compute_intermediates(p);

  // (D + lambda 1 1^T)^{-1} = S - y s s^T
  Sensitivities out;
  out.zS = ci.s_vec.cwiseProduct(ci.ell) - ci.y_n * ci.s_vec * ci.s_vec.dot(ci.ell);

  Eigen::VectorXd K(n);
  for (int j = 0; j < n; ++j) K(j) = ci.K(j, out.zS);

  out.zQ.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double q;
      if (j != i) {
        q = ci.alpha(i) * K(j) - p.sigma / sqn * p.rho(j) * out.zS(i);
      } else {
        q = (p.gamma_P / nd * K(i) - p.gamma(i) * p.sigma / sqn * p.rho(i) * out.zS(i) +
             1.0 / (p.c(i) * p.nu(i))) /
            ci.A(i);
      }
      out.zQ(i, j) = q / p.nu(j);
    }
  }
  return out;
}

Eigen::VectorXd fd_gradient(const ModelParams& p, const Sensitivities& s, double step) {
  const int n = p.n;
  const Eigen::VectorXd x = s.pack();
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    grad(k) = (eval_f(p, Sensitivities::unpack(xp, n)) - eval_f(p, Sensitivities::unpack(xm, n))) /
              (2.0 * step);
  }
  return grad;
}

Eigen::MatrixXd fd_hessian(const ModelParams& p, const Sensitivities& s, double step) {
  const int n = p.n;
  const Eigen::VectorXd x = s.pack();
  const Eigen::Index dim = x.size();
  auto f_at = [&](Eigen::Index a, double da, Eigen::Index b, double db) {
    Eigen::VectorXd y = x;
    y(a) += da;
    y(b) += db;
    return eval_f(p, Sensitivities::unpack(y, n));
  };
  Eigen::MatrixXd H(dim, dim);
  const double h = step;
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = a; b < dim; ++b) {
      const double v =
          (f_at(a, h, b, h) - f_at(a, h, b, -h) - f_at(a, -h, b, h) + f_at(a, -h, b, -h)) /
          (4.0 * h * h);
      H(a, b) = v;
      H(b, a) = v;
    }
  }
  return H;
}

Sensitivities brute_force_maximize(const ModelParams& p, double tol,
                                   const BruteForceOptions& options) {
  if (!(tol > 0.0)) throw ValidationError("tol", -1, "must be > 0");
  const int n = p.n;
  Sensitivities current = Sensitivities::zeros(n);
  const Eigen::MatrixXd H = fd_hessian(p, current, options.hessian_step);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);

  auto condition_estimate = [&]() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    return ev.maxCoeff() / ev.minCoeff();
  };
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "finite-difference Hessian is singular (condition estimate " << condition_estimate()
        << ")";
    throw NumericalError(msg.str());
  }

  double grad_norm = 0.0;
  for (int it = 0; it <= options.max_refinements; ++it) {
    const Eigen::VectorXd g = fd_gradient(p, current, options.gradient_step);
    grad_norm = g.lpNorm<Eigen::Infinity>();
    if (grad_norm <= tol) return current;
    const Eigen::VectorXd step = lu.solve(-g);
    current = Sensitivities::unpack(current.pack() + step, n);
  }
  std::ostringstream msg;
  msg << "brute-force maximisation did not reach gradient tolerance " << tol << " (last "
      << grad_norm << ", condition estimate " << condition_estimate() << ")";
  throw NumericalError(msg.str());
}

}  // namespace esg
