#include "esgopt/objective.hpp"

#include <cmath>

namespace esg {

namespace {

void check_shape(const ModelParams& p, const Sensitivities& s) {
  if (s.zQ.rows() != p.n || s.zQ.cols() != p.n || s.zS.size() != p.n) {
    throw ValidationError("sensitivities", -1,
                          "dimension mismatch with n = " + std::to_string(p.n));
  }
}

// Column residual K_i = nu_i - nu_i * sum_l zQ(l, i) - rho_i sigma / sqrt(n) * sum_m zS(m).
Eigen::VectorXd column_residuals(const ModelParams& p, const Sensitivities& s) {
  const double sqn = std::sqrt(static_cast<double>(p.n));
  const double sum_s = s.zS.sum();
  Eigen::VectorXd K(p.n);
  for (int i = 0; i < p.n; ++i) {
    K(i) = p.nu(i) - p.nu(i) * s.zQ.col(i).sum() - p.rho(i) * p.sigma / sqn * sum_s;
  }
  return K;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

Sensitivities Sensitivities::zeros(int n) {
  return {Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
}

Sensitivities Sensitivities::unpack(const Eigen::VectorXd& x, int n) {
  if (x.size() != flat_size(n)) {
    throw ValidationError("x", -1, "flat vector length does not match n^2 + n");
  }
  Sensitivities s;
  s.zQ = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  s.zS = x.tail(n);
  return s;
}

Eigen::VectorXd Sensitivities::pack() const {
  const int m = n();
  Eigen::VectorXd x(flat_size(m));
  x.head(m * m) = Eigen::Map<const Eigen::VectorXd>(zQ.data(), m * m);
  x.tail(m) = zS;
  return x;
}

Eigen::MatrixXd FocSystem::hessian() const {
  const Eigen::Index nq = H_QQ.rows();
  const Eigen::Index ns = H_SS.rows();
  Eigen::MatrixXd H(nq + ns, nq + ns);
  H.topLeftCorner(nq, nq) = H_QQ;
  H.topRightCorner(nq, ns) = H_QS;
  H.bottomLeftCorner(ns, nq) = H_QS.transpose();
  H.bottomRightCorner(ns, ns) = H_SS;
  return H;
}

Eigen::VectorXd FocSystem::rhs() const {
  const Eigen::Index nq = b_Q.size();
  Eigen::VectorXd b(nq + b_S.size());
  b.head(nq) = Eigen::Map<const Eigen::VectorXd>(b_Q.data(), nq);
  b.tail(b_S.size()) = b_S;
  return b;
}

double eval_f(const ModelParams& p, const Sensitivities& s) {
  check_shape(p, s);
  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  double agents = 0.0;
  for (int i = 0; i < n; ++i) {
    const double zii = s.zQ(i, i);
    double signal_var = 0.0;
    double cross = 0.0;
    for (int j = 0; j < n; ++j) {
      signal_var += p.nu(j) * p.nu(j) * s.zQ(i, j) * s.zQ(i, j);
      cross += p.rho(j) * p.nu(j) * s.zQ(i, j);
    }
    agents += zii * zii / (2.0 * p.c(i)) + 0.5 * p.gamma(i) * signal_var +
              0.5 * p.gamma(i) * p.sigma * p.sigma * s.zS(i) * s.zS(i) +
              p.gamma(i) * p.sigma / sqn * s.zS(i) * cross - zii / p.c(i);
  }
  const double sum_s = s.zS.sum();
  double penalty = 0.0;
  for (int i = 0; i < n; ++i) {
    const double col = p.nu(i) - p.nu(i) * s.zQ.col(i).sum() - p.rho(i) / sqn * p.sigma * sum_s;
    penalty += col * col + (1.0 - p.rho(i) * p.rho(i)) * p.sigma * p.sigma / n * sum_s * sum_s;
  }
  return -agents / n - 0.5 * p.gamma_P / (double(n) * n) * penalty;
}

double eval_f_decomposed(const ModelParams& p, const Sensitivities& s) {
  check_shape(p, s);
  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(n, n) - p.rho * p.rho.transpose() / static_cast<double>(n);

  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = s.zQ(i, i) - 1.0;
    const Eigen::VectorXd loaded = p.nu.cwiseProduct(s.zQ.row(i).transpose());
    const double hedge = p.sigma * s.zS(i) + p.rho.dot(loaded) / sqn;
    value += 1.0 / p.c(i) - d * d / p.c(i) - p.gamma(i) * hedge * hedge -
             p.gamma(i) * loaded.dot(proj * loaded);
  }
  value /= 2.0 * n;

  const double sum_s = s.zS.sum();
  double penalty = 0.0;
  for (int i = 0; i < n; ++i) {
    const double col = p.nu(i) - p.nu(i) * s.zQ.col(i).sum() - p.rho(i) / sqn * p.sigma * sum_s;
    penalty += col * col + (1.0 - p.rho(i) * p.rho(i)) * p.sigma * p.sigma / n * sum_s * sum_s;
  }
  return value - p.gamma_P / (2.0 * n * n) * penalty;
}

GPhi eval_g_phi(const ModelParams& p, const Sensitivities& s) {
  ModelParams agents_only = p;
  agents_only.gamma_P = 0.0;
  const double g = eval_f(agents_only, s);

  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  const double sum_s = s.zS.sum();
  double phi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double col = p.nu(i) - p.nu(i) * s.zQ.col(i).sum() - p.rho(i) * p.sigma / sqn * sum_s;
    phi += col * col + (1.0 - p.rho(i) * p.rho(i)) * p.sigma * p.sigma / n * sum_s * sum_s;
  }
  phi /= double(n) * n;
  return {g, phi};
}

Sensitivities gradient(const ModelParams& p, const Sensitivities& s) {
  check_shape(p, s);
  const int n = p.n;
  const double nd = n;
  const double sqn = std::sqrt(nd);
  const Eigen::VectorXd K = column_residuals(p, s);
  const double sum_s = s.zS.sum();
  const double one_minus_rho2 = (1.0 - p.rho.array().square()).sum();
  const double rho_K = p.rho.dot(K);

  Sensitivities grad = Sensitivities::zeros(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = -p.gamma(i) * p.nu(j) * p.nu(j) * s.zQ(i, j) / nd -
                 p.gamma(i) * p.sigma / (nd * sqn) * p.rho(j) * p.nu(j) * s.zS(i) +
                 p.gamma_P / (nd * nd) * p.nu(j) * K(j);
      if (i == j) v -= (s.zQ(i, i) - 1.0) / (nd * p.c(i));
      grad.zQ(i, j) = v;
    }
  }
  for (int k = 0; k < n; ++k) {
    double cross = 0.0;
    for (int j = 0; j < n; ++j) cross += p.rho(j) * p.nu(j) * s.zQ(k, j);
    grad.zS(k) = -p.gamma(k) * p.sigma * p.sigma / nd * s.zS(k) -
                 p.gamma(k) * p.sigma / (nd * sqn) * cross +
                 p.gamma_P * p.sigma / (nd * nd * sqn) * rho_K -
                 p.gamma_P * p.sigma * p.sigma / (nd * nd * nd) * one_minus_rho2 * sum_s;
  }
  return grad;
}

FocSystem hessian_blocks(const ModelParams& p) {
  const int n = p.n;
  const double nd = n;
  const double gp = p.gamma_P;
  const double sig = p.sigma;
  const Eigen::MatrixXd Gamma = p.gamma.asDiagonal();
  const Eigen::MatrixXd N2 = p.nu.array().square().matrix().asDiagonal();
  const Eigen::MatrixXd J = Eigen::MatrixXd::Ones(n, n);
  const Eigen::MatrixXd rho_nu = p.rho.cwiseProduct(p.nu);

  FocSystem sys;
  sys.H_SS = -sig * sig / nd * Gamma - gp * sig * sig / (nd * nd) * J;
  sys.H_QS = -sig / std::pow(nd, 1.5) * kron(rho_nu, Gamma) -
             gp * sig / std::pow(nd, 2.5) * kron(rho_nu, J);
  sys.H_QQ = -kron(N2, Gamma) / nd - gp / (nd * nd) * kron(N2, J);
  // Own-signal effort cost: block j carries 1/c_j at its (j, j) entry.
  for (int j = 0; j < n; ++j) sys.H_QQ(q_index(n, j, j), q_index(n, j, j)) -= 1.0 / (nd * p.c(j));

  sys.b_Q.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sys.b_Q(i, j) = (i == j ? 1.0 / (nd * p.c(i)) : 0.0) + gp / (nd * nd) * p.nu(j) * p.nu(j);
    }
  }
  sys.b_S = Eigen::VectorXd::Constant(n, gp * sig / std::pow(nd, 2.5) * p.rho.dot(p.nu));
  return sys;
}

double max_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace esg
