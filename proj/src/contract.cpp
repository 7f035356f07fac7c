#include "esgopt/contract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace esg {

namespace {

constexpr long kBlockSize = 8192;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct SampleStats {
  double mean;
  double se;
};

SampleStats stats(const Eigen::VectorXd& x) {
  const long N = x.size();
  CompensatedSum s;
  for (long k = 0; k < N; ++k) s.add(x(k));
  const double mean = s.value() / N;
  if (N < 2) return {mean, 0.0};
  CompensatedSum ss;
  for (long k = 0; k < N; ++k) ss.add((x(k) - mean) * (x(k) - mean));
  return {mean, std::sqrt(ss.value() / (N - 1) / N)};
}

/// CE of exponential utility from log-utility exponents e = -gamma * wealth,
/// shifted by max(e) before exponentiating.
McEstimate ce_from_exponents(const Eigen::VectorXd& e, double gamma) {
  const double shift = e.maxCoeff();
  if (!std::isfinite(shift)) throw NumericalError("degenerate utility sample");
  const Eigen::VectorXd scaled = (e.array() - shift).exp().matrix();
  const SampleStats st = stats(scaled);
  return {-(shift + std::log(st.mean)) / gamma, st.se / (gamma * st.mean)};
}

void check_agent(const ModelParams& p, int i) {
  if (i < 0 || i >= p.n) throw ValidationError("agent_index", i, "agent index out of range");
}

Eigen::VectorXd net_wealth(const ModelParams& p, const ContractCoefficients& k, int i,
                           const PathBundle& b, double action, double shift_Q) {
  Eigen::VectorXd w(b.n_paths);
  const double cost = 0.5 * p.c(i) * action * action * p.T;
  Eigen::VectorXd dQ(p.n);
  for (long m = 0; m < b.n_paths; ++m) {
    dQ = b.QT.row(m).transpose() - p.q0;
    dQ(i) += shift_Q;
    w(m) = k.payment(i, dQ, b.logS_ratio(m)) - cost;
  }
  return w;
}

}  // namespace

Eigen::VectorXd optimal_actions(const Sensitivities& s, const ModelParams& p) {
  return s.zQ.diagonal().cwiseQuotient(p.c);
}

double ContractCoefficients::payment(int i, const Eigen::VectorXd& dQ, double log_s_ratio) const {
  return constant(i) + zQ_row.row(i).dot(dQ) + zS(i) * log_s_ratio;
}

ContractCoefficients contract_coefficients(const ModelParams& p, const Sensitivities& s) {
  const int n = p.n;
  const double sqn = std::sqrt(static_cast<double>(n));
  ContractCoefficients k;
  k.zQ_row = s.zQ;
  k.zS = s.zS;
  k.constant.resize(n);
  for (int i = 0; i < n; ++i) {
    const double zii = s.zQ(i, i);
    double incentive = zii * zii / (2.0 * p.c(i));
    double risk = 0.0;
    double cross = 0.0;
    for (int j = 0; j < n; ++j) {
      const double zij = s.zQ(i, j);
      if (j != i) incentive += s.zQ(j, j) / p.c(j) * zij;
      risk += p.gamma(i) * p.nu(j) * p.nu(j) * zij * zij;
      cross += p.gamma(i) * p.rho(j) / sqn * p.nu(j) * zij * p.sigma * s.zS(i);
    }
    const double bracket =
        incentive - 0.5 * risk - 0.5 * p.gamma(i) * p.sigma * p.sigma * s.zS(i) * s.zS(i);
    const double drift = (p.mu - 0.5 * p.sigma * p.sigma) * s.zS(i) - cross;
    k.constant(i) = p.r(i) - p.T * bracket - p.T * drift;
  }
  return k;
}

GaussianMoments payment_moments(const ModelParams& p, const ContractCoefficients& k, int i,
                                const Eigen::VectorXd& a) {
  const double sqn = std::sqrt(static_cast<double>(p.n));
  const double zs = k.zS(i);
  double mean = k.constant(i) + zs * (p.mu - 0.5 * p.sigma * p.sigma) * p.T;
  double var = zs * zs * p.sigma * p.sigma;
  for (int j = 0; j < p.n; ++j) {
    const double zij = k.zQ_row(i, j);
    mean += zij * a(j) * p.T;
    var += zij * zij * p.nu(j) * p.nu(j) + 2.0 * zs * zij * p.nu(j) * p.sigma * p.rho(j) / sqn;
  }
  return {mean, var * p.T};
}

double analytic_agent_ce(const ModelParams& p, const ContractCoefficients& k, int i,
                         const Eigen::VectorXd& a) {
  check_agent(p, i);
  const GaussianMoments m = payment_moments(p, k, i, a);
  return m.mean - 0.5 * p.c(i) * a(i) * a(i) * p.T - 0.5 * p.gamma(i) * m.variance;
}

PathBundle simulate_paths(const ModelParams& p, const Eigen::VectorXd& actions, long n_paths,
                          std::uint64_t seed) {
  if (n_paths < 1) throw ValidationError("n_paths", -1, "must be >= 1");
  const int n = p.n;
  if (actions.size() != n) throw ValidationError("actions", -1, "dimension mismatch");

  PathBundle b;
  b.seed = seed;
  b.n_paths = n_paths;
  b.actions = actions;
  b.QT.resize(n_paths, n);
  b.logS_ratio.resize(n_paths);

  const double sqT = std::sqrt(p.T);
  const double scale_s = p.sigma / std::sqrt(static_cast<double>(n));
  const double drift_s = (p.mu - 0.5 * p.sigma * p.sigma) * p.T;
  const Eigen::VectorXd hedge = (1.0 - p.rho.array().square()).sqrt().matrix();
  const long n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;

  auto run_block = [&](long blk) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)};
    std::mt19937_64 gen(sseq);
    std::normal_distribution<double> normal;
    const long lo = blk * kBlockSize;
    const long hi = std::min(n_paths, lo + kBlockSize);
    for (long m = lo; m < hi; ++m) {
      double common = 0.0;
      for (int i = 0; i < n; ++i) {
        const double B = normal(gen);
        const double W = normal(gen);
        b.QT(m, i) = p.q0(i) + actions(i) * p.T + p.nu(i) * sqT * B;
        common += p.rho(i) * B + hedge(i) * W;
      }
      b.logS_ratio(m) = drift_s + scale_s * common * sqT;
    }
  };

  const long workers =
      std::clamp<long>(static_cast<long>(std::thread::hardware_concurrency()), 1, n_blocks);
  if (workers == 1) {
    for (long blk = 0; blk < n_blocks; ++blk) run_block(blk);
    return b;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (long blk = w; blk < n_blocks; blk += workers) run_block(blk);
    });
  }
  for (auto& t : pool) t.join();
  return b;
}

std::vector<McEstimate> agent_certainty_equivalents(const ModelParams& p,
                                                    const ContractCoefficients& k,
                                                    const PathBundle& bundle) {
  std::vector<McEstimate> out;
  out.reserve(p.n);
  for (int i = 0; i < p.n; ++i) {
    const Eigen::VectorXd w = net_wealth(p, k, i, bundle, bundle.actions(i), 0.0);
    out.push_back(ce_from_exponents(-p.gamma(i) * w, p.gamma(i)));
  }
  return out;
}

PrincipalValue principal_value(const ModelParams& p, const ContractCoefficients& k,
                               const Sensitivities& s, const PathBundle& bundle) {
  const int n = p.n;
  Eigen::VectorXd wealth(bundle.n_paths);
  Eigen::VectorXd dQ(n);
  for (long m = 0; m < bundle.n_paths; ++m) {
    dQ = bundle.QT.row(m).transpose() - p.q0;
    double paid = 0.0;
    for (int i = 0; i < n; ++i) paid += k.payment(i, dQ, bundle.logS_ratio(m));
    wealth(m) = (bundle.QT.row(m).sum() - paid) / n;
  }
  const double ce = (p.q0.sum() - p.r.sum()) / n + p.T * eval_f(p, s);

  PrincipalValue v;
  if (p.gamma_P == 0.0) {
    const SampleStats st = stats(wealth);
    v.mc = st.mean;
    v.se = st.se;
    v.analytic = ce;
    return v;
  }
  const Eigen::VectorXd e = -p.gamma_P * wealth;
  const double shift = e.maxCoeff();
  const double scale = std::exp(shift);
  if (!std::isfinite(scale)) throw NumericalError("principal utility overflows");
  const SampleStats st = stats((e.array() - shift).exp().matrix());
  v.mc = -scale * st.mean;
  v.se = scale * st.se;
  v.analytic = -std::exp(-p.gamma_P * ce);
  return v;
}

DeviationCurve nash_deviation_check(const ModelParams& p, const ContractCoefficients& k,
                                    int agent_index, std::span<const double> deviation_grid,
                                    long n_paths, std::uint64_t seed) {
  check_agent(p, agent_index);
  if (std::find(deviation_grid.begin(), deviation_grid.end(), 0.0) == deviation_grid.end()) {
    throw ValidationError("deviation_grid", -1, "grid must contain 0");
  }
  const int i = agent_index;
  const Eigen::VectorXd a_star = k.zQ_row.diagonal().cwiseQuotient(p.c);
  const PathBundle b = simulate_paths(p, a_star, n_paths, seed);
  const double g = p.gamma(i);

  std::vector<Eigen::VectorXd> exponents;
  exponents.reserve(deviation_grid.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (double d : deviation_grid) {
    exponents.push_back(-g * net_wealth(p, k, i, b, a_star(i) + d, d * p.T));
    shift = std::max(shift, exponents.back().maxCoeff());
  }
  const double scale = std::exp(shift);
  if (!std::isfinite(scale)) throw NumericalError("agent utility overflows");

  const auto zero_it = std::find(deviation_grid.begin(), deviation_grid.end(), 0.0);
  const Eigen::VectorXd u0 =
      -(exponents[zero_it - deviation_grid.begin()].array() - shift).exp().matrix();

  Eigen::VectorXd a_dev = a_star;
  DeviationCurve curve;
  curve.agent = i;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < deviation_grid.size(); ++q) {
    const double d = deviation_grid[q];
    const Eigen::VectorXd u = -(exponents[q].array() - shift).exp().matrix();
    const SampleStats st = stats(u);
    const SampleStats diff = stats(u - u0);
    a_dev(i) = a_star(i) + d;
    DeviationPoint pt;
    pt.delta = d;
    pt.utility = scale * st.mean;
    pt.se = scale * st.se;
    pt.diff_to_zero = scale * diff.mean;
    pt.diff_se = scale * diff.se;
    pt.analytic = -std::exp(-g * analytic_agent_ce(p, k, i, a_dev));
    if (pt.utility > best) {
      best = pt.utility;
      curve.argmax_delta = d;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

}  // namespace esg
