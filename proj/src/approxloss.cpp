#include "iclab/approxloss.hpp"

#include <cmath>
#include <string>

namespace iclab {

void ApproxLossParams::validate() const {
  require(d >= 1 && L >= 1, ErrorKind::parameter, "d and L must be positive");
  require(sigma2 >= 0.0, ErrorKind::parameter, "noise variance must be nonnegative");
}

static void check_pair(const VectorXd& omega, const VectorXd& mu) {
  require(omega.size() == mu.size() && omega.size() >= 1, ErrorKind::dimension, "omega and mu must share length H>=1");
  require(omega.allFinite() && mu.allFinite(), ErrorKind::numeric, "non-finite (omega, mu)");
}

static MatrixXd kernel_matrix(const VectorXd& omega, int d) {
  return (static_cast<double>(d) * omega * omega.transpose()).array().exp().matrix();
}

double approx_loss(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P) {
  P.validate();
  check_pair(omega, mu);
  const double c0 = P.include_noise ? 1.0 + P.sigma2 : 1.0;
  const double mw = mu.dot(omega);
  return c0 - 2.0 * mw + mw * mw + P.lambda() * mu.dot(kernel_matrix(omega, P.d) * mu);
}

ApproxGrad approx_loss_grad(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P) {
  P.validate();
  check_pair(omega, mu);
  const MatrixXd E = kernel_matrix(omega, P.d);
  const double lam = P.lambda(), mw = mu.dot(omega);
  ApproxGrad g;
  g.d_mu = -2.0 * omega + 2.0 * mw * omega + 2.0 * lam * (E * mu);
  g.d_omega = -2.0 * mu + 2.0 * mw * mu + 2.0 * P.d * lam * (E.cwiseProduct(mu * mu.transpose()) * omega);
  return g;
}

TaylorTerms grad_taylor_decomposition(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P, int K) {
  P.validate();
  check_pair(omega, mu);
  require(K >= 2, ErrorKind::parameter, "truncation order must be at least 2");
  const double lam = P.lambda(), d = P.d;
  const double mw = mu.dot(omega);
  const double sm = 2.0 * (1.0 - (1.0 + lam * d) * mw);
  const Eigen::Index H = omega.size();
  TaylorTerms t;
  t.sign_matching_mu = sm * omega;
  t.sign_matching_omega = sm * mu;
  t.zero_sum_mu = VectorXd::Constant(H, -2.0 * lam * mu.sum());
  t.high_order_mu = VectorXd::Zero(H);
  t.high_order_omega = VectorXd::Zero(H);
  VectorXd wk = omega.cwiseProduct(omega);  // omega^k, starting at k = 2
  VectorXd wk1 = omega;                     // omega^{k-1}
  double dk_kfact = d * d / 2.0;            // d^k / k!
  double dk_km1fact = d * d;                // d^k / (k-1)!
  for (int k = 2; k <= K; ++k) {
    const double c = mu.dot(wk);
    t.high_order_mu -= 2.0 * lam * dk_kfact * c * wk;
    t.high_order_omega -= 2.0 * lam * dk_km1fact * c * mu.cwiseProduct(wk1);
    wk1 = wk;
    wk = wk.cwiseProduct(omega);
    dk_kfact *= d / (k + 1);
    dk_km1fact *= d / k;
  }
  const double winf = omega.cwiseAbs().maxCoeff();
  t.remainder_bound = std::exp((K + 1) * std::log(d) + 2.0 * (K + 1) * std::log(std::max(winf, 1e-300)) -
                               std::lgamma(K + 2.0));
  return t;
}

double mu_gamma(double gamma, const ApproxLossParams& P) {
  P.validate();
  require(gamma > 0.0, ErrorKind::domain, "gamma must be positive");
  return 0.5 * gamma / (gamma * gamma + P.lambda() * std::sinh(P.d * gamma * gamma));
}

double optimal_eta_star(const ApproxLossParams& P) {
  P.validate();
  return 1.0 / (1.0 + (1.0 + P.sigma2) * P.d / P.L);
}

ManifoldPoint manifold_point(double gamma, const std::vector<int>& signs, const ApproxLossParams& P,
                             const std::vector<double>& split) {
  const double mg = mu_gamma(gamma, P);
  const int H = static_cast<int>(signs.size());
  int npos = 0, nneg = 0;
  for (int s : signs) {
    require(s == -1 || s == 0 || s == 1, ErrorKind::manifold, "signs must be in {-1,0,1}");
    npos += s == 1;
    nneg += s == -1;
  }
  require(npos > 0 && nneg > 0, ErrorKind::manifold, "manifold needs at least one positive and one negative head");
  std::vector<double> w(H);
  if (split.empty()) {
    for (int h = 0; h < H; ++h) w[h] = signs[h] == 1 ? 1.0 / npos : signs[h] == -1 ? 1.0 / nneg : 0.0;
  } else {
    require(static_cast<int>(split.size()) == H, ErrorKind::dimension, "split length must equal head count");
    double sp = 0.0, sn = 0.0;
    for (int h = 0; h < H; ++h) {
      require(split[h] >= 0.0, ErrorKind::manifold, "split weights must be nonnegative");
      if (signs[h] == 1) sp += split[h];
      if (signs[h] == -1) sn += split[h];
      if (signs[h] == 0) require(split[h] == 0.0, ErrorKind::manifold, "dummy heads carry no OV mass");
    }
    require(std::abs(sp - 1.0) < 1e-12 && std::abs(sn - 1.0) < 1e-12, ErrorKind::manifold,
            "split weights must sum to 1 within each sign group");
    w = split;
  }
  ManifoldPoint m;
  m.gamma = gamma;
  m.signs = signs;
  m.omega.resize(H);
  m.mu.resize(H);
  for (int h = 0; h < H; ++h) {
    m.omega[h] = gamma * signs[h];
    m.mu[h] = signs[h] * mg * w[h];
  }
  return m;
}

double manifold_loss(double gamma, double m, const ApproxLossParams& P) {
  const double c0 = P.include_noise ? P.sigma2 : 0.0;
  const double r = 1.0 - gamma * m;
  return c0 + r * r + P.lambda() * std::sinh(P.d * gamma * gamma) * m * m;
}

ScalingCertificate check_scaling(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P,
                                 double lambda_err) {
  P.validate();
  check_pair(omega, mu);
  require(lambda_err > 0.0, ErrorKind::parameter, "error level must be positive");
  ScalingCertificate c;
  const double logL = std::log(static_cast<double>(P.L));
  c.omega_threshold = 0.1 * std::sqrt(logL / std::max(static_cast<double>(P.d), logL));
  c.mu_threshold = std::pow(static_cast<double>(P.L), -lambda_err / 2.0 + 0.3);
  c.omega_inf = omega.cwiseAbs().maxCoeff();
  const double minf = mu.cwiseAbs().maxCoeff();
  c.mu_measure = std::max(minf, minf * minf);
  c.omega_ok = c.omega_inf <= c.omega_threshold;
  c.mu_ok = c.mu_measure <= c.mu_threshold;
  return c;
}

}  // namespace iclab
