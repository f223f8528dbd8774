#include "iclab/estimators.hpp"

#include <cmath>

namespace iclab {

Preconditioner::Preconditioner(const MatrixXd& g) : gamma(g) {
  require(g.rows() == g.cols() && g.rows() > 0, ErrorKind::dimension, "preconditioner must be square");
  require(g.allFinite(), ErrorKind::numeric, "preconditioner has non-finite entries");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  require((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::parameter,
          "preconditioner is not symmetric");
  llt.compute(g);
  require(llt.info() == Eigen::Success, ErrorKind::linalg, "preconditioner is not positive definite");
}

double vanilla_gd(const EmbeddedSequence& s, double eta) {
  return eta / s.L() * s.y.dot(s.X * s.xq);
}

double debiased_gd(const EmbeddedSequence& s, double eta) {
  const VectorXd xbar = s.X.colwise().mean().transpose();
  const VectorXd t = s.X * s.xq;
  return eta / s.L() * (s.y.dot(t) - s.y.sum() * xbar.dot(s.xq));
}

double ridge(const EmbeddedSequence& s, double lambda_ridge) {
  require(lambda_ridge >= 0.0, ErrorKind::parameter, "ridge penalty must be nonnegative");
  require(lambda_ridge > 0.0 || s.L() >= s.d(), ErrorKind::linalg, "unpenalized ridge needs L >= d");
  MatrixXd A = s.X.transpose() * s.X;
  A.diagonal().array() += lambda_ridge;
  Eigen::LLT<MatrixXd> llt(A);
  require(llt.info() == Eigen::Success, ErrorKind::linalg, "ridge system is singular");
  const VectorXd b = llt.solve(s.X.transpose() * s.y);
  return s.xq.dot(b);
}

double kernel_regressor(const EmbeddedSequence& s, double omega, double mu) {
  VectorXd sc = omega * (s.X * s.xq);
  VectorXd w = (sc.array() - sc.maxCoeff()).exp();
  return mu * w.dot(s.y) / w.sum();
}

double preconditioned_gd(const EmbeddedSequence& s, const Preconditioner& P, double eta) {
  require(P.gamma.rows() == s.d(), ErrorKind::dimension, "preconditioner dimension mismatch");
  const VectorXd u = P.llt.solve(s.xq);
  return eta / s.L() * s.y.dot(s.X * u);
}

Preconditioner gamma_star(const CovSpec& cov, int d, int L, double sigma2) {
  require(L >= 1, ErrorKind::dimension, "L must be positive");
  const MatrixXd S = cov.matrix(d);
  MatrixXd G = (1.0 + 1.0 / L) * S;
  G.diagonal().array() += (S.trace() + d * sigma2) / L;
  return Preconditioner(G);
}

double kernel_omega_star(int d) { return 1.0 / std::sqrt(static_cast<double>(d)); }

double kernel_mu_star(int d, int L, double sigma2) {
  return std::sqrt(static_cast<double>(d)) / (1.0 + std::exp(1.0) * (1.0 + sigma2) * d / L);
}

double debiased_gd_support(const MultiTaskSequence& s, int n, const std::vector<int>& support, double eta) {
  require(n >= 0 && n < s.N(), ErrorKind::dimension, "task index out of range");
  const int L = s.L();
  double acc = 0.0;
  for (int i : support) {
    require(i >= 1 && i <= s.d(), ErrorKind::spec, "support index out of range");
    const auto col = s.X.col(i - 1);
    const double mean = col.mean();
    acc += s.xq[i - 1] * (col.array() - mean).matrix().dot(s.Y.col(n));
  }
  return eta / L * acc;
}

}  // namespace iclab
