#include "iclab/datagen.hpp"

#include <cmath>
#include <string>

namespace iclab {

CovSpec CovSpec::kms(double rho) {
  require(rho > 0.0 && rho < 1.0, ErrorKind::parameter, "kms rho must lie in (0,1), got " + std::to_string(rho));
  CovSpec c;
  c.kind = Kind::kms;
  c.rho = rho;
  return c;
}

CovSpec CovSpec::explicit_matrix(const MatrixXd& s) {
  require(s.rows() == s.cols() && s.rows() > 0, ErrorKind::dimension, "covariance must be square");
  require(s.allFinite(), ErrorKind::numeric, "covariance has non-finite entries");
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::parameter,
          "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > 0.0, ErrorKind::parameter, "covariance is not positive definite");
  CovSpec c;
  c.kind = Kind::explicit_matrix;
  c.sigma = s;
  return c;
}

MatrixXd kms_matrix(int d, double rho) {
  MatrixXd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

MatrixXd CovSpec::matrix(int d) const {
  require(d >= 1, ErrorKind::dimension, "d must be positive");
  switch (kind) {
    case Kind::isotropic: return MatrixXd::Identity(d, d);
    case Kind::kms: return kms_matrix(d, rho);
    case Kind::explicit_matrix:
      require(sigma.rows() == d, ErrorKind::dimension,
              "covariance is " + std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()) +
                  " but d=" + std::to_string(d));
      return sigma;
  }
  return {};
}

MatrixXd kms_inverse_check(int d, double rho) {
  require(rho > 0.0 && rho < 1.0, ErrorKind::parameter, "kms rho must lie in (0,1)");
  require(d >= 1, ErrorKind::dimension, "d must be positive");
  MatrixXd S = kms_matrix(d, rho);
  MatrixXd inv = S.llt().solve(MatrixXd::Identity(d, d)) * (1.0 - rho * rho);
  MatrixXd closed = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    closed(i, i) = (i == 0 || i == d - 1) ? 1.0 : 1.0 + rho * rho;
    if (i + 1 < d) closed(i, i + 1) = closed(i + 1, i) = -rho;
  }
  if (d == 1) closed(0, 0) = 1.0 - rho * rho;  // scalar case: Sigma = 1
  double err = (inv - closed).cwiseAbs().maxCoeff();
  require(err <= 1e-10, ErrorKind::numeric, "kms inverse deviates from tridiagonal form by " + std::to_string(err));
  return inv;
}

CovSampler::CovSampler(const CovSpec& cov, int d)
    : d_(d), iso_(cov.kind == CovSpec::Kind::isotropic), sigma_(cov.matrix(d)) {
  if (!iso_) {
    Eigen::LLT<MatrixXd> llt(sigma_);
    require(llt.info() == Eigen::Success, ErrorKind::linalg, "covariance Cholesky failed");
    chol_ = llt.matrixL();
  }
}

void CovSampler::draw(Rng& rng, Eigen::Ref<VectorXd> out) const {
  if (iso_) {
    for (int i = 0; i < d_; ++i) out[i] = rng.normal();
    return;
  }
  for (int i = 0; i < d_; ++i) out[i] = rng.normal();
  out = chol_.triangularView<Eigen::Lower>() * out;  // in place: lower-triangular product is evaluated into a temporary
}

MatrixXd embed(const EmbeddedSequence& s) {
  const int L = s.L(), d = s.d();
  MatrixXd Z = MatrixXd::Zero(d + 1, L + 1);
  Z.topLeftCorner(d, L) = s.X.transpose();
  Z.block(d, 0, 1, L) = s.y.transpose();
  Z.col(L).head(d) = s.xq;
  return Z;
}

RegressionTask sample_task(Rng& rng, int d, double sigma2) {
  require(d >= 1, ErrorKind::dimension, "d must be at least 1");
  require(sigma2 >= 0.0, ErrorKind::parameter, "noise variance must be nonnegative");
  RegressionTask t;
  t.beta.resize(d);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) t.beta[i] = sd * rng.normal();
  t.sigma2 = sigma2;
  return t;
}

EmbeddedSequence sample_sequence(Rng& rng, const RegressionTask& task, int L, const CovSampler& cov) {
  const int d = static_cast<int>(task.beta.size());
  require(L >= 1, ErrorKind::dimension, "L must be at least 1");
  require(cov.dim() == d, ErrorKind::dimension,
          "covariance dimension " + std::to_string(cov.dim()) + " does not match d=" + std::to_string(d));
  EmbeddedSequence s;
  s.task = task;
  s.X.resize(L, d);
  s.y.resize(L);
  s.xq.resize(d);
  VectorXd x(d);
  const double sd = std::sqrt(task.sigma2);
  for (int l = 0; l < L; ++l) {
    cov.draw(rng, x);
    s.X.row(l) = x.transpose();
  }
  for (int l = 0; l < L; ++l) s.y[l] = s.X.row(l).dot(task.beta) + sd * rng.normal();
  cov.draw(rng, s.xq);
  s.yq_clean = s.xq.dot(task.beta);
  s.yq = s.yq_clean + sd * rng.normal();
  return s;
}

EmbeddedSequence sample_sequence(Rng& rng, const RegressionTask& task, int L, const CovSpec& cov) {
  CovSampler cs(cov, static_cast<int>(task.beta.size()));
  return sample_sequence(rng, task, L, cs);
}

EmbeddedSequence draw_instance(Rng& rng, int d, int L, double sigma2, const CovSampler& cov) {
  RegressionTask t = sample_task(rng, d, sigma2);
  return sample_sequence(rng, t, L, cov);
}

void TaskSpec::validate(int d) const {
  require(N >= 1, ErrorKind::spec, "task count must be positive");
  require(static_cast<int>(supports.size()) == N, ErrorKind::spec,
          "expected " + std::to_string(N) + " supports, got " + std::to_string(supports.size()));
  for (int n = 0; n < N; ++n) {
    require(!supports[n].empty(), ErrorKind::spec, "support of task " + std::to_string(n + 1) + " is empty");
    for (int i : supports[n])
      require(i >= 1 && i <= d, ErrorKind::spec,
              "support index " + std::to_string(i) + " of task " + std::to_string(n + 1) + " outside [1," +
                  std::to_string(d) + "]");
  }
}

TaskSpec TaskSpec::full(int d) {
  TaskSpec t;
  t.N = 1;
  t.supports.resize(1);
  for (int i = 1; i <= d; ++i) t.supports[0].push_back(i);
  return t;
}

MultiTaskSequence sample_multitask_sequence(Rng& rng, const TaskSpec& spec, int L, double sigma2,
                                            const CovSampler& cov) {
  const int d = cov.dim();
  spec.validate(d);
  require(L >= 1, ErrorKind::dimension, "L must be at least 1");
  RegressionTask t = sample_task(rng, d, sigma2);
  MultiTaskSequence s;
  s.beta = t.beta;
  s.sigma2 = sigma2;
  s.spec = spec;
  s.X.resize(L, d);
  s.Y.resize(L, spec.N);
  s.xq.resize(d);
  s.yq.resize(spec.N);
  s.yq_clean.resize(spec.N);
  // beta restricted to each support
  MatrixXd B = MatrixXd::Zero(d, spec.N);
  for (int n = 0; n < spec.N; ++n)
    for (int i : spec.supports[n]) B(i - 1, n) = t.beta[i - 1];
  VectorXd x(d);
  for (int l = 0; l < L; ++l) {
    cov.draw(rng, x);
    s.X.row(l) = x.transpose();
  }
  const double sd = std::sqrt(sigma2);
  s.Y.noalias() = s.X * B;
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < spec.N; ++n) s.Y(l, n) += sd * rng.normal();
  cov.draw(rng, s.xq);
  s.yq_clean = B.transpose() * s.xq;
  for (int n = 0; n < spec.N; ++n) s.yq[n] = s.yq_clean[n] + sd * rng.normal();
  return s;
}

MultiTaskSequence sample_multitask_sequence(Rng& rng, const TaskSpec& spec, int d, int L, double sigma2,
                                            const CovSpec& cov) {
  CovSampler cs(cov, d);
  return sample_multitask_sequence(rng, spec, L, sigma2, cs);
}

EmbeddedSequence truncate(const EmbeddedSequence& s, int L) {
  require(L >= 1 && L <= s.L(), ErrorKind::dimension, "truncation length out of range");
  EmbeddedSequence t = s;
  t.X = s.X.topRows(L);
  t.y = s.y.head(L);
  return t;
}

}  // namespace iclab
