#pragma once

#include "iclab/common.hpp"

#include <vector>

namespace iclab {

struct CovSpec {
  enum class Kind { isotropic, kms, explicit_matrix };
  Kind kind = Kind::isotropic;
  double rho = 0.0;
  MatrixXd sigma;

  static CovSpec isotropic() { return {}; }
  static CovSpec kms(double rho);
  static CovSpec explicit_matrix(const MatrixXd& s);

  // Dense d x d covariance. Validates SPD for explicit matrices.
  MatrixXd matrix(int d) const;
};

MatrixXd kms_matrix(int d, double rho);

// Returns (1 - rho^2) * inverse(KMS(d, rho)); throws if the closed tridiagonal form does not hold.
MatrixXd kms_inverse_check(int d, double rho);

// Draws x ~ N(0, Sigma) through a cached Cholesky factor.
class CovSampler {
 public:
  CovSampler(const CovSpec& cov, int d);
  int dim() const { return d_; }
  void draw(Rng& rng, Eigen::Ref<VectorXd> out) const;
  const MatrixXd& sigma() const { return sigma_; }

 private:
  int d_;
  bool iso_;
  MatrixXd sigma_;
  MatrixXd chol_;
};

struct RegressionTask {
  VectorXd beta;
  double sigma2 = 0.0;
};

struct EmbeddedSequence {
  MatrixXd X;  // L x d
  VectorXd y;
  VectorXd xq;
  double yq = 0.0;        // noisy query response
  double yq_clean = 0.0;  // beta' x_q
  RegressionTask task;

  int L() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

// Z_ebd: (d+1) x (L+1); last column is (x_q, 0).
MatrixXd embed(const EmbeddedSequence& s);

RegressionTask sample_task(Rng& rng, int d, double sigma2 = 0.0);
EmbeddedSequence sample_sequence(Rng& rng, const RegressionTask& task, int L, const CovSpec& cov);
EmbeddedSequence sample_sequence(Rng& rng, const RegressionTask& task, int L, const CovSampler& cov);

// Task and sequence from one stream. This is the unit every Monte-Carlo loop and trainer draws.
EmbeddedSequence draw_instance(Rng& rng, int d, int L, double sigma2, const CovSampler& cov);

struct TaskSpec {
  int N = 1;
  std::vector<std::vector<int>> supports;  // 1-based feature indices

  void validate(int d) const;
  static TaskSpec full(int d);
};

struct MultiTaskSequence {
  MatrixXd X;  // L x d
  MatrixXd Y;  // L x N
  VectorXd xq;
  VectorXd yq;
  VectorXd yq_clean;
  VectorXd beta;
  double sigma2 = 0.0;
  TaskSpec spec;

  int L() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int N() const { return static_cast<int>(Y.cols()); }
};

MultiTaskSequence sample_multitask_sequence(Rng& rng, const TaskSpec& spec, int d, int L, double sigma2,
                                            const CovSpec& cov = CovSpec::isotropic());
MultiTaskSequence sample_multitask_sequence(Rng& rng, const TaskSpec& spec, int L, double sigma2,
                                            const CovSampler& cov);

// Keep the first L demonstrations (same task, same query).
EmbeddedSequence truncate(const EmbeddedSequence& s, int L);

}  // namespace iclab
