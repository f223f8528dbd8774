#pragma once

#include "iclab/datagen.hpp"

namespace iclab {

struct Preconditioner {
  MatrixXd gamma;
  // Validates symmetry (1e-12 relative) and positive definiteness.
  explicit Preconditioner(const MatrixXd& g);
  Eigen::LLT<MatrixXd> llt;
};

double vanilla_gd(const EmbeddedSequence& s, double eta);
double debiased_gd(const EmbeddedSequence& s, double eta);
double ridge(const EmbeddedSequence& s, double lambda_ridge);
double kernel_regressor(const EmbeddedSequence& s, double omega, double mu);
double preconditioned_gd(const EmbeddedSequence& s, const Preconditioner& P, double eta = 1.0);

// (1 + 1/L) Sigma + (tr Sigma + d sigma2)/L I
Preconditioner gamma_star(const CovSpec& cov, int d, int L, double sigma2);

// Single-head kernel optimum: omega* = 1/sqrt(d), mu* = sqrt(d) / (1 + e (1+sigma2) d / L).
double kernel_omega_star(int d);
double kernel_mu_star(int d, int L, double sigma2);

// Debiased GD restricted to the 1-based feature set `support`, on response column n.
double debiased_gd_support(const MultiTaskSequence& s, int n, const std::vector<int>& support, double eta);

}  // namespace iclab
