#pragma once

#include "iclab/common.hpp"

#include <vector>

namespace iclab {

struct ApproxLossParams {
  int d = 5;
  int L = 40;
  double sigma2 = 0.1;
  // When false the additive sigma2 is dropped (1 - 2 mu'w + ...), which leaves minimizers unchanged.
  bool include_noise = true;

  double lambda() const { return (1.0 + sigma2) / L; }
  double xi() const { return static_cast<double>(d) / L; }
  void validate() const;
};

double approx_loss(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P);

struct ApproxGrad {
  VectorXd d_omega;
  VectorXd d_mu;
};
ApproxGrad approx_loss_grad(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P);

// Labelled Taylor terms of the negative gradient (-grad), truncated at order K.
struct TaylorTerms {
  VectorXd sign_matching_mu;
  VectorXd zero_sum_mu;
  VectorXd high_order_mu;
  VectorXd sign_matching_omega;
  VectorXd high_order_omega;
  double remainder_bound = 0.0;  // d^{K+1} |omega|_inf^{2(K+1)} / (K+1)!
};
TaylorTerms grad_taylor_decomposition(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P,
                                      int K = 30);

double mu_gamma(double gamma, const ApproxLossParams& P);
double optimal_eta_star(const ApproxLossParams& P);

struct ManifoldPoint {
  double gamma = 0.0;
  std::vector<int> signs;
  VectorXd omega;
  VectorXd mu;
};

// split: nonnegative per-head weights; within each sign group they must sum to 1.
// An empty split spreads mu_gamma evenly within each group.
ManifoldPoint manifold_point(double gamma, const std::vector<int>& signs, const ApproxLossParams& P,
                             const std::vector<double>& split = {});

// sigma2 + (1 - gamma m)^2 + lambda sinh(d gamma^2) m^2 with m = |mu|_1 (sigma2 dropped per include_noise).
double manifold_loss(double gamma, double mu_l1, const ApproxLossParams& P);

struct ScalingCertificate {
  bool omega_ok = false;
  bool mu_ok = false;
  double omega_threshold = 0.0;
  double mu_threshold = 0.0;
  double omega_inf = 0.0;
  double mu_measure = 0.0;  // max(|mu|_inf, |mu|_inf^2)
};

// Advisory check of the loss-approximation validity region; unit constant in the mu bound.
ScalingCertificate check_scaling(const VectorXd& omega, const VectorXd& mu, const ApproxLossParams& P,
                                 double lambda_err);

}  // namespace iclab
