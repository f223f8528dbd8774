#pragma once

#include "iclab/datagen.hpp"

#include <functional>
#include <vector>

namespace iclab {

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

using Predictor = std::function<double(const EmbeddedSequence&)>;

struct McSetup {
  int d = 5;
  int L = 40;
  double sigma2 = 0.1;
  CovSpec cov;
  long n = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Squared error against the noisy query response, averaged over n fresh sequences.
RiskEstimate monte_carlo_risk(const Predictor& f, const McSetup& s);

// Common-random-number evaluation of several predictors on the same sequences.
struct PairedRisk {
  std::vector<RiskEstimate> risks;
  MatrixXd diff_mean;  // risk_i - risk_j
  MatrixXd diff_se;    // std error of the paired difference
  long n = 0;
  // (risk_i - risk_j) / se_ij
  double z(int i, int j) const { return diff_mean(i, j) / diff_se(i, j); }
};
PairedRisk paired_risks(const std::vector<Predictor>& fs, const McSetup& s);

// Generic chunked, thread-count-independent accumulation of per-sequence loss vectors.
// loss(seq_index, out) fills k losses for one sample.
PairedRisk accumulate_paired(int k, long n, int threads, const std::function<void(long, double*)>& loss);

double vgd_risk_closed(double eta, int d, int L, double sigma2);
double vgd_optimal_eta(int d, int L, double sigma2);
double gd_risk_asymptotic(double xi, double sigma2);
double bayes_risk_asymptotic(double xi, double sigma2);

struct BayesRatio {
  double ratio = 0.0;
  double bound = 0.0;
  bool holds = false;
};
BayesRatio bayes_ratio_bound(double xi, double sigma2);

using LengthModel = std::function<double(const EmbeddedSequence&, int)>;

struct RiskCurve {
  int train_L = 0;
  std::vector<int> lengths;
  PairedRisk stats;  // one entry per length, paired through shared prefixes
};

// Sequences are drawn at max(L') and truncated, so all lengths share task, query and prefix.
RiskCurve length_generalization_sweep(const LengthModel& model, int train_L, const std::vector<int>& lengths,
                                      int d, double sigma2, long n, std::uint64_t seed,
                                      const CovSpec& cov = CovSpec::isotropic(), int threads = 1);

struct SteinResult {
  double left = 0.0;
  double right = 0.0;
  double residual = 0.0;   // |left - right|
  double std_error = 0.0;  // of the paired difference
  long n = 0;
};

// Monte-Carlo check of E[pt' X X' p] against its five-term expansion with p = smax(w X v).
SteinResult stein_identity_check(double omega, double omega_t, const VectorXd& v, int L, int d, long n,
                                 std::uint64_t seed, int threads = 1);

}  // namespace iclab
