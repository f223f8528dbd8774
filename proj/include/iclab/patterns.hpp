#pragma once

#include "iclab/approxloss.hpp"
#include "iclab/attention.hpp"

#include <string>
#include <vector>

namespace iclab {

struct HeadCircuit {
  MatrixXd KQ11;  // d x d
  MatrixXd KQ21;  // N x d
  MatrixXd OV21;  // N x d
  MatrixXd OV22;  // N x N
};

struct CircuitView {
  int d = 0;
  int N = 1;
  std::vector<HeadCircuit> heads;
  std::vector<MatrixXd> KQ, OV;  // full circuits
};

CircuitView extract_circuits(const FullAttentionParams& p);

// |diag(M)|_2 / |M|_F; 1 for the zero matrix.
double diagonality_score(const MatrixXd& M);

// Per-head (omega_hat, mu_hat): mean KQ11 diagonal and OV22(0,0).
SimplifiedParams simplified_view(const CircuitView& c);

struct HeadClasses {
  std::vector<int> positive, negative, dummy, mismatch;  // 0-based head indices
};

// tol_dummy < 0 selects the default 0.1 * median nonzero |omega| (floor 1e-3).
// A head is dummy when |omega| < tol_dummy and |mu| < tol_dummy_mu * max|mu|.
// Heads with opposite signs of omega and mu (|mu| above tol_sign * max|mu|) go to `mismatch`.
HeadClasses classify_heads(const VectorXd& omega, const VectorXd& mu, double tol_dummy = -1.0,
                           double tol_sign = 0.0, double tol_dummy_mu = 0.1);

struct PatternMetrics {
  double zero_sum_residual = 0.0;
  double homogeneity_ratio = 1.0;
  double balance_residual = 0.0;
};
PatternMetrics pattern_metrics(const VectorXd& omega, const VectorXd& mu, const HeadClasses& c);

struct ManifoldFit {
  double gamma_hat = 0.0;
  double distance = 0.0;
  VectorXd omega_proj;
  VectorXd mu_proj;
};
// Euclidean projection onto S_gamma_hat for the sign pattern given by the classes.
ManifoldFit manifold_fit(const VectorXd& omega, const VectorXd& mu, const HeadClasses& c, const ApproxLossParams& P);

struct PatternReport {
  SimplifiedParams hat;
  std::vector<double> diag_score, kq21_norm, ov21_norm, diag_variance;
  std::vector<bool> sign_match;
  HeadClasses classes;
  PatternMetrics metrics;
  ManifoldFit fit;
  bool fit_ok = false;
  std::string fit_error;
};
PatternReport pattern_report(const FullAttentionParams& p, const ApproxLossParams& P);

struct FeatureAtom {
  std::string name;
  std::vector<int> features;  // 1-based
  unsigned mask = 0;          // bit n set when the atom lies in support n
};
// Intersection atoms of the supports; two-task names are S*, S1c, S2c.
std::vector<FeatureAtom> feature_atoms(const TaskSpec& spec, int d);

struct Superposition {
  std::vector<FeatureAtom> atoms;
  MatrixXd sums;     // N x atoms: sum_h mu_n^(h) * mean(omega^(h) over atom)
  VectorXd ov_sums;  // sum_h mu_n^(h)
  std::vector<std::string> flagged;  // atoms whose omega entries vary more than tol within a head
};
Superposition superposition_check(const MultiTaskParams& p, const TaskSpec& spec, double tol_var = 1e-4);

// Per-head (omega_i, mu_n) of a multitask model: KQ11 diagonal and OV22 diagonal.
MultiTaskParams multitask_view(const CircuitView& c);

struct HeadTask {
  int task = -1;          // 0-based; -1 for dummy heads
  double leakage = 0.0;   // largest other OV22 entry / dominant diagonal entry
};
struct TaskGroup {
  std::vector<int> heads;
  double on_support_mean = 0.0;  // mean |omega| over group heads and support features
  double off_support_max = 0.0;  // max |omega| off the support
  double off_ratio() const { return on_support_mean > 0.0 ? off_support_max / on_support_mean : 0.0; }
};
struct TaskGrouping {
  std::vector<HeadTask> heads;
  std::vector<TaskGroup> groups;  // one per task
  double max_leakage = 0.0;
  bool every_task_covered = false;
};
// Assigns each head to the task with the largest |OV22(n,n)|; heads whose dominant entry is
// below dummy_tol * (max over heads) are dummy.
TaskGrouping task_grouping(const std::vector<MatrixXd>& ov22, const MatrixXd& omega, const TaskSpec& spec,
                           double dummy_tol = 0.1);
TaskGrouping task_grouping(const CircuitView& c, const TaskSpec& spec, double dummy_tol = 0.1);
TaskGrouping task_grouping(const MultiTaskParams& p, const TaskSpec& spec, double dummy_tol = 0.1);

}  // namespace iclab
