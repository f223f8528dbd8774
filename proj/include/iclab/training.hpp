#pragma once

#include "iclab/attention.hpp"
#include "iclab/datagen.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iclab {

struct OptimizerConfig {
  enum class Kind { sgd, adam };
  Kind kind = Kind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct InitConfig {
  enum class Kind { default_uniform, gaussian, symmetric_two_head };
  Kind kind = Kind::default_uniform;
  double scale = 1.0;   // uniform: bound = scale / sqrt(d+N); gaussian: std
  double alpha = 1e-3;  // symmetric_two_head
};

enum class ModelKind { softmax, linear, activation, multitask };

struct ModelConfig {
  ModelKind kind = ModelKind::softmax;
  Activation act;  // activation models
  TaskSpec tasks;  // multitask models
  int L_norm = 0;  // linear models; 0 means the training L
  // Activation models: let the training loss run through negative normalizers, as an
  // unguarded autodiff implementation would. Prediction and risk evaluation stay guarded.
  bool signed_normalizer = false;
};

struct TrainConfig {
  int d = 5;
  int L = 40;
  int H = 2;
  double sigma2 = 0.1;
  CovSpec cov;
  long steps = 1000;
  int batch = 64;
  OptimizerConfig opt;
  std::uint64_t seed = 0;
  InitConfig init;
  Parametrization param = Parametrization::factored;
  int log_every = 100;
  ModelConfig model;
  int eval_batch = 256;
  int threads = 1;

  void validate() const;
  int N() const { return model.kind == ModelKind::multitask ? model.tasks.N : 1; }
  Readout readout() const;
};

// Parameters of any parametrization, with a flat view for optimizers and checkpoints.
struct ModelParams {
  Parametrization mode = Parametrization::factored;
  FullAttentionParams full;  // factored / consolidated
  MultiTaskParams simple;    // simplified: omega H x 1 (single task) or H x d (multitask)

  int H() const { return mode == Parametrization::simplified ? simple.H() : full.H; }
  long size() const;
  VectorXd flatten() const;
  void unflatten(const VectorXd& v);
  ModelParams zeros_like() const;
  // Named arrays in a fixed order (for checkpoints).
  std::vector<std::pair<std::string, const MatrixXd*>> arrays() const;
  std::vector<std::pair<std::string, MatrixXd*>> arrays();
};

ModelParams init_params(const TrainConfig& cfg, Rng& rng);

struct LossGrad {
  double loss = 0.0;
  ModelParams grad;
};

// Mean over the batch of (1/N)|y_q - yhat_q|^2 and its exact gradient.
LossGrad loss_and_grad(const ModelParams& p, const std::vector<EmbeddedSequence>& batch, const Readout& r,
                       int threads = 1);
LossGrad loss_and_grad(const ModelParams& p, const std::vector<MultiTaskSequence>& batch, const Readout& r,
                       int threads = 1);
double batch_loss(const ModelParams& p, const std::vector<EmbeddedSequence>& batch, const Readout& r);
double batch_loss(const ModelParams& p, const std::vector<MultiTaskSequence>& batch, const Readout& r);

// Single-task prediction for any parametrization.
double predict(const ModelParams& p, const EmbeddedSequence& s, const Readout& r);
VectorXd predict(const ModelParams& p, const MultiTaskSequence& s, const Readout& r);

struct OptimizerState {
  VectorXd m, v;
  long t = 0;
};

// One optimizer update. Throws a numeric error naming `step` if the gradient is not finite.
void optimizer_step(VectorXd& theta, const VectorXd& grad, OptimizerState& st, const OptimizerConfig& cfg,
                    long step = 0);

struct HeadStats {
  double omega = 0.0;
  double mu = 0.0;
  double diag_score = 1.0;
  double kq21_norm = 0.0;
  double ov21_norm = 0.0;
};

struct TraceRow {
  long step = 0;
  double minibatch_loss = 0.0;
  double eval_loss = 0.0;
  std::vector<HeadStats> heads;
};

struct TrainState {
  ModelParams params;
  OptimizerState opt;
  long step = 0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  TrainState final_state;
};

std::vector<HeadStats> head_stats(const ModelParams& p);

// Runs steps [start.step, stop) with stop = cfg.steps when negative. Fresh batches per step;
// the batch of step s depends only on (seed, s), so resumed runs match uninterrupted ones.
TrainingTrace train(const TrainConfig& cfg, const TrainState* start = nullptr, long stop = -1);

// Draws the training batch of a given step (exposed for tests).
std::vector<EmbeddedSequence> training_batch(const TrainConfig& cfg, long step);
std::vector<MultiTaskSequence> training_batch_multitask(const TrainConfig& cfg, long step);

}  // namespace iclab
