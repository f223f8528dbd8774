#pragma once

#include "iclab/datagen.hpp"

#include <string>
#include <vector>

namespace iclab {

struct Activation {
  enum class Kind { exp, affine, squared_affine, one_plus_tanh };
  Kind kind = Kind::exp;
  double C = 1.0;

  static Activation exp() { return {}; }
  static Activation affine(double c) { return {Kind::affine, c}; }
  static Activation squared_affine(double c) { return {Kind::squared_affine, c}; }
  static Activation one_plus_tanh() { return {Kind::one_plus_tanh, 1.0}; }
  static Activation parse(const std::string& name, double c = 1.0);

  double f(double x) const;
  double df(double x) const;
  // C_f in f(x) ~ f(0) + C_f x
  double first_order_coeff() const;
  std::string name() const;
};

// How attention scores become token weights.
struct Readout {
  enum class Kind { normalized, linear };
  Kind kind = Kind::normalized;
  Activation act;
  int L_norm = 0;
  // Accept a negative (nonzero) normalizer instead of raising; training only.
  bool signed_normalizer = false;

  static Readout softmax() { return {}; }
  static Readout activation(Activation a) { return {Kind::normalized, a, 0, false}; }
  static Readout linear(int L_norm);
};

struct SimplifiedParams {
  VectorXd omega;
  VectorXd mu;
  int H() const { return static_cast<int>(omega.size()); }
  void validate() const;
};

struct MultiTaskParams {
  MatrixXd omega;  // H x d  (H x 1 means a scalar KQ scale per head)
  MatrixXd mu;     // H x N
  int H() const { return static_cast<int>(omega.rows()); }
  int N() const { return static_cast<int>(mu.cols()); }
  void validate() const;
  static MultiTaskParams from_simplified(const SimplifiedParams& p);
};

enum class Parametrization { factored, consolidated, simplified };
const char* to_string(Parametrization p);
Parametrization parse_parametrization(const std::string& s);

struct FullAttentionParams {
  Parametrization mode = Parametrization::consolidated;
  int H = 0;
  int d = 0;
  int N = 1;
  std::vector<MatrixXd> K, Q, O, V;  // factored
  std::vector<MatrixXd> KQ, OV;      // consolidated

  int D() const { return d + N; }
  MatrixXd kq(int h) const;
  MatrixXd ov(int h) const;
  FullAttentionParams to_consolidated() const;
  void validate() const;

  static FullAttentionParams zeros(Parametrization mode, int H, int d, int N = 1);
  // KQ11 = omega_h I, OV22 = mu_h, all other blocks zero.
  static FullAttentionParams from_simplified(const SimplifiedParams& p, int d);
  // KQ11 = diag(omega_h) (omega_h I for scalar heads), OV22 = diag(mu_h).
  static FullAttentionParams from_multitask(const MultiTaskParams& p, int d);
};

// Numerically stable softmax.
VectorXd softmax(const Eigen::Ref<const VectorXd>& s);

double predict_simplified(const SimplifiedParams& p, const EmbeddedSequence& seq);
double predict_activation(const SimplifiedParams& p, const EmbeddedSequence& seq, const Activation& act);
double predict_full(const FullAttentionParams& p, const EmbeddedSequence& seq,
                    const Readout& r = Readout::softmax());
MatrixXd predict_full_sequence(const FullAttentionParams& p, const EmbeddedSequence& seq);
double predict_linear(const FullAttentionParams& p, const EmbeddedSequence& seq, int L_norm);
VectorXd predict_multitask(const MultiTaskParams& p, const MultiTaskSequence& seq);
VectorXd predict_full_multitask(const FullAttentionParams& p, const MultiTaskSequence& seq,
                                const Readout& r = Readout::softmax());

// Forward/backward kernel shared by prediction and training. Works on consolidated circuits
// (full models) or on (omega, mu) heads (simplified models). Caches per-head state between
// forward and backward; one instance per thread.
class AttentionKernel {
 public:
  explicit AttentionKernel(Readout r) : r_(r) {}
  const Readout& readout() const { return r_; }

  // Full circuits: KQ[h], OV[h] are D x D with D = d + N.
  VectorXd forward(const std::vector<MatrixXd>& KQ, const std::vector<MatrixXd>& OV, const MatrixXd& X,
                   const Eigen::Ref<const MatrixXd>& Y, const VectorXd& xq);
  // Accumulates d(gy . yhat)/d(KQ, OV) for the last forward call.
  void backward(const std::vector<MatrixXd>& KQ, const std::vector<MatrixXd>& OV, const MatrixXd& X,
                const Eigen::Ref<const MatrixXd>& Y, const VectorXd& xq, const VectorXd& gy,
                std::vector<MatrixXd>& dKQ, std::vector<MatrixXd>& dOV);

  VectorXd forward(const MultiTaskParams& p, const MatrixXd& X, const Eigen::Ref<const MatrixXd>& Y,
                   const VectorXd& xq);
  void backward(const MultiTaskParams& p, const MatrixXd& X, const Eigen::Ref<const MatrixXd>& Y,
                const VectorXd& xq, const VectorXd& gy, MultiTaskParams& grad);

 private:
  struct Head {
    VectorXd s, w, fp, dw, ds;
    MatrixXd A;
  };
  void weights(int h, Head& hd) const;
  void weights_backward(Head& hd) const;
  Head& head(int h);

  Readout r_;
  std::vector<Head> heads_;
  VectorXd t_;
};

}  // namespace iclab
