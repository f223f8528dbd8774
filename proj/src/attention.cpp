#include "iclab/attention.hpp"

#include <cmath>
#include <string>

namespace iclab {

Activation Activation::parse(const std::string& name, double c) {
  if (name == "exp" || name == "softmax") return exp();
  if (name == "affine") return affine(c);
  if (name == "squared_affine") return squared_affine(c);
  if (name == "one_plus_tanh") return one_plus_tanh();
  throw Error(ErrorKind::parameter, "unknown activation '" + name + "'");
}

double Activation::f(double x) const {
  switch (kind) {
    case Kind::exp: return std::exp(x);
    case Kind::affine: return 1.0 + C * x;
    case Kind::squared_affine: return (1.0 + C * x) * (1.0 + C * x);
    case Kind::one_plus_tanh: return 1.0 + std::tanh(x);
  }
  return 0.0;
}

double Activation::df(double x) const {
  switch (kind) {
    case Kind::exp: return std::exp(x);
    case Kind::affine: return C;
    case Kind::squared_affine: return 2.0 * C * (1.0 + C * x);
    case Kind::one_plus_tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

double Activation::first_order_coeff() const {
  switch (kind) {
    case Kind::exp: return 1.0;
    case Kind::affine: return C;
    case Kind::squared_affine: return 2.0 * C;
    case Kind::one_plus_tanh: return 1.0;
  }
  return 0.0;
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::exp: return "exp";
    case Kind::affine: return "affine";
    case Kind::squared_affine: return "squared_affine";
    case Kind::one_plus_tanh: return "one_plus_tanh";
  }
  return "?";
}

Readout Readout::linear(int L_norm) {
  require(L_norm > 0, ErrorKind::parameter, "L_norm must be positive");
  Readout r;
  r.kind = Kind::linear;
  r.L_norm = L_norm;
  return r;
}

void SimplifiedParams::validate() const {
  require(omega.size() >= 1, ErrorKind::dimension, "need at least one head");
  require(omega.size() == mu.size(), ErrorKind::dimension, "omega and mu lengths differ");
  require(omega.allFinite() && mu.allFinite(), ErrorKind::numeric, "non-finite simplified parameters");
}

void MultiTaskParams::validate() const {
  require(omega.rows() >= 1 && omega.rows() == mu.rows(), ErrorKind::dimension, "head counts of omega and mu differ");
  require(omega.allFinite() && mu.allFinite(), ErrorKind::numeric, "non-finite multitask parameters");
}

MultiTaskParams MultiTaskParams::from_simplified(const SimplifiedParams& p) {
  MultiTaskParams m;
  m.omega = p.omega;
  m.mu = p.mu;
  return m;
}

const char* to_string(Parametrization p) {
  switch (p) {
    case Parametrization::factored: return "factored";
    case Parametrization::consolidated: return "consolidated";
    case Parametrization::simplified: return "simplified";
  }
  return "?";
}

Parametrization parse_parametrization(const std::string& s) {
  if (s == "factored") return Parametrization::factored;
  if (s == "consolidated") return Parametrization::consolidated;
  if (s == "simplified") return Parametrization::simplified;
  throw Error(ErrorKind::parameter, "unknown parametrization '" + s + "'");
}

MatrixXd FullAttentionParams::kq(int h) const {
  return mode == Parametrization::factored ? MatrixXd(K[h].transpose() * Q[h]) : KQ[h];
}

MatrixXd FullAttentionParams::ov(int h) const {
  return mode == Parametrization::factored ? MatrixXd(O[h] * V[h]) : OV[h];
}

FullAttentionParams FullAttentionParams::to_consolidated() const {
  FullAttentionParams c;
  c.mode = Parametrization::consolidated;
  c.H = H;
  c.d = d;
  c.N = N;
  for (int h = 0; h < H; ++h) {
    c.KQ.push_back(kq(h));
    c.OV.push_back(ov(h));
  }
  return c;
}

void FullAttentionParams::validate() const {
  require(H >= 1 && d >= 1 && N >= 1, ErrorKind::dimension, "H, d, N must be positive");
  const int D = d + N;
  auto check = [&](const std::vector<MatrixXd>& v, const char* name) {
    require(static_cast<int>(v.size()) == H, ErrorKind::dimension, std::string(name) + " has wrong head count");
    for (const auto& m : v)
      require(m.rows() == D && m.cols() == D, ErrorKind::dimension,
              std::string(name) + " must be " + std::to_string(D) + "x" + std::to_string(D));
  };
  if (mode == Parametrization::factored) {
    check(K, "K");
    check(Q, "Q");
    check(O, "O");
    check(V, "V");
  } else {
    require(mode == Parametrization::consolidated, ErrorKind::mode_mismatch, "full parameters cannot be simplified");
    check(KQ, "KQ");
    check(OV, "OV");
  }
}

FullAttentionParams FullAttentionParams::zeros(Parametrization mode, int H, int d, int N) {
  require(mode != Parametrization::simplified, ErrorKind::mode_mismatch, "full parameters need factored or consolidated");
  FullAttentionParams p;
  p.mode = mode;
  p.H = H;
  p.d = d;
  p.N = N;
  MatrixXd z = MatrixXd::Zero(d + N, d + N);
  if (mode == Parametrization::factored) {
    p.K.assign(H, z);
    p.Q.assign(H, z);
    p.O.assign(H, z);
    p.V.assign(H, z);
  } else {
    p.KQ.assign(H, z);
    p.OV.assign(H, z);
  }
  return p;
}

FullAttentionParams FullAttentionParams::from_simplified(const SimplifiedParams& s, int d) {
  return from_multitask(MultiTaskParams::from_simplified(s), d);
}

FullAttentionParams FullAttentionParams::from_multitask(const MultiTaskParams& m, int d) {
  m.validate();
  require(m.omega.cols() == 1 || m.omega.cols() == d, ErrorKind::dimension, "omega width must be 1 or d");
  FullAttentionParams p = zeros(Parametrization::consolidated, m.H(), d, m.N());
  for (int h = 0; h < p.H; ++h) {
    for (int i = 0; i < d; ++i) p.KQ[h](i, i) = m.omega(h, m.omega.cols() == 1 ? 0 : i);
    for (int n = 0; n < p.N; ++n) p.OV[h](d + n, d + n) = m.mu(h, n);
  }
  return p;
}

VectorXd softmax(const Eigen::Ref<const VectorXd>& s) {
  VectorXd e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

// ---- kernel ----

AttentionKernel::Head& AttentionKernel::head(int h) {
  if (static_cast<int>(heads_.size()) <= h) heads_.resize(h + 1);
  return heads_[h];
}

void AttentionKernel::weights(int h, Head& hd) const {
  const Eigen::Index L = hd.s.size();
  if (r_.kind == Readout::Kind::linear) {
    hd.w = hd.s / static_cast<double>(r_.L_norm);
    return;
  }
  if (r_.act.kind == Activation::Kind::exp) {
    hd.w = (hd.s.array() - hd.s.maxCoeff()).exp();
    hd.w /= hd.w.sum();
    hd.fp = hd.w;
    return;
  }
  hd.w.resize(L);
  hd.fp.resize(L);
  double F = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    hd.w[l] = r_.act.f(hd.s[l]);
    F += hd.w[l];
  }
  require((r_.signed_normalizer ? F != 0.0 : F > 0.0) && std::isfinite(F), ErrorKind::domain,
          "nonpositive normalizer " + std::to_string(F) + " in head " + std::to_string(h + 1) + " (" +
              r_.act.name() + ")");
  for (Eigen::Index l = 0; l < L; ++l) hd.fp[l] = r_.act.df(hd.s[l]) / F;
  hd.w /= F;
}

void AttentionKernel::weights_backward(Head& hd) const {
  if (r_.kind == Readout::Kind::linear) {
    hd.ds = hd.dw / static_cast<double>(r_.L_norm);
    return;
  }
  const double c = hd.w.dot(hd.dw);
  hd.ds = hd.fp.cwiseProduct((hd.dw.array() - c).matrix());
}

VectorXd AttentionKernel::forward(const std::vector<MatrixXd>& KQ, const std::vector<MatrixXd>& OV,
                                  const MatrixXd& X, const Eigen::Ref<const MatrixXd>& Y, const VectorXd& xq) {
  const int d = static_cast<int>(X.cols()), N = static_cast<int>(Y.cols());
  VectorXd out = VectorXd::Zero(N);
  for (int h = 0; h < static_cast<int>(KQ.size()); ++h) {
    Head& hd = head(h);
    const MatrixXd& M = KQ[h];
    hd.dw.noalias() = M.leftCols(d) * xq;  // reuse dw as the D-vector KQ z_q
    hd.s.noalias() = X * hd.dw.head(d);
    hd.s.noalias() += Y * hd.dw.tail(N);
    const auto OVb = OV[h].bottomRows(N);
    hd.A.noalias() = X * OVb.leftCols(d).transpose();
    hd.A.noalias() += Y * OVb.rightCols(N).transpose();
    weights(h, hd);
    out.noalias() += hd.A.transpose() * hd.w;
  }
  return out;
}

void AttentionKernel::backward(const std::vector<MatrixXd>& KQ, const std::vector<MatrixXd>&, const MatrixXd& X,
                               const Eigen::Ref<const MatrixXd>& Y, const VectorXd& xq, const VectorXd& gy,
                               std::vector<MatrixXd>& dKQ, std::vector<MatrixXd>& dOV) {
  const int d = static_cast<int>(X.cols()), N = static_cast<int>(Y.cols());
  for (int h = 0; h < static_cast<int>(KQ.size()); ++h) {
    Head& hd = heads_[h];
    hd.dw.noalias() = hd.A * gy;
    weights_backward(hd);
    dKQ[h].topLeftCorner(d, d).noalias() += (X.transpose() * hd.ds) * xq.transpose();
    dKQ[h].bottomLeftCorner(N, d).noalias() += (Y.transpose() * hd.ds) * xq.transpose();
    dOV[h].bottomLeftCorner(N, d).noalias() += gy * (X.transpose() * hd.w).transpose();
    dOV[h].bottomRightCorner(N, N).noalias() += gy * (Y.transpose() * hd.w).transpose();
  }
}

VectorXd AttentionKernel::forward(const MultiTaskParams& p, const MatrixXd& X, const Eigen::Ref<const MatrixXd>& Y,
                                  const VectorXd& xq) {
  const int N = static_cast<int>(Y.cols());
  require(p.mu.cols() == N, ErrorKind::dimension, "mu width does not match task count");
  require(p.omega.cols() == 1 || p.omega.cols() == X.cols(), ErrorKind::dimension, "omega width must be 1 or d");
  const bool scalar = p.omega.cols() == 1;
  if (scalar) t_.noalias() = X * xq;
  VectorXd out = VectorXd::Zero(N);
  for (int h = 0; h < p.H(); ++h) {
    Head& hd = head(h);
    if (scalar)
      hd.s = p.omega(h, 0) * t_;
    else
      hd.s.noalias() = X * p.omega.row(h).transpose().cwiseProduct(xq);
    weights(h, hd);
    out.noalias() += p.mu.row(h).transpose().cwiseProduct(Y.transpose() * hd.w);
  }
  return out;
}

void AttentionKernel::backward(const MultiTaskParams& p, const MatrixXd& X, const Eigen::Ref<const MatrixXd>& Y,
                               const VectorXd& xq, const VectorXd& gy, MultiTaskParams& grad) {
  const bool scalar = p.omega.cols() == 1;
  for (int h = 0; h < p.H(); ++h) {
    Head& hd = heads_[h];
    hd.dw.noalias() = Y * p.mu.row(h).transpose().cwiseProduct(gy);
    weights_backward(hd);
    grad.mu.row(h) += gy.cwiseProduct(Y.transpose() * hd.w).transpose();
    if (scalar)
      grad.omega(h, 0) += hd.ds.dot(t_);
    else
      grad.omega.row(h) += (X.transpose() * hd.ds).cwiseProduct(xq).transpose();
  }
}

// ---- predictors ----

double predict_simplified(const SimplifiedParams& p, const EmbeddedSequence& seq) {
  p.validate();
  require(seq.xq.size() == seq.X.cols() && seq.y.size() == seq.X.rows(), ErrorKind::dimension,
          "inconsistent sequence dimensions");
  const VectorXd t = seq.X * seq.xq;
  double out = 0.0;
  for (int h = 0; h < p.H(); ++h) {
    VectorXd s = p.omega[h] * t;
    VectorXd w = (s.array() - s.maxCoeff()).exp();
    out += p.mu[h] * w.dot(seq.y) / w.sum();
  }
  require(std::isfinite(out), ErrorKind::numeric, "non-finite prediction");
  return out;
}

double predict_activation(const SimplifiedParams& p, const EmbeddedSequence& seq, const Activation& act) {
  p.validate();
  AttentionKernel k(Readout::activation(act));
  VectorXd out = k.forward(MultiTaskParams::from_simplified(p), seq.X, seq.y, seq.xq);
  require(std::isfinite(out[0]), ErrorKind::numeric, "non-finite prediction");
  return out[0];
}

static void check_full(const FullAttentionParams& p, int d, int N) {
  p.validate();
  require(p.d == d && p.N == N, ErrorKind::dimension,
          "parameters are for d=" + std::to_string(p.d) + ", N=" + std::to_string(p.N) + " but sequence has d=" +
              std::to_string(d) + ", N=" + std::to_string(N));
}

double predict_full(const FullAttentionParams& p, const EmbeddedSequence& seq, const Readout& r) {
  check_full(p, seq.d(), 1);
  FullAttentionParams c = p.mode == Parametrization::consolidated ? p : p.to_consolidated();
  AttentionKernel k(r);
  return k.forward(c.KQ, c.OV, seq.X, seq.y, seq.xq)[0];
}

double predict_linear(const FullAttentionParams& p, const EmbeddedSequence& seq, int L_norm) {
  require(L_norm > 0, ErrorKind::parameter, "L_norm must be positive");
  return predict_full(p, seq, Readout::linear(L_norm));
}

VectorXd predict_full_multitask(const FullAttentionParams& p, const MultiTaskSequence& seq, const Readout& r) {
  check_full(p, seq.d(), seq.N());
  FullAttentionParams c = p.mode == Parametrization::consolidated ? p : p.to_consolidated();
  AttentionKernel k(r);
  return k.forward(c.KQ, c.OV, seq.X, seq.Y, seq.xq);
}

VectorXd predict_multitask(const MultiTaskParams& p, const MultiTaskSequence& seq) {
  p.validate();
  require(p.N() == seq.N(), ErrorKind::dimension, "task count mismatch");
  require(p.omega.cols() == seq.d() || p.omega.cols() == 1, ErrorKind::dimension, "omega width mismatch");
  AttentionKernel k(Readout::softmax());
  return k.forward(p, seq.X, seq.Y, seq.xq);
}

MatrixXd predict_full_sequence(const FullAttentionParams& p, const EmbeddedSequence& seq) {
  check_full(p, seq.d(), 1);
  const MatrixXd Z = embed(seq);
  const int cols = static_cast<int>(Z.cols());
  MatrixXd out = Z;
  for (int h = 0; h < p.H; ++h) {
    const MatrixXd KQ = p.kq(h), OV = p.ov(h);
    const MatrixXd S = Z.transpose() * KQ * Z;  // S(i,j) = z_i' KQ z_j
    const MatrixXd OVZ = OV * Z;
    // column j attends to the columns before it; the first column has nothing to attend to
    for (int j = 1; j < cols; ++j) out.col(j) += OVZ.leftCols(j) * softmax(S.col(j).head(j));
  }
  return out;
}

}  // namespace iclab
