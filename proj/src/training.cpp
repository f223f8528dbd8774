#include "iclab/training.hpp"

#include "iclab/patterns.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace iclab {

void TrainConfig::validate() const {
  require(d >= 1 && L >= 1 && H >= 1, ErrorKind::parameter, "d, L, H must be positive");
  require(sigma2 >= 0.0, ErrorKind::parameter, "sigma2 must be nonnegative");
  require(steps >= 0, ErrorKind::parameter, "steps must be nonnegative");
  require(batch >= 1 && eval_batch >= 1, ErrorKind::parameter, "batch sizes must be positive");
  require(opt.lr > 0.0, ErrorKind::parameter, "learning rate must be positive");
  require(init.scale >= 0.0, ErrorKind::parameter, "init scale must be nonnegative");
  require(log_every >= 1, ErrorKind::parameter, "log_every must be positive");
  require(threads >= 1, ErrorKind::parameter, "threads must be positive");
  cov.matrix(d);
  if (model.kind == ModelKind::multitask) model.tasks.validate(d);
  if (init.kind == InitConfig::Kind::symmetric_two_head)
    require(H == 2, ErrorKind::parameter, "symmetric_two_head init needs H = 2");
}

Readout TrainConfig::readout() const {
  switch (model.kind) {
    case ModelKind::softmax:
    case ModelKind::multitask: return Readout::softmax();
    case ModelKind::linear: return Readout::linear(model.L_norm > 0 ? model.L_norm : L);
    case ModelKind::activation: return Readout::activation(model.act);
  }
  return Readout::softmax();
}

// ---- parameter container ----

std::vector<std::pair<std::string, const MatrixXd*>> ModelParams::arrays() const {
  std::vector<std::pair<std::string, const MatrixXd*>> out;
  auto* self = const_cast<ModelParams*>(this);
  for (auto& [n, m] : self->arrays()) out.emplace_back(n, m);
  return out;
}

std::vector<std::pair<std::string, MatrixXd*>> ModelParams::arrays() {
  std::vector<std::pair<std::string, MatrixXd*>> out;
  auto tag = [](const char* n, int h) { return std::string(n) + "[" + std::to_string(h) + "]"; };
  switch (mode) {
    case Parametrization::factored:
      for (int h = 0; h < full.H; ++h) {
        out.emplace_back(tag("K", h), &full.K[h]);
        out.emplace_back(tag("Q", h), &full.Q[h]);
        out.emplace_back(tag("O", h), &full.O[h]);
        out.emplace_back(tag("V", h), &full.V[h]);
      }
      break;
    case Parametrization::consolidated:
      for (int h = 0; h < full.H; ++h) {
        out.emplace_back(tag("KQ", h), &full.KQ[h]);
        out.emplace_back(tag("OV", h), &full.OV[h]);
      }
      break;
    case Parametrization::simplified:
      out.emplace_back("omega", &simple.omega);
      out.emplace_back("mu", &simple.mu);
      break;
  }
  return out;
}

long ModelParams::size() const {
  long n = 0;
  for (const auto& [name, m] : arrays()) n += m->size();
  return n;
}

VectorXd ModelParams::flatten() const {
  VectorXd v(size());
  long o = 0;
  for (const auto& [name, m] : arrays()) {
    v.segment(o, m->size()) = Eigen::Map<const VectorXd>(m->data(), m->size());
    o += m->size();
  }
  return v;
}

void ModelParams::unflatten(const VectorXd& v) {
  require(v.size() == size(), ErrorKind::dimension, "flat parameter length mismatch");
  long o = 0;
  for (auto& [name, m] : arrays()) {
    Eigen::Map<VectorXd>(m->data(), m->size()) = v.segment(o, m->size());
    o += m->size();
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& [name, m] : z.arrays()) m->setZero();
  return z;
}

ModelParams init_params(const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  const int N = cfg.N(), D = cfg.d + N, H = cfg.H;
  ModelParams p;
  p.mode = cfg.param;
  if (cfg.param == Parametrization::simplified) {
    const int w = cfg.model.kind == ModelKind::multitask ? cfg.d : 1;
    p.simple.omega = MatrixXd::Zero(H, w);
    p.simple.mu = MatrixXd::Zero(H, N);
  } else {
    p.full = FullAttentionParams::zeros(cfg.param, H, cfg.d, N);
  }
  if (cfg.init.kind == InitConfig::Kind::symmetric_two_head) {
    const double a = cfg.init.alpha;
    for (int h = 0; h < 2; ++h) {
      const double s = h == 0 ? 1.0 : -1.0;
      if (cfg.param == Parametrization::simplified) {
        p.simple.omega.row(h).setConstant(s * a);
        p.simple.mu.row(h).setConstant(s * a);
      } else if (cfg.param == Parametrization::consolidated) {
        p.full.KQ[h].topLeftCorner(cfg.d, cfg.d) = s * a * MatrixXd::Identity(cfg.d, cfg.d);
        p.full.OV[h].bottomRightCorner(N, N) = s * a * MatrixXd::Identity(N, N);
      } else {
        const double r = std::sqrt(a);
        p.full.K[h] = r * MatrixXd::Identity(D, D);
        p.full.Q[h] = s * r * MatrixXd::Identity(D, D);
        p.full.O[h].bottomRightCorner(N, N) = r * MatrixXd::Identity(N, N);
        p.full.V[h].bottomRightCorner(N, N) = s * r * MatrixXd::Identity(N, N);
      }
    }
    return p;
  }
  const bool gauss = cfg.init.kind == InitConfig::Kind::gaussian;
  const double b = cfg.init.scale / std::sqrt(static_cast<double>(D));
  for (auto& [name, m] : p.arrays())
    for (Eigen::Index j = 0; j < m->cols(); ++j)
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        (*m)(i, j) = gauss ? cfg.init.scale * rng.normal() : rng.uniform(-b, b);
  return p;
}

// ---- loss and gradient ----

namespace {

struct View {
  const MatrixXd& X;
  Eigen::Map<const MatrixXd> Y;
  const VectorXd& xq;
  Eigen::Map<const VectorXd> yq;
};

View view(const EmbeddedSequence& s) {
  return {s.X, Eigen::Map<const MatrixXd>(s.y.data(), s.y.size(), 1), s.xq, Eigen::Map<const VectorXd>(&s.yq, 1)};
}

View view(const MultiTaskSequence& s) {
  return {s.X, Eigen::Map<const MatrixXd>(s.Y.data(), s.Y.rows(), s.Y.cols()), s.xq,
          Eigen::Map<const VectorXd>(s.yq.data(), s.yq.size())};
}

// Circuits used by the kernel for a full model.
struct Circuits {
  std::vector<MatrixXd> KQ, OV;
};

Circuits circuits(const FullAttentionParams& p) {
  Circuits c;
  for (int h = 0; h < p.H; ++h) {
    c.KQ.push_back(p.kq(h));
    c.OV.push_back(p.ov(h));
  }
  return c;
}

void check_dims(const ModelParams& p, const View& v) {
  const int d = static_cast<int>(v.X.cols()), N = static_cast<int>(v.Y.cols());
  if (p.mode == Parametrization::simplified) {
    require(p.simple.N() == N, ErrorKind::dimension, "task count mismatch between params and data");
    require(p.simple.omega.cols() == 1 || p.simple.omega.cols() == d, ErrorKind::dimension, "omega width mismatch");
  } else {
    require(p.full.d == d && p.full.N == N, ErrorKind::dimension, "full parameters do not match data dimensions");
  }
}

template <class Seq>
LossGrad loss_and_grad_impl(const ModelParams& p, const std::vector<Seq>& batch, const Readout& r, int threads,
                            bool want_grad) {
  require(!batch.empty(), ErrorKind::argument, "empty batch");
  const long B = static_cast<long>(batch.size());
  const bool simple = p.mode == Parametrization::simplified;
  Circuits C;
  if (!simple) C = circuits(p.full);
  const int H = p.H();
  const int N = static_cast<int>(view(batch[0]).Y.cols());

  // per-element gradient in circuit (or simplified) coordinates, one column each
  long gsize = 0;
  if (want_grad) {
    if (simple)
      gsize = p.simple.omega.size() + p.simple.mu.size();
    else
      gsize = 2L * H * p.full.D() * p.full.D();
  }
  MatrixXd G(gsize, want_grad ? B : 0);
  VectorXd losses(B);

  auto work = [&](long lo, long hi) {
    AttentionKernel k(r);
    std::vector<MatrixXd> dKQ, dOV;
    MultiTaskParams gs;
    if (!simple) {
      dKQ.assign(H, MatrixXd::Zero(p.full.D(), p.full.D()));
      dOV = dKQ;
    } else {
      gs.omega = MatrixXd::Zero(p.simple.omega.rows(), p.simple.omega.cols());
      gs.mu = MatrixXd::Zero(p.simple.mu.rows(), p.simple.mu.cols());
    }
    for (long b = lo; b < hi; ++b) {
      const View v = view(batch[b]);
      check_dims(p, v);
      const VectorXd yhat = simple ? k.forward(p.simple, v.X, v.Y, v.xq) : k.forward(C.KQ, C.OV, v.X, v.Y, v.xq);
      const VectorXd e = yhat - v.yq;
      losses[b] = e.squaredNorm() / N;
      if (!want_grad) continue;
      const VectorXd gy = (2.0 / (static_cast<double>(B) * N)) * e;
      if (simple) {
        gs.omega.setZero();
        gs.mu.setZero();
        k.backward(p.simple, v.X, v.Y, v.xq, gy, gs);
        G.col(b).head(gs.omega.size()) = Eigen::Map<const VectorXd>(gs.omega.data(), gs.omega.size());
        G.col(b).tail(gs.mu.size()) = Eigen::Map<const VectorXd>(gs.mu.data(), gs.mu.size());
      } else {
        for (int h = 0; h < H; ++h) {
          dKQ[h].setZero();
          dOV[h].setZero();
        }
        k.backward(C.KQ, C.OV, v.X, v.Y, v.xq, gy, dKQ, dOV);
        const long D2 = p.full.D() * p.full.D();
        for (int h = 0; h < H; ++h) {
          G.col(b).segment(2 * h * D2, D2) = Eigen::Map<const VectorXd>(dKQ[h].data(), D2);
          G.col(b).segment((2 * h + 1) * D2, D2) = Eigen::Map<const VectorXd>(dOV[h].data(), D2);
        }
      }
    }
  };

  const int nt = static_cast<int>(std::min<long>(std::max(threads, 1), B));
  if (nt == 1) {
    work(0, B);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (int t = 0; t < nt; ++t) {
      const long lo = B * t / nt, hi = B * (t + 1) / nt;
      pool.emplace_back([&, lo, hi, t] {
        try {
          work(lo, hi);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  LossGrad out;
  double total = 0.0;
  for (long b = 0; b < B; ++b) total += losses[b];
  out.loss = total / static_cast<double>(B);
  if (!want_grad) return out;

  // fixed-order sum over batch elements
  VectorXd g = VectorXd::Zero(gsize);
  for (long b = 0; b < B; ++b) g += G.col(b);

  out.grad = p.zeros_like();
  if (simple) {
    out.grad.simple.omega = Eigen::Map<const MatrixXd>(g.data(), p.simple.omega.rows(), p.simple.omega.cols());
    out.grad.simple.mu =
        Eigen::Map<const MatrixXd>(g.data() + p.simple.omega.size(), p.simple.mu.rows(), p.simple.mu.cols());
    return out;
  }
  const int D = p.full.D();
  const long D2 = static_cast<long>(D) * D;
  for (int h = 0; h < H; ++h) {
    const Eigen::Map<const MatrixXd> gKQ(g.data() + 2 * h * D2, D, D);
    const Eigen::Map<const MatrixXd> gOV(g.data() + (2 * h + 1) * D2, D, D);
    if (p.mode == Parametrization::consolidated) {
      out.grad.full.KQ[h] = gKQ;
      out.grad.full.OV[h] = gOV;
    } else {
      // KQ = K'Q, OV = O V
      out.grad.full.K[h] = p.full.Q[h] * gKQ.transpose();
      out.grad.full.Q[h] = p.full.K[h] * gKQ;
      out.grad.full.O[h] = gOV * p.full.V[h].transpose();
      out.grad.full.V[h] = p.full.O[h].transpose() * gOV;
    }
  }
  return out;
}

}  // namespace

LossGrad loss_and_grad(const ModelParams& p, const std::vector<EmbeddedSequence>& batch, const Readout& r,
                       int threads) {
  return loss_and_grad_impl(p, batch, r, threads, true);
}

LossGrad loss_and_grad(const ModelParams& p, const std::vector<MultiTaskSequence>& batch, const Readout& r,
                       int threads) {
  return loss_and_grad_impl(p, batch, r, threads, true);
}

double batch_loss(const ModelParams& p, const std::vector<EmbeddedSequence>& batch, const Readout& r) {
  return loss_and_grad_impl(p, batch, r, 1, false).loss;
}

double batch_loss(const ModelParams& p, const std::vector<MultiTaskSequence>& batch, const Readout& r) {
  return loss_and_grad_impl(p, batch, r, 1, false).loss;
}

double predict(const ModelParams& p, const EmbeddedSequence& s, const Readout& r) {
  AttentionKernel k(r);
  const View v = view(s);
  check_dims(p, v);
  if (p.mode == Parametrization::simplified) return k.forward(p.simple, v.X, v.Y, v.xq)[0];
  const Circuits C = circuits(p.full);
  return k.forward(C.KQ, C.OV, v.X, v.Y, v.xq)[0];
}

VectorXd predict(const ModelParams& p, const MultiTaskSequence& s, const Readout& r) {
  AttentionKernel k(r);
  const View v = view(s);
  check_dims(p, v);
  if (p.mode == Parametrization::simplified) return k.forward(p.simple, v.X, v.Y, v.xq);
  const Circuits C = circuits(p.full);
  return k.forward(C.KQ, C.OV, v.X, v.Y, v.xq);
}

void optimizer_step(VectorXd& theta, const VectorXd& grad, OptimizerState& st, const OptimizerConfig& cfg,
                    long step) {
  require(theta.size() == grad.size(), ErrorKind::dimension, "gradient length mismatch");
  require(grad.allFinite(), ErrorKind::numeric, "non-finite gradient at step " + std::to_string(step));
  if (cfg.kind == OptimizerConfig::Kind::sgd) {
    theta -= cfg.lr * grad;
    ++st.t;
    return;
  }
  if (st.m.size() != theta.size()) {
    st.m = VectorXd::Zero(theta.size());
    st.v = VectorXd::Zero(theta.size());
  }
  ++st.t;
  st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grad;
  st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  theta.array() -= cfg.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + cfg.eps);
}

std::vector<HeadStats> head_stats(const ModelParams& p) {
  std::vector<HeadStats> out;
  if (p.mode == Parametrization::simplified) {
    for (int h = 0; h < p.simple.H(); ++h) {
      HeadStats s;
      s.omega = p.simple.omega.row(h).mean();
      s.mu = p.simple.mu(h, 0);
      out.push_back(s);
    }
    return out;
  }
  const CircuitView c = extract_circuits(p.full);
  for (const auto& hc : c.heads) {
    HeadStats s;
    s.omega = hc.KQ11.diagonal().mean();
    s.mu = hc.OV22(0, 0);
    s.diag_score = diagonality_score(hc.KQ11);
    s.kq21_norm = hc.KQ21.norm();
    s.ov21_norm = hc.OV21.norm();
    out.push_back(s);
  }
  return out;
}

namespace {

Rng data_root(const TrainConfig& cfg) { return Rng(cfg.seed).stream(0); }

std::vector<EmbeddedSequence> batch_single(const TrainConfig& cfg, const CovSampler& cs, const Rng& root, long n) {
  std::vector<EmbeddedSequence> b;
  b.reserve(n);
  for (long i = 0; i < n; ++i) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    b.push_back(draw_instance(rng, cfg.d, cfg.L, cfg.sigma2, cs));
  }
  return b;
}

std::vector<MultiTaskSequence> batch_multi(const TrainConfig& cfg, const CovSampler& cs, const Rng& root, long n) {
  std::vector<MultiTaskSequence> b;
  b.reserve(n);
  for (long i = 0; i < n; ++i) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    b.push_back(sample_multitask_sequence(rng, cfg.model.tasks, cfg.L, cfg.sigma2, cs));
  }
  return b;
}

template <class Seq>
TrainingTrace train_impl(const TrainConfig& cfg, const TrainState* start, long stop,
                         std::vector<Seq> (*make)(const TrainConfig&, const CovSampler&, const Rng&, long)) {
  Readout r = cfg.readout();
  r.signed_normalizer = cfg.model.signed_normalizer;
  const CovSampler cs(cfg.cov, cfg.d);
  const Rng root(cfg.seed);
  const Rng droot = root.stream(0);
  TrainingTrace tr;
  TrainState st;
  if (start) {
    st = *start;
    require(st.params.mode == cfg.param, ErrorKind::mode_mismatch,
            std::string("state holds ") + to_string(st.params.mode) + " parameters but config asks for " +
                to_string(cfg.param));
    require(st.params.H() == cfg.H, ErrorKind::dimension, "state head count differs from config");
  } else {
    Rng irng = root.stream(1);
    st.params = init_params(cfg, irng);
  }
  if (stop < 0) stop = cfg.steps;
  require(stop >= st.step && stop <= cfg.steps, ErrorKind::parameter, "stop step out of range");
  const std::vector<Seq> eval = make(cfg, cs, root.stream(2), cfg.eval_batch);

  auto log_row = [&](long s, double mb) {
    TraceRow row;
    row.step = s;
    row.minibatch_loss = mb;
    row.eval_loss = batch_loss(st.params, eval, r);
    row.heads = head_stats(st.params);
    tr.rows.push_back(std::move(row));
  };

  VectorXd theta = st.params.flatten();
  for (long s = st.step; s < stop; ++s) {
    const std::vector<Seq> batch = make(cfg, cs, droot.stream(static_cast<std::uint64_t>(s)), cfg.batch);
    LossGrad lg;
    try {
      lg = loss_and_grad(st.params, batch, r, cfg.threads);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::domain) throw;
      const std::string m = e.what();
      throw Error(e.kind(), m.substr(m.find(": ") + 2) + " at step " + std::to_string(s));
    }
    if (!std::isfinite(lg.loss)) throw Error(ErrorKind::numeric, "non-finite loss at step " + std::to_string(s));
    if (s % cfg.log_every == 0) log_row(s, lg.loss);
    optimizer_step(theta, lg.grad.flatten(), st.opt, cfg.opt, s);
    st.params.unflatten(theta);
    st.step = s + 1;
  }
  const std::vector<Seq> last = make(cfg, cs, droot.stream(static_cast<std::uint64_t>(stop)), cfg.batch);
  log_row(stop, batch_loss(st.params, last, r));
  tr.final_state = std::move(st);
  return tr;
}

}  // namespace

std::vector<EmbeddedSequence> training_batch(const TrainConfig& cfg, long step) {
  const CovSampler cs(cfg.cov, cfg.d);
  return batch_single(cfg, cs, data_root(cfg).stream(static_cast<std::uint64_t>(step)), cfg.batch);
}

std::vector<MultiTaskSequence> training_batch_multitask(const TrainConfig& cfg, long step) {
  const CovSampler cs(cfg.cov, cfg.d);
  return batch_multi(cfg, cs, data_root(cfg).stream(static_cast<std::uint64_t>(step)), cfg.batch);
}

TrainingTrace train(const TrainConfig& cfg, const TrainState* start, long stop) {
  cfg.validate();
  if (cfg.model.kind == ModelKind::multitask) return train_impl<MultiTaskSequence>(cfg, start, stop, batch_multi);
  return train_impl<EmbeddedSequence>(cfg, start, stop, batch_single);
}

}  // namespace iclab
