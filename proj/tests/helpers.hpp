#pragma once

#include "iclab/training.hpp"

#include <algorithm>
#include <cmath>

namespace iclab::test {

inline EmbeddedSequence random_sequence(std::uint64_t seed, int d, int L, double sigma2 = 0.1) {
  Rng rng(seed);
  return draw_instance(rng, d, L, sigma2, CovSampler(CovSpec::isotropic(), d));
}

inline MatrixXd gaussian(Rng& rng, int r, int c, double s = 1.0) {
  MatrixXd m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = s * rng.normal();
  return m;
}

// Largest relative error between analytic and central-difference gradients.
// Coordinates with |g| below `floor` are compared on the absolute scale of `floor`.
template <class Batch>
double fd_max_rel_error(const ModelParams& p, const Batch& batch, const Readout& r, double h = 1e-5,
                        double floor = 1e-4) {
  const LossGrad lg = loss_and_grad(p, batch, r);
  const VectorXd g = lg.grad.flatten();
  VectorXd th = p.flatten();
  ModelParams q = p;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < th.size(); ++i) {
    const double t0 = th[i];
    th[i] = t0 + h;
    q.unflatten(th);
    const double lp = batch_loss(q, batch, r);
    th[i] = t0 - h;
    q.unflatten(th);
    const double lm = batch_loss(q, batch, r);
    th[i] = t0;
    const double fd = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(g[i]), std::abs(fd), floor});
    worst = std::max(worst, std::abs(g[i] - fd) / denom);
  }
  return worst;
}

}  // namespace iclab::test
