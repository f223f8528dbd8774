#include "iclab/risk.hpp"

#include "iclab/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace iclab {

namespace {

constexpr long kChunk = 4096;

struct Sums {
  VectorXd s1;
  MatrixXd s2;
};

}  // namespace

PairedRisk accumulate_paired(int k, long n, int threads, const std::function<void(long, double*)>& loss) {
  require(n >= 2, ErrorKind::parameter, "need at least two Monte-Carlo samples");
  require(k >= 1, ErrorKind::parameter, "need at least one predictor");
  const long nchunks = (n + kChunk - 1) / kChunk;
  std::vector<Sums> chunks(nchunks);
  std::vector<std::exception_ptr> errs(std::max(threads, 1));
  auto work = [&](int tid, int nt) {
    std::vector<double> buf(k);
    try {
      for (long c = tid; c < nchunks; c += nt) {
        Sums& S = chunks[c];
        S.s1 = VectorXd::Zero(k);
        S.s2 = MatrixXd::Zero(k, k);
        const long hi = std::min(n, (c + 1) * kChunk);
        for (long i = c * kChunk; i < hi; ++i) {
          loss(i, buf.data());
          for (int a = 0; a < k; ++a)
            require(std::isfinite(buf[a]), ErrorKind::numeric,
                    "non-finite loss for predictor " + std::to_string(a) + " at sample " + std::to_string(i));
          Eigen::Map<const VectorXd> l(buf.data(), k);
          S.s1 += l;
          S.s2.noalias() += l * l.transpose();
        }
      }
    } catch (...) {
      errs[tid] = std::current_exception();
    }
  };
  const int nt = std::max(1, threads);
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  // fixed-order reduction keeps results independent of the thread count
  VectorXd s1 = VectorXd::Zero(k);
  MatrixXd s2 = MatrixXd::Zero(k, k);
  for (const auto& S : chunks) {
    s1 += S.s1;
    s2 += S.s2;
  }
  const double nn = static_cast<double>(n);
  const VectorXd m = s1 / nn;
  const MatrixXd cov = (s2 - nn * m * m.transpose()) / (nn - 1.0);
  PairedRisk r;
  r.n = n;
  r.risks.resize(k);
  r.diff_mean.resize(k, k);
  r.diff_se.resize(k, k);
  for (int a = 0; a < k; ++a) {
    r.risks[a] = {m[a], std::sqrt(std::max(cov(a, a), 0.0) / nn), n};
    for (int b = 0; b < k; ++b) {
      const double var = cov(a, a) + cov(b, b) - 2.0 * cov(a, b);
      r.diff_mean(a, b) = m[a] - m[b];
      r.diff_se(a, b) = std::sqrt(std::max(var, 0.0) / nn);
    }
  }
  return r;
}

PairedRisk paired_risks(const std::vector<Predictor>& fs, const McSetup& s) {
  CovSampler cs(s.cov, s.d);
  Rng root(s.seed);
  const int k = static_cast<int>(fs.size());
  return accumulate_paired(k, s.n, s.threads, [&](long i, double* out) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    const EmbeddedSequence seq = draw_instance(rng, s.d, s.L, s.sigma2, cs);
    for (int a = 0; a < k; ++a) {
      const double e = seq.yq - fs[a](seq);
      out[a] = e * e;
    }
  });
}

RiskEstimate monte_carlo_risk(const Predictor& f, const McSetup& s) { return paired_risks({f}, s).risks[0]; }

double vgd_risk_closed(double eta, int d, int L, double sigma2) {
  return 1.0 + sigma2 - 2.0 * eta + eta * eta / L * (d * (1.0 + sigma2) + L + 1.0);
}

double vgd_optimal_eta(int d, int L, double sigma2) { return L / (d * (1.0 + sigma2) + L + 1.0); }

double gd_risk_asymptotic(double xi, double sigma2) {
  require(xi > 0.0, ErrorKind::domain, "xi must be positive");
  const double a = xi * (1.0 + sigma2);
  return sigma2 + a / (a + 1.0);
}

double bayes_risk_asymptotic(double xi, double sigma2) {
  require(xi > 0.0, ErrorKind::domain, "xi must be positive");
  require(sigma2 >= 0.0, ErrorKind::domain, "noise variance must be nonnegative");
  const double b = sigma2 + 1.0 / xi - 1.0;
  return 0.5 * (sigma2 + 1.0 - 1.0 / xi + std::sqrt(4.0 * sigma2 + b * b));
}

BayesRatio bayes_ratio_bound(double xi, double sigma2) {
  require(sigma2 > 0.0, ErrorKind::domain, "bound needs sigma2 > 0");
  require(xi > 0.0 && sigma2 + 1.0 / xi > 1.0, ErrorKind::domain, "bound needs sigma2 + 1/xi > 1");
  BayesRatio r;
  r.ratio = gd_risk_asymptotic(xi, sigma2) / bayes_risk_asymptotic(xi, sigma2);
  r.bound = 1.0 + 2.0 / sigma2 / ((1.0 + xi * sigma2) * (1.0 + sigma2 + 1.0 / xi));
  r.holds = r.ratio <= r.bound;
  return r;
}

RiskCurve length_generalization_sweep(const LengthModel& model, int train_L, const std::vector<int>& lengths, int d,
                                      double sigma2, long n, std::uint64_t seed, const CovSpec& cov, int threads) {
  require(!lengths.empty(), ErrorKind::parameter, "length list is empty");
  for (size_t i = 1; i < lengths.size(); ++i)
    require(lengths[i] > lengths[i - 1], ErrorKind::parameter, "lengths must be strictly increasing");
  require(lengths.front() >= 1, ErrorKind::parameter, "lengths must be positive");
  const int Lmax = lengths.back();
  CovSampler cs(cov, d);
  Rng root(seed);
  const int k = static_cast<int>(lengths.size());
  RiskCurve c;
  c.train_L = train_L;
  c.lengths = lengths;
  c.stats = accumulate_paired(k, n, threads, [&](long i, double* out) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    const EmbeddedSequence full = draw_instance(rng, d, Lmax, sigma2, cs);
    for (int a = 0; a < k; ++a) {
      const EmbeddedSequence s = lengths[a] == Lmax ? full : truncate(full, lengths[a]);
      const double e = s.yq - model(s, lengths[a]);
      out[a] = e * e;
    }
  });
  return c;
}

SteinResult stein_identity_check(double omega, double omega_t, const VectorXd& v, int L, int d, long n,
                                 std::uint64_t seed, int threads) {
  require(n >= 1000, ErrorKind::parameter, "stein check needs n >= 1000");
  require(v.size() == d, ErrorKind::dimension, "v must have length d");
  require(L >= 1, ErrorKind::dimension, "L must be positive");
  const double vv = v.squaredNorm();
  Rng root(seed);
  // three accumulated quantities: left, right, left - right
  PairedRisk acc = accumulate_paired(3, n, threads, [&](long i, double* out) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    MatrixXd X(L, d);
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < d; ++j) X(l, j) = rng.normal();
    const VectorXd s = X * v;
    const VectorXd p = softmax(omega * s), pt = softmax(omega_t * s);
    const double left = (X.transpose() * pt).dot(X.transpose() * p);
    const double ppt = p.dot(pt), pp = p.squaredNorm(), tt = pt.squaredNorm();
    const double pt_p2 = pt.dot(p.cwiseProduct(p));  // pt' p^2
    const double p_pt2 = p.dot(pt.cwiseProduct(pt));  // p' pt^2
    const double right = d * ppt + omega * omega_t * vv * (1.0 - pp) * (1.0 - tt) +
                         2.0 * omega * omega * vv * (-pt_p2 + ppt * pp) +
                         2.0 * omega_t * omega_t * vv * (-p_pt2 + ppt * tt) +
                         omega * omega_t * vv * (ppt - p_pt2 - pt_p2 + ppt * ppt);
    out[0] = left;
    out[1] = right;
    out[2] = left - right;
  });
  SteinResult r;
  r.left = acc.risks[0].mean;
  r.right = acc.risks[1].mean;
  r.residual = std::abs(acc.risks[2].mean);
  r.std_error = acc.risks[2].std_error;
  r.n = n;
  return r;
}

}  // namespace iclab
