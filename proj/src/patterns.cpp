#include "iclab/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace iclab {

CircuitView extract_circuits(const FullAttentionParams& p) {
  p.validate();
  CircuitView c;
  c.d = p.d;
  c.N = p.N;
  const int d = p.d, N = p.N;
  for (int h = 0; h < p.H; ++h) {
    MatrixXd KQ = p.kq(h), OV = p.ov(h);
    HeadCircuit hc;
    hc.KQ11 = KQ.topLeftCorner(d, d);
    hc.KQ21 = KQ.bottomLeftCorner(N, d);
    hc.OV21 = OV.bottomLeftCorner(N, d);
    hc.OV22 = OV.bottomRightCorner(N, N);
    c.heads.push_back(hc);
    c.KQ.push_back(std::move(KQ));
    c.OV.push_back(std::move(OV));
  }
  return c;
}

double diagonality_score(const MatrixXd& M) {
  require(M.rows() >= 1 && M.rows() == M.cols(), ErrorKind::dimension, "diagonality needs a square matrix");
  const double f = M.norm();
  if (f == 0.0) return 1.0;
  return M.diagonal().norm() / f;
}

SimplifiedParams simplified_view(const CircuitView& c) {
  const int H = static_cast<int>(c.heads.size());
  SimplifiedParams s;
  s.omega.resize(H);
  s.mu.resize(H);
  for (int h = 0; h < H; ++h) {
    s.omega[h] = c.heads[h].KQ11.diagonal().mean();
    s.mu[h] = c.heads[h].OV22(0, 0);
  }
  return s;
}

HeadClasses classify_heads(const VectorXd& omega, const VectorXd& mu, double tol_dummy, double tol_sign,
                           double tol_dummy_mu) {
  require(omega.size() == mu.size() && omega.size() >= 1, ErrorKind::dimension, "omega/mu length mismatch");
  const int H = static_cast<int>(omega.size());
  if (tol_dummy < 0.0) {
    std::vector<double> nz;
    for (int h = 0; h < H; ++h)
      if (omega[h] != 0.0) nz.push_back(std::abs(omega[h]));
    double med = 0.0;
    if (!nz.empty()) {
      std::sort(nz.begin(), nz.end());
      const size_t m = nz.size();
      med = m % 2 ? nz[m / 2] : 0.5 * (nz[m / 2 - 1] + nz[m / 2]);
    }
    tol_dummy = std::max(0.1 * med, 1e-3);
  }
  const double mu_scale = mu.cwiseAbs().maxCoeff();
  HeadClasses c;
  for (int h = 0; h < H; ++h) {
    const double rel_mu = mu_scale > 0.0 ? std::abs(mu[h]) / mu_scale : 0.0;
    if (std::abs(omega[h]) < tol_dummy && rel_mu < tol_dummy_mu) {
      c.dummy.push_back(h);
    } else if (omega[h] * mu[h] < 0.0 && rel_mu > tol_sign) {
      c.mismatch.push_back(h);
    } else if (omega[h] > 0.0) {
      c.positive.push_back(h);
    } else if (omega[h] < 0.0) {
      c.negative.push_back(h);
    } else {
      c.dummy.push_back(h);
    }
  }
  return c;
}

PatternMetrics pattern_metrics(const VectorXd& omega, const VectorXd& mu, const HeadClasses& c) {
  require(!(c.positive.empty() && c.negative.empty()), ErrorKind::domain, "all heads are dummy; ratios undefined");
  PatternMetrics m;
  const double l1 = mu.lpNorm<1>();
  m.zero_sum_residual = l1 > 0.0 ? std::abs(mu.sum()) / l1 : 0.0;
  double wmax = 0.0, wmin = std::numeric_limits<double>::infinity();
  double sp = 0.0, sn = 0.0;
  for (int h : c.positive) {
    wmax = std::max(wmax, std::abs(omega[h]));
    wmin = std::min(wmin, std::abs(omega[h]));
    sp += mu[h];
  }
  for (int h : c.negative) {
    wmax = std::max(wmax, std::abs(omega[h]));
    wmin = std::min(wmin, std::abs(omega[h]));
    sn += mu[h];
  }
  m.homogeneity_ratio = wmax / wmin;
  m.balance_residual = sp != 0.0 ? std::abs(sp + sn) / sp : std::numeric_limits<double>::infinity();
  return m;
}

ManifoldFit manifold_fit(const VectorXd& omega, const VectorXd& mu, const HeadClasses& c, const ApproxLossParams& P) {
  require(!c.positive.empty() && !c.negative.empty(), ErrorKind::manifold,
          "manifold fit needs at least one positive and one negative head");
  const int H = static_cast<int>(omega.size());
  ManifoldFit f;
  double g = 0.0;
  for (int h : c.positive) g += std::abs(omega[h]);
  for (int h : c.negative) g += std::abs(omega[h]);
  f.gamma_hat = g / static_cast<double>(c.positive.size() + c.negative.size());
  const double mg = mu_gamma(f.gamma_hat, P);
  f.omega_proj = VectorXd::Zero(H);
  f.mu_proj = VectorXd::Zero(H);
  // orthogonal projection of each group onto its sum constraint
  auto project = [&](const std::vector<int>& grp, double sign) {
    double s = 0.0;
    for (int h : grp) s += mu[h];
    const double shift = (sign * mg - s) / static_cast<double>(grp.size());
    for (int h : grp) {
      f.omega_proj[h] = sign * f.gamma_hat;
      f.mu_proj[h] = mu[h] + shift;
    }
  };
  project(c.positive, 1.0);
  project(c.negative, -1.0);
  // heads outside both groups (dummy or mismatched) sit at zero on the manifold
  f.distance = std::sqrt((omega - f.omega_proj).squaredNorm() + (mu - f.mu_proj).squaredNorm());
  return f;
}

PatternReport pattern_report(const FullAttentionParams& p, const ApproxLossParams& P) {
  const CircuitView c = extract_circuits(p);
  PatternReport r;
  r.hat = simplified_view(c);
  for (const auto& hc : c.heads) {
    r.diag_score.push_back(diagonality_score(hc.KQ11));
    r.kq21_norm.push_back(hc.KQ21.norm());
    r.ov21_norm.push_back(hc.OV21.norm());
    const VectorXd dg = hc.KQ11.diagonal();
    r.diag_variance.push_back((dg.array() - dg.mean()).square().mean());
  }
  for (int h = 0; h < r.hat.H(); ++h) r.sign_match.push_back(r.hat.omega[h] * r.hat.mu[h] > 0.0);
  r.classes = classify_heads(r.hat.omega, r.hat.mu);
  if (!r.classes.positive.empty() || !r.classes.negative.empty())
    r.metrics = pattern_metrics(r.hat.omega, r.hat.mu, r.classes);
  try {
    r.fit = manifold_fit(r.hat.omega, r.hat.mu, r.classes, P);
    r.fit_ok = true;
  } catch (const Error& e) {
    r.fit_error = e.what();
  }
  return r;
}

std::vector<FeatureAtom> feature_atoms(const TaskSpec& spec, int d) {
  spec.validate(d);
  require(spec.N <= 30, ErrorKind::unsupported, "too many tasks for atom masks");
  std::vector<unsigned> mask(d, 0u);
  for (int n = 0; n < spec.N; ++n)
    for (int i : spec.supports[n]) mask[i - 1] |= 1u << n;
  std::vector<FeatureAtom> atoms;
  for (int i = 0; i < d; ++i) {
    if (mask[i] == 0u) continue;
    auto it = std::find_if(atoms.begin(), atoms.end(), [&](const FeatureAtom& a) { return a.mask == mask[i]; });
    if (it == atoms.end()) {
      atoms.push_back({"", {}, mask[i]});
      it = atoms.end() - 1;
    }
    it->features.push_back(i + 1);
  }
  const unsigned all = spec.N >= 32 ? ~0u : (1u << spec.N) - 1u;
  for (auto& a : atoms) {
    if (a.mask == all && spec.N > 1) {
      a.name = "S*";
    } else if (spec.N == 2) {
      a.name = a.mask == 1u ? "S1c" : "S2c";
    } else {
      a.name = "A";
      for (int n = 0; n < spec.N; ++n)
        if (a.mask & (1u << n)) a.name += std::to_string(n + 1);
    }
  }
  return atoms;
}

Superposition superposition_check(const MultiTaskParams& p, const TaskSpec& spec, double tol_var) {
  p.validate();
  const int d = static_cast<int>(p.omega.cols());
  require(p.N() == spec.N, ErrorKind::dimension, "task count mismatch");
  Superposition s;
  s.atoms = feature_atoms(spec, d);
  const int A = static_cast<int>(s.atoms.size());
  s.sums = MatrixXd::Zero(spec.N, A);
  s.ov_sums = p.mu.colwise().sum().transpose();
  for (int a = 0; a < A; ++a) {
    bool flag = false;
    for (int h = 0; h < p.H(); ++h) {
      double m = 0.0, q = 0.0;
      for (int i : s.atoms[a].features) m += p.omega(h, i - 1);
      m /= static_cast<double>(s.atoms[a].features.size());
      for (int i : s.atoms[a].features) q += (p.omega(h, i - 1) - m) * (p.omega(h, i - 1) - m);
      if (q / static_cast<double>(s.atoms[a].features.size()) > tol_var) flag = true;
      for (int n = 0; n < spec.N; ++n) s.sums(n, a) += p.mu(h, n) * m;
    }
    if (flag) s.flagged.push_back(s.atoms[a].name);
  }
  return s;
}

MultiTaskParams multitask_view(const CircuitView& c) {
  const int H = static_cast<int>(c.heads.size());
  MultiTaskParams m;
  m.omega.resize(H, c.d);
  m.mu.resize(H, c.N);
  for (int h = 0; h < H; ++h) {
    m.omega.row(h) = c.heads[h].KQ11.diagonal().transpose();
    m.mu.row(h) = c.heads[h].OV22.diagonal().transpose();
  }
  return m;
}

TaskGrouping task_grouping(const std::vector<MatrixXd>& ov22, const MatrixXd& omega, const TaskSpec& spec,
                           double dummy_tol) {
  const int H = static_cast<int>(ov22.size()), d = static_cast<int>(omega.cols());
  require(omega.rows() == H, ErrorKind::dimension, "omega rows must match head count");
  spec.validate(d);
  double scale = 0.0;
  for (const auto& m : ov22) {
    require(m.rows() == spec.N && m.cols() == spec.N, ErrorKind::dimension, "OV22 must be N x N");
    scale = std::max(scale, m.diagonal().cwiseAbs().maxCoeff());
  }
  TaskGrouping g;
  g.groups.resize(spec.N);
  for (int h = 0; h < H; ++h) {
    HeadTask t;
    Eigen::Index n = 0;
    const double top = ov22[h].diagonal().cwiseAbs().maxCoeff(&n);
    if (scale > 0.0 && top >= dummy_tol * scale) {
      t.task = static_cast<int>(n);
      double other = 0.0;
      for (int i = 0; i < spec.N; ++i)
        for (int j = 0; j < spec.N; ++j)
          if (i != n || j != n) other = std::max(other, std::abs(ov22[h](i, j)));
      t.leakage = other / top;
      g.max_leakage = std::max(g.max_leakage, t.leakage);
      g.groups[n].heads.push_back(h);
    }
    g.heads.push_back(t);
  }
  g.every_task_covered = true;
  for (int n = 0; n < spec.N; ++n) {
    TaskGroup& grp = g.groups[n];
    if (grp.heads.empty()) {
      g.every_task_covered = false;
      continue;
    }
    std::vector<bool> on(d, false);
    for (int i : spec.supports[n]) on[i - 1] = true;
    double sum = 0.0;
    int cnt = 0;
    for (int h : grp.heads)
      for (int i = 0; i < d; ++i) {
        if (on[i]) {
          sum += std::abs(omega(h, i));
          ++cnt;
        } else {
          grp.off_support_max = std::max(grp.off_support_max, std::abs(omega(h, i)));
        }
      }
    grp.on_support_mean = sum / cnt;
  }
  return g;
}

TaskGrouping task_grouping(const CircuitView& c, const TaskSpec& spec, double dummy_tol) {
  std::vector<MatrixXd> ov22;
  for (const auto& h : c.heads) ov22.push_back(h.OV22);
  return task_grouping(ov22, multitask_view(c).omega, spec, dummy_tol);
}

TaskGrouping task_grouping(const MultiTaskParams& p, const TaskSpec& spec, double dummy_tol) {
  require(p.omega.cols() > 1, ErrorKind::dimension, "task grouping needs per-feature omega");
  std::vector<MatrixXd> ov22;
  for (int h = 0; h < p.H(); ++h) ov22.push_back(p.mu.row(h).transpose().asDiagonal());
  return task_grouping(ov22, p.omega, spec, dummy_tol);
}

}  // namespace iclab
