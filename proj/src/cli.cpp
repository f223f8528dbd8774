#include "iclab/cli.hpp"

#include "iclab/approxloss.hpp"
#include "iclab/estimators.hpp"
#include "iclab/gradflow.hpp"
#include "iclab/patterns.hpp"
#include "iclab/risk.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#ifndef ICLAB_VERSION
#define ICLAB_VERSION "unknown"
#endif

namespace iclab {

namespace fs = std::filesystem;

std::string version_string() { return ICLAB_VERSION; }

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"train",    "risk-sweep", "gradflow",   "approx-validate",
                                             "patterns", "multitask",  "stein-check"};
  return s;
}

json resolve_config(const std::string& sub, const CliOverrides& o) {
  json cfg = default_config(sub);
  if (o.config_path) {
    json user;
    try {
      user = json::parse(read_file(*o.config_path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::schema, *o.config_path + ": " + e.what());
    }
    cfg = merge_config(cfg, user);
  }
  for (const auto& s : o.sets) apply_override(cfg, s);
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.out) cfg["out"] = *o.out;
  if (o.threads) {
    require(*o.threads >= 1, ErrorKind::argument, "--threads must be positive");
    cfg["threads"] = *o.threads;
  }
  if (o.deterministic) cfg["deterministic"] = true;
  return cfg;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::schema:
    case ErrorKind::argument:
    case ErrorKind::parameter: return 2;
    case ErrorKind::numeric:
    case ErrorKind::instability: return 3;
    case ErrorKind::io:
    case ErrorKind::version:
    case ErrorKind::mode_mismatch: return 4;
    default: return 1;
  }
}

namespace {

void milestone(const std::string& sub, const std::string& msg) { std::cerr << "[" << sub << "] " << msg << "\n"; }

std::string path_in(const json& cfg, const std::string& name) { return (fs::path(cfg.at("out").get<std::string>()) / name).string(); }

bool emits(const json& cfg, const std::string& fmt) {
  for (const auto& e : cfg.at("emit"))
    if (e.get<std::string>() == fmt) return true;
  return false;
}

void write_json(const std::string& path, const json& j) {
  require_finite_json(j, path);
  atomic_write(path, j.dump(2) + "\n");
}

void write_manifest(const std::string& sub, const json& cfg) {
  write_json(path_in(cfg, "manifest.json"),
             {{"subcommand", sub}, {"config", cfg}, {"version", version_string()}, {"seed", cfg.at("seed")}});
}

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }
int threads_of(const json& cfg) { return cfg.at("threads").get<int>(); }

FullAttentionParams as_full(const ModelParams& p, int d) {
  return p.mode == Parametrization::simplified ? FullAttentionParams::from_multitask(p.simple, d) : p.full;
}

json heads_json(const std::vector<HeadStats>& hs) {
  json a = json::array();
  for (const auto& h : hs)
    a.push_back({{"omega", h.omega},
                 {"mu", h.mu},
                 {"diag_score", h.diag_score},
                 {"kq21_norm", h.kq21_norm},
                 {"ov21_norm", h.ov21_norm}});
  return a;
}

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_rows(const MatrixXd& m) {
  json r = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) r.push_back(vec_json(m.row(i).transpose()));
  return r;
}

json pattern_json(const PatternReport& r) {
  json j = {{"omega_hat", vec_json(r.hat.omega)},
            {"mu_hat", vec_json(r.hat.mu)},
            {"diag_score", r.diag_score},
            {"kq21_norm", r.kq21_norm},
            {"ov21_norm", r.ov21_norm},
            {"diag_variance", r.diag_variance},
            {"positive", r.classes.positive},
            {"negative", r.classes.negative},
            {"dummy", r.classes.dummy},
            {"mismatch", r.classes.mismatch},
            {"zero_sum_residual", r.metrics.zero_sum_residual},
            {"homogeneity_ratio", r.metrics.homogeneity_ratio},
            {"fit_ok", r.fit_ok}};
  std::vector<bool> sm = r.sign_match;
  j["sign_match"] = sm;
  if (std::isfinite(r.metrics.balance_residual)) j["balance_residual"] = r.metrics.balance_residual;
  if (r.fit_ok) {
    j["gamma_hat"] = r.fit.gamma_hat;
    j["manifold_distance"] = r.fit.distance;
  } else {
    j["fit_error"] = r.fit_error;
  }
  return j;
}

json grouping_json(const TaskGrouping& g) {
  json heads = json::array();
  for (const auto& h : g.heads) heads.push_back({{"task", h.task < 0 ? json(nullptr) : json(h.task + 1)}, {"leakage", h.leakage}});
  json groups = json::array();
  for (const auto& grp : g.groups) {
    std::vector<int> hs;
    for (int h : grp.heads) hs.push_back(h + 1);
    groups.push_back({{"heads", hs},
                      {"on_support_mean", grp.on_support_mean},
                      {"off_support_max", grp.off_support_max},
                      {"off_ratio", grp.off_ratio()}});
  }
  return {{"heads", heads}, {"groups", groups}, {"max_leakage", g.max_leakage}, {"every_task_covered", g.every_task_covered}};
}

json superposition_json(const Superposition& s) {
  json atoms = json::array();
  for (size_t a = 0; a < s.atoms.size(); ++a)
    atoms.push_back({{"name", s.atoms[a].name}, {"features", s.atoms[a].features}, {"sums", vec_json(s.sums.col(a))}});
  return {{"atoms", atoms}, {"ov_sums", vec_json(s.ov_sums)}, {"flagged", s.flagged}};
}

// Runs training with optional periodic checkpoints. Segmented runs produce the same trace as one call.
TrainingTrace run_training(const std::string& sub, const TrainConfig& tc, const json& cfg, const TrainState* start) {
  const long every = cfg.at("checkpoint_every").get<long>();
  const std::string ck = path_in(cfg, "checkpoint.ckpt");
  auto save = [&](const TrainState& st) {
    Checkpoint c;
    c.meta.mode = tc.param;
    c.meta.d = tc.d;
    c.meta.L = tc.L;
    c.meta.H = tc.H;
    c.meta.N = tc.N();
    c.meta.step = st.step;
    c.meta.seed = tc.seed;
    c.meta.config = train_config_to_json(tc);
    c.state = st;
    save_checkpoint(c, ck);
  };
  TrainingTrace all;
  TrainState st;
  const TrainState* cur = start;
  long s0 = start ? start->step : 0;
  if (every <= 0) {
    all = train(tc, start);
  } else {
    while (true) {
      const long stop = std::min(tc.steps, (s0 / every + 1) * every);
      TrainingTrace seg = train(tc, cur, stop);
      if (stop < tc.steps) seg.rows.pop_back();  // the next segment logs this step itself when due
      all.rows.insert(all.rows.end(), seg.rows.begin(), seg.rows.end());
      st = seg.final_state;
      cur = &st;
      s0 = stop;
      save(st);
      milestone(sub, "checkpoint at step " + std::to_string(stop));
      if (stop >= tc.steps) break;
    }
    all.final_state = st;
  }
  save(all.final_state);
  return all;
}

json cmd_train(const std::string& sub, const json& cfg) {
  const TrainConfig tc = train_config_from_json(cfg);
  std::optional<TrainState> start;
  const std::string resume = cfg.at("resume").get<std::string>();
  if (!resume.empty()) {
    start = load_state_for(tc, resume);
    milestone(sub, "resuming from step " + std::to_string(start->step));
  }
  milestone(sub, "training " + std::to_string(tc.steps) + " steps, " + to_string(tc.param) + " parametrization");
  const TrainingTrace tr = run_training(sub, tc, cfg, start ? &*start : nullptr);
  if (emits(cfg, "csv")) write_trace(tr, path_in(cfg, "trace.csv"));
  const ModelParams& p = tr.final_state.params;
  const TraceRow& last = tr.rows.back();
  json summary = {{"final_step", last.step},
                  {"final_minibatch_loss", last.minibatch_loss},
                  {"final_eval_loss", last.eval_loss},
                  {"heads", heads_json(last.heads)}};
  if (emits(cfg, "json")) {
    write_json(path_in(cfg, "heatmap.json"), heatmap_json(p, tc.d));
    if (tc.N() == 1) {
      const ApproxLossParams P{tc.d, tc.L, tc.sigma2, true};
      summary["patterns"] = pattern_json(pattern_report(as_full(p, tc.d), P));
    }
  }
  return summary;
}

json cmd_multitask(const std::string& sub, const json& cfg) {
  json summary;
  const TrainConfig tc = train_config_from_json(cfg);
  require(tc.model.kind == ModelKind::multitask, ErrorKind::schema, "model.kind: multitask subcommand needs multitask");
  if (cfg.at("train").get<bool>()) {
    summary = cmd_train(sub, cfg);
    const Checkpoint c = load_checkpoint(path_in(cfg, "checkpoint.ckpt"));
    const ModelParams& p = c.state.params;
    const CircuitView cv = extract_circuits(as_full(p, tc.d));
    const MultiTaskParams view = multitask_view(cv);
    summary["grouping"] = grouping_json(task_grouping(cv, tc.model.tasks));
    summary["superposition"] = superposition_json(superposition_check(view, tc.model.tasks));
    summary["omega"] = matrix_rows(view.omega);
    summary["mu"] = matrix_rows(view.mu);
  }
  const json& t = cfg.at("table");
  if (!t.at("omega").empty()) {
    MultiTaskParams p;
    const auto om = t.at("omega").get<std::vector<std::vector<double>>>();
    const auto mu = t.at("mu").get<std::vector<std::vector<double>>>();
    require(om.size() == mu.size() && !om.empty(), ErrorKind::schema, "table: omega and mu need one row per head");
    p.omega.resize(static_cast<long>(om.size()), static_cast<long>(om[0].size()));
    p.mu.resize(static_cast<long>(mu.size()), static_cast<long>(mu[0].size()));
    for (size_t h = 0; h < om.size(); ++h) {
      require(om[h].size() == om[0].size() && mu[h].size() == mu[0].size(), ErrorKind::schema, "table: ragged rows");
      for (size_t i = 0; i < om[h].size(); ++i) p.omega(static_cast<long>(h), static_cast<long>(i)) = om[h][i];
      for (size_t n = 0; n < mu[h].size(); ++n) p.mu(static_cast<long>(h), static_cast<long>(n)) = mu[h][n];
    }
    summary["table_superposition"] = superposition_json(superposition_check(p, tc.model.tasks));
    milestone(sub, "checked stored parameter table");
  }
  write_json(path_in(cfg, "multitask.json"), summary);
  return summary;
}

json cmd_risk_sweep(const std::string& sub, const json& cfg) {
  const int d = cfg.at("d").get<int>(), L = cfg.at("L").get<int>();
  const double s2 = cfg.at("sigma2").get<double>();
  const CovSpec cov = cov_from_json(cfg.at("cov"));
  const long n = cfg.at("n").get<long>();
  std::vector<int> lengths = cfg.at("lengths").get<std::vector<int>>();
  if (lengths.empty()) lengths = {L};
  const int Lmax = *std::max_element(lengths.begin(), lengths.end());
  double eta = cfg.at("eta").get<double>();
  double lam = cfg.at("lambda").get<double>();
  if (lam < 0.0) lam = d * s2;

  std::vector<std::string> names;
  std::vector<std::function<double(const EmbeddedSequence&)>> fs;
  const ApproxLossParams P{d, L, s2, true};
  for (const auto& e : cfg.at("estimators")) {
    const std::string name = e.get<std::string>();
    if (name == "vanilla_gd") {
      const double h = eta > 0.0 ? eta : vgd_optimal_eta(d, L, s2);
      fs.push_back([h](const EmbeddedSequence& s) { return vanilla_gd(s, h); });
    } else if (name == "debiased_gd") {
      const double h = eta > 0.0 ? eta : optimal_eta_star(P);
      fs.push_back([h](const EmbeddedSequence& s) { return debiased_gd(s, h); });
    } else if (name == "ridge") {
      fs.push_back([lam](const EmbeddedSequence& s) { return ridge(s, lam); });
    } else if (name == "kernel") {
      const double w = kernel_omega_star(d), m = kernel_mu_star(d, L, s2);
      fs.push_back([w, m](const EmbeddedSequence& s) { return kernel_regressor(s, w, m); });
    } else if (name == "preconditioned_gamma_star") {
      const auto pc = std::make_shared<Preconditioner>(gamma_star(cov, d, L, s2));
      fs.push_back([pc](const EmbeddedSequence& s) { return preconditioned_gd(s, *pc); });
    } else if (name == "preconditioned_sigma") {
      const auto pc = std::make_shared<Preconditioner>(cov.matrix(d));
      fs.push_back([pc](const EmbeddedSequence& s) { return preconditioned_gd(s, *pc); });
    } else {
      throw Error(ErrorKind::schema, "estimators: unknown estimator '" + name + "'");
    }
    names.push_back(name);
  }
  const std::string ckpt = cfg.at("checkpoint").get<std::string>();
  if (!ckpt.empty()) {
    const auto c = std::make_shared<Checkpoint>(load_checkpoint(ckpt));
    require(c->meta.N == 1 && c->meta.d == d, ErrorKind::dimension, "checkpoint must be single-task with matching d");
    const json& m = cfg.at("model");
    const std::string kind = m.at("kind").get<std::string>();
    Readout r = Readout::softmax();
    if (kind == "linear") {
      const int ln = m.at("L_norm").get<int>();
      r = Readout::linear(ln > 0 ? ln : c->meta.L);
    } else if (kind == "activation") {
      r = Readout::activation(Activation::parse(m.at("activation").get<std::string>(), m.at("C").get<double>()));
    } else if (kind != "softmax") {
      throw Error(ErrorKind::schema, "model.kind: expected softmax, linear or activation");
    }
    fs.push_back([c, r](const EmbeddedSequence& s) { return predict(c->state.params, s, r); });
    names.push_back("model");
  }
  require(!fs.empty(), ErrorKind::schema, "estimators: nothing to evaluate");
  const int E = static_cast<int>(fs.size()), K = static_cast<int>(lengths.size());
  milestone(sub, std::to_string(E) + " predictors x " + std::to_string(K) + " lengths, n = " + std::to_string(n));
  const CovSampler cs(cov, d);
  const Rng root(seed_of(cfg));
  const PairedRisk pr = accumulate_paired(E * K, n, threads_of(cfg), [&](long i, double* out) {
    Rng rng = root.stream(static_cast<std::uint64_t>(i));
    const EmbeddedSequence full = draw_instance(rng, d, Lmax, s2, cs);
    for (int k = 0; k < K; ++k) {
      const EmbeddedSequence s = lengths[k] == Lmax ? full : truncate(full, lengths[k]);
      for (int e = 0; e < E; ++e) {
        const double r = s.yq - fs[e](s);
        out[k * E + e] = r * r;
      }
    }
  });
  std::string csv = "estimator,L,risk,std_error,closed_form\n";
  json rows = json::array();
  for (int k = 0; k < K; ++k)
    for (int e = 0; e < E; ++e) {
      const RiskEstimate& r = pr.risks[k * E + e];
      std::string closed;
      if (names[e] == "vanilla_gd" && cov.kind == CovSpec::Kind::isotropic)
        closed = fmt17(vgd_risk_closed(eta > 0.0 ? eta : vgd_optimal_eta(d, L, s2), d, lengths[k], s2));
      csv += names[e] + "," + std::to_string(lengths[k]) + "," + fmt17(r.mean) + "," + fmt17(r.std_error) + "," +
             closed + "\n";
      rows.push_back({{"estimator", names[e]}, {"L", lengths[k]}, {"risk", r.mean}, {"std_error", r.std_error}});
    }
  atomic_write(path_in(cfg, "risk.csv"), csv);

  const auto xis = cfg.at("asymptotic").at("xi").get<std::vector<double>>();
  const auto s2s = cfg.at("asymptotic").at("sigma2").get<std::vector<double>>();
  if (!xis.empty() && !s2s.empty()) {
    std::string a = "xi,sigma2,gd_risk,bayes_risk,ratio,bound,holds\n";
    for (double xi : xis)
      for (double v : s2s) {
        const BayesRatio b = bayes_ratio_bound(xi, v);
        a += fmt17(xi) + "," + fmt17(v) + "," + fmt17(gd_risk_asymptotic(xi, v)) + "," +
             fmt17(bayes_risk_asymptotic(xi, v)) + "," + fmt17(b.ratio) + "," + fmt17(b.bound) + "," +
             (b.holds ? "1" : "0") + "\n";
      }
    atomic_write(path_in(cfg, "asymptotic.csv"), a);
  }
  return {{"risks", rows}};
}

json cmd_gradflow(const std::string& sub, const json& cfg) {
  FlowConfig f;
  f.alpha = cfg.at("alpha").get<double>();
  f.d = cfg.at("d").get<int>();
  f.L = cfg.at("L").get<int>();
  f.sigma2 = cfg.at("sigma2").get<double>();
  f.t_end = cfg.at("t_end").get<double>();
  f.dt = cfg.at("dt").get<double>();
  f.sample_every = cfg.at("sample_every").get<int>();
  milestone(sub, "integrating to t = " + fmt17(f.t_end));
  const PhaseReport r = integrate(f);
  std::string csv = "t,phi,rho,two_phi_rho,approx_loss\n";
  for (size_t i = 0; i < r.trajectory.size(); ++i) {
    const FlowState& s = r.trajectory[i];
    csv += fmt17(s.t) + "," + fmt17(s.phi) + "," + fmt17(s.rho) + "," + fmt17(2.0 * s.phi * s.rho) + "," +
           fmt17(r.loss[i]) + "\n";
  }
  atomic_write(path_in(cfg, "trajectory.csv"), csv);
  const ApproxLossParams P{f.d, f.L, f.sigma2, true};
  const EarlyPhaseDiagnostics e = early_phase_checks(r, f.d, P.lambda());
  json j = {{"tau1", r.tau1},
            {"tau2", r.tau2},
            {"rho_peak", r.rho_peak},
            {"t_peak", r.t_peak},
            {"limit_product", r.limit_product},
            {"limit_target", optimal_eta_star(P)},
            {"limit_product_rate", r.limit_product_rate},
            {"rho_local_maxima", r.rho_local_maxima},
            {"max_loss_increase", r.max_loss_increase},
            {"early_slope", e.slope},
            {"early_window_points", e.window_points},
            {"early_ratio_in_band", e.ratio_in_band}};
  write_json(path_in(cfg, "gradflow.json"), j);
  return j;
}

json cmd_approx_validate(const std::string& sub, const json& cfg) {
  const int d = cfg.at("d").get<int>(), L = cfg.at("L").get<int>();
  const double s2 = cfg.at("sigma2").get<double>();
  const long n = cfg.at("n").get<long>();
  const auto ws = cfg.at("omega").get<std::vector<double>>();
  const auto ms = cfg.at("mu").get<std::vector<double>>();
  const ApproxLossParams P{d, L, s2, true};
  std::vector<SimplifiedParams> pts;
  for (double w : ws)
    for (double m : ms) {
      SimplifiedParams p;
      p.omega = VectorXd(2);
      p.omega << w, -w;
      p.mu = VectorXd(2);
      p.mu << m, -m;
      pts.push_back(p);
    }
  milestone(sub, std::to_string(pts.size()) + " grid points, n = " + std::to_string(n));
  std::vector<Predictor> fs;
  for (const auto& p : pts) fs.push_back([p](const EmbeddedSequence& s) { return predict_simplified(p, s); });
  McSetup mc{d, L, s2, CovSpec::isotropic(), n, seed_of(cfg), threads_of(cfg)};
  const PairedRisk pr = paired_risks(fs, mc);
  std::string csv = "omega,mu,mc_loss,mc_std_error,approx_loss,difference\n";
  double worst = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double a = approx_loss(pts[i].omega, pts[i].mu, P);
    worst = std::max(worst, std::abs(pr.risks[i].mean - a));
    csv += fmt17(pts[i].omega[0]) + "," + fmt17(pts[i].mu[0]) + "," + fmt17(pr.risks[i].mean) + "," +
           fmt17(pr.risks[i].std_error) + "," + fmt17(a) + "," + fmt17(pr.risks[i].mean - a) + "\n";
  }
  atomic_write(path_in(cfg, "approx.csv"), csv);
  return {{"points", pts.size()}, {"max_abs_difference", worst}};
}

json cmd_patterns(const std::string& sub, const json& cfg) {
  const std::string path = cfg.at("checkpoint").get<std::string>();
  require(!path.empty(), ErrorKind::schema, "checkpoint: required");
  const Checkpoint c = load_checkpoint(path);
  int L = cfg.at("L").get<int>();
  double s2 = cfg.at("sigma2").get<double>();
  if (c.meta.config.is_object()) {
    L = c.meta.config.value("L", L);
    s2 = c.meta.config.value("sigma2", s2);
  }
  milestone(sub, "analysing " + path + " at step " + std::to_string(c.meta.step));
  const FullAttentionParams full = as_full(c.state.params, c.meta.d);
  write_json(path_in(cfg, "heatmap.json"), heatmap_json(c.state.params, c.meta.d));
  json j;
  if (c.meta.N == 1) {
    j = pattern_json(pattern_report(full, ApproxLossParams{c.meta.d, L, s2, true}));
  } else {
    const CircuitView cv = extract_circuits(full);
    const MultiTaskParams view = multitask_view(cv);
    j["omega"] = matrix_rows(view.omega);
    j["mu"] = matrix_rows(view.mu);
    if (c.meta.config.is_object() && c.meta.config.contains("model")) {
      const TaskSpec spec = tasks_from_json(c.meta.config["model"]["supports"]);
      j["grouping"] = grouping_json(task_grouping(cv, spec));
      j["superposition"] = superposition_json(superposition_check(view, spec));
    }
  }
  write_json(path_in(cfg, "patterns.json"), j);
  return j;
}

json cmd_stein(const std::string& sub, const json& cfg) {
  const int d = cfg.at("d").get<int>(), L = cfg.at("L").get<int>();
  const long n = cfg.at("n").get<long>();
  struct Triple {
    double w, wt;
    VectorXd v;
  };
  std::vector<Triple> ts;
  for (const auto& t : cfg.at("triples")) {
    const auto v = t.at("v").get<std::vector<double>>();
    ts.push_back({t.at("omega").get<double>(), t.at("omega_t").get<double>(),
                  Eigen::Map<const VectorXd>(v.data(), static_cast<long>(v.size()))});
  }
  const Rng root(seed_of(cfg));
  for (int i = 0; i < cfg.at("random").get<int>(); ++i) {
    Rng r = root.stream(1u << 20 | static_cast<unsigned>(i));
    Triple t{r.uniform(-2.0, 2.0), r.uniform(-2.0, 2.0), VectorXd(d)};
    for (int j = 0; j < d; ++j) t.v[j] = r.normal() / std::sqrt(static_cast<double>(d));
    ts.push_back(t);
  }
  milestone(sub, std::to_string(ts.size()) + " triples, n = " + std::to_string(n));
  std::string csv = "omega,omega_t,left,right,residual,std_error,z\n";
  json rows = json::array();
  for (size_t i = 0; i < ts.size(); ++i) {
    const SteinResult r = stein_identity_check(ts[i].w, ts[i].wt, ts[i].v, L, d, n, seed_of(cfg) + i, threads_of(cfg));
    const double z = r.std_error > 0.0 ? r.residual / r.std_error : 0.0;
    csv += fmt17(ts[i].w) + "," + fmt17(ts[i].wt) + "," + fmt17(r.left) + "," + fmt17(r.right) + "," +
           fmt17(r.residual) + "," + fmt17(r.std_error) + "," + fmt17(z) + "\n";
    rows.push_back({{"omega", ts[i].w}, {"omega_t", ts[i].wt}, {"residual", r.residual}, {"z", z}});
  }
  atomic_write(path_in(cfg, "stein.csv"), csv);
  return {{"triples", rows}};
}

}  // namespace

json run_subcommand(const std::string& sub, const json& cfg) {
  json out;
  if (sub == "train")
    out = cmd_train(sub, cfg);
  else if (sub == "multitask")
    out = cmd_multitask(sub, cfg);
  else if (sub == "risk-sweep")
    out = cmd_risk_sweep(sub, cfg);
  else if (sub == "gradflow")
    out = cmd_gradflow(sub, cfg);
  else if (sub == "approx-validate")
    out = cmd_approx_validate(sub, cfg);
  else if (sub == "patterns")
    out = cmd_patterns(sub, cfg);
  else if (sub == "stein-check")
    out = cmd_stein(sub, cfg);
  else
    throw Error(ErrorKind::argument, "unknown subcommand '" + sub + "'");
  if (sub == "train") write_json(path_in(cfg, "summary.json"), out);
  write_manifest(sub, cfg);
  milestone(sub, "done; artifacts in " + cfg.at("out").get<std::string>());
  return out;
}

}  // namespace iclab
