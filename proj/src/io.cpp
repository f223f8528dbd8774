#include "iclab/io.hpp"

#include "iclab/patterns.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace iclab {

namespace fs = std::filesystem;

void atomic_write(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorKind::io, "cannot open " + tmp + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    require(static_cast<bool>(f), ErrorKind::io, "write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::io, "cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- traces ----

std::string trace_header(int H) {
  std::string h = "step,minibatch_loss,eval_loss";
  for (int k = 1; k <= H; ++k) {
    const std::string s = std::to_string(k);
    h += ",omega_" + s + ",mu_" + s + ",diag_score_" + s + ",kq21_norm_" + s + ",ov21_norm_" + s;
  }
  return h;
}

std::string trace_csv(const TrainingTrace& tr) {
  const int H = tr.rows.empty() ? 0 : static_cast<int>(tr.rows.front().heads.size());
  std::string out = trace_header(H) + "\n";
  for (const auto& r : tr.rows) {
    require(static_cast<int>(r.heads.size()) == H, ErrorKind::dimension, "trace rows disagree on head count");
    out += std::to_string(r.step) + "," + fmt17(r.minibatch_loss) + "," + fmt17(r.eval_loss);
    for (const auto& h : r.heads)
      out += "," + fmt17(h.omega) + "," + fmt17(h.mu) + "," + fmt17(h.diag_score) + "," + fmt17(h.kq21_norm) +
             "," + fmt17(h.ov21_norm);
    out += "\n";
  }
  return out;
}

void write_trace(const TrainingTrace& tr, const std::string& path) { atomic_write(path, trace_csv(tr)); }

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end && *end == '\0' && !s.empty(), ErrorKind::io, "bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io, "empty trace");
  const auto cols = split(line, ',');
  require(cols.size() >= 3 && (cols.size() - 3) % 5 == 0, ErrorKind::io, "malformed trace header");
  const int H = static_cast<int>((cols.size() - 3) / 5);
  require(line == trace_header(H), ErrorKind::io, "unexpected trace header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    require(f.size() == cols.size(), ErrorKind::io, "trace row has wrong field count");
    TraceRow r;
    r.step = std::stol(f[0]);
    r.minibatch_loss = to_double(f[1]);
    r.eval_loss = to_double(f[2]);
    for (int h = 0; h < H; ++h) {
      HeadStats s;
      s.omega = to_double(f[3 + 5 * h]);
      s.mu = to_double(f[4 + 5 * h]);
      s.diag_score = to_double(f[5 + 5 * h]);
      s.kq21_norm = to_double(f[6 + 5 * h]);
      s.ov21_norm = to_double(f[7 + 5 * h]);
      r.heads.push_back(s);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string Table::csv() const {
  std::string out;
  for (size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& r : rows) {
    require(r.size() == columns.size(), ErrorKind::dimension, "table row width mismatch");
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + fmt17(r[i]);
    out += "\n";
  }
  return out;
}

namespace {

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

json heatmap_json(const ModelParams& p, int d) {
  const FullAttentionParams full =
      p.mode == Parametrization::simplified ? FullAttentionParams::from_multitask(p.simple, d) : p.full;
  const CircuitView c = extract_circuits(full);
  json heads = json::array();
  for (size_t h = 0; h < c.heads.size(); ++h) {
    heads.push_back({{"head", h + 1},
                     {"KQ", matrix_json(c.KQ[h])},
                     {"OV", matrix_json(c.OV[h])},
                     {"KQ11", matrix_json(c.heads[h].KQ11)},
                     {"KQ21", matrix_json(c.heads[h].KQ21)},
                     {"OV21", matrix_json(c.heads[h].OV21)},
                     {"OV22", matrix_json(c.heads[h].OV22)}});
  }
  json j = {{"d", c.d}, {"N", c.N}, {"H", c.heads.size()}, {"mode", to_string(p.mode)}, {"heads", heads}};
  require_finite_json(j, "heatmap");
  return j;
}

void require_finite_json(const json& j, const std::string& where) {
  if (j.is_number_float()) {
    require(std::isfinite(j.get<double>()), ErrorKind::numeric, "non-finite value at " + (where.empty() ? "/" : where));
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) require_finite_json(it.value(), where + "/" + it.key());
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) require_finite_json(j[i], where + "/" + std::to_string(i));
  }
}

// ---- checkpoints ----

namespace {

void put_f64(std::string& out, double x) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  char b[8];
  std::memcpy(b, &u, 8);
  out.append(b, 8);
}

double get_f64(const char* p) {
  std::uint64_t u;
  std::memcpy(&u, p, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  return std::bit_cast<double>(u);
}

ModelParams shell_params(const CheckpointMeta& m, const json& arrays) {
  ModelParams p;
  p.mode = m.mode;
  if (m.mode == Parametrization::simplified) {
    require(arrays.size() >= 2, ErrorKind::schema, "simplified checkpoint needs omega and mu");
    p.simple.omega = MatrixXd::Zero(arrays[0].at("rows").get<int>(), arrays[0].at("cols").get<int>());
    p.simple.mu = MatrixXd::Zero(arrays[1].at("rows").get<int>(), arrays[1].at("cols").get<int>());
  } else {
    p.full = FullAttentionParams::zeros(m.mode, m.H, m.d, m.N);
  }
  return p;
}

}  // namespace

std::string checkpoint_bytes(const Checkpoint& c) {
  const ModelParams& p = c.state.params;
  require(p.mode == c.meta.mode, ErrorKind::mode_mismatch, "checkpoint meta and parameters disagree on mode");
  json arrays = json::array();
  std::string payload;
  auto add = [&](const std::string& name, const MatrixXd& m) {
    require(m.allFinite(), ErrorKind::numeric, "non-finite values in array " + name);
    arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(payload, m(i, j));
  };
  for (const auto& [name, m] : p.arrays()) add(name, *m);
  if (c.state.opt.m.size() > 0) {
    add("adam_m", c.state.opt.m);
    add("adam_v", c.state.opt.v);
  }
  json h = {{"schema_version", c.meta.schema},
            {"mode", to_string(c.meta.mode)},
            {"d", c.meta.d},
            {"L", c.meta.L},
            {"H", c.meta.H},
            {"N", c.meta.N},
            {"step", c.meta.step},
            {"seed", c.meta.seed},
            {"optimizer_t", c.state.opt.t},
            {"arrays", arrays},
            {"config", c.meta.config}};
  return std::string(kCheckpointMagic) + "\n" + h.dump() + "\n" + payload;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  const size_t a = bytes.find('\n');
  require(a != std::string::npos && bytes.compare(0, a, kCheckpointMagic) == 0, ErrorKind::io,
          "not a checkpoint file (bad magic)");
  const size_t b = bytes.find('\n', a + 1);
  require(b != std::string::npos, ErrorKind::io, "truncated checkpoint header");
  json h;
  try {
    h = json::parse(bytes.substr(a + 1, b - a - 1));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad checkpoint header: ") + e.what());
  }
  Checkpoint c;
  try {
    c.meta.schema = h.at("schema_version").get<int>();
    require(c.meta.schema == kCheckpointSchema, ErrorKind::version,
            "checkpoint schema " + std::to_string(c.meta.schema) + " is not supported (expected " +
                std::to_string(kCheckpointSchema) + ")");
    c.meta.mode = parse_parametrization(h.at("mode").get<std::string>());
    c.meta.d = h.at("d").get<int>();
    c.meta.L = h.at("L").get<int>();
    c.meta.H = h.at("H").get<int>();
    c.meta.N = h.at("N").get<int>();
    c.meta.step = h.at("step").get<long>();
    c.meta.seed = h.at("seed").get<std::uint64_t>();
    c.meta.config = h.at("config");
    c.state.step = c.meta.step;
    c.state.opt.t = h.at("optimizer_t").get<long>();
    const json& arrays = h.at("arrays");
    c.state.params = shell_params(c.meta, arrays);
    auto slots = c.state.params.arrays();
    const long P = c.state.params.size();
    const char* ptr = bytes.data() + b + 1;
    const char* end = bytes.data() + bytes.size();
    size_t k = 0;
    for (const auto& e : arrays) {
      const std::string name = e.at("name").get<std::string>();
      const long r = e.at("rows").get<long>(), cl = e.at("cols").get<long>();
      MatrixXd* dst = nullptr;
      if (k < slots.size()) {
        require(slots[k].first == name, ErrorKind::schema, "unexpected array '" + name + "'");
        dst = slots[k].second;
      } else if (name == "adam_m") {
        c.state.opt.m = VectorXd::Zero(P);
      } else if (name == "adam_v") {
        c.state.opt.v = VectorXd::Zero(P);
      } else {
        throw Error(ErrorKind::schema, "unexpected array '" + name + "'");
      }
      MatrixXd tmp(r, cl);
      require(end - ptr >= static_cast<long>(8 * r * cl), ErrorKind::io, "truncated checkpoint payload");
      for (long i = 0; i < r; ++i)
        for (long j = 0; j < cl; ++j, ptr += 8) tmp(i, j) = get_f64(ptr);
      if (dst) {
        require(dst->rows() == r && dst->cols() == cl, ErrorKind::schema, "array '" + name + "' has wrong shape");
        *dst = tmp;
      } else {
        require(r == P && cl == 1, ErrorKind::schema, "optimizer array '" + name + "' has wrong shape");
        (name == "adam_m" ? c.state.opt.m : c.state.opt.v) = tmp;
      }
      ++k;
    }
    require(k >= slots.size(), ErrorKind::schema, "checkpoint is missing parameter arrays");
    require(ptr == end, ErrorKind::io, "trailing bytes after checkpoint payload");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string("bad checkpoint header: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) { atomic_write(path, checkpoint_bytes(c)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

TrainState load_state_for(const TrainConfig& cfg, const std::string& path) {
  Checkpoint c = load_checkpoint(path);
  require(c.meta.mode == cfg.param, ErrorKind::mode_mismatch,
          std::string("checkpoint holds ") + to_string(c.meta.mode) + " parameters but the trainer is " +
              to_string(cfg.param));
  require(c.meta.d == cfg.d && c.meta.H == cfg.H && c.meta.N == cfg.N(), ErrorKind::dimension,
          "checkpoint shape (d, H, N) differs from the config");
  return c.state;
}

// ---- configs ----

namespace {

json common_defaults() {
  return {{"seed", 0}, {"out", "out"}, {"threads", 1}, {"deterministic", true}, {"emit", {"csv", "json"}}};
}

json cov_defaults() { return {{"kind", "isotropic"}, {"rho", 0.5}, {"matrix", json::array()}}; }

json train_defaults() {
  return {{"d", 5},
          {"L", 40},
          {"H", 2},
          {"sigma2", 0.1},
          {"cov", cov_defaults()},
          {"steps", 1000},
          {"batch", 64},
          {"optimizer", {{"kind", "adam"}, {"lr", 1e-3}, {"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}}},
          {"init", {{"kind", "default_uniform"}, {"scale", 1.0}, {"alpha", 1e-3}}},
          {"parametrization", "factored"},
          {"log_every", 100},
          {"model",
           {{"kind", "softmax"},
            {"activation", "exp"},
            {"C", 1.0},
            {"L_norm", 0},
            {"signed_normalizer", false},
            {"supports", json::array()}}},
          {"eval_batch", 256},
          {"checkpoint_every", 0},
          {"resume", ""}};
}

}  // namespace

json default_config(const std::string& sub) {
  json j = common_defaults();
  auto add = [&](const json& extra) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  };
  if (sub == "train") {
    add(train_defaults());
  } else if (sub == "multitask") {
    json t = train_defaults();
    t["d"] = 6;
    t["H"] = 4;
    t["model"]["kind"] = "multitask";
    t["model"]["supports"] = {{1, 2, 3, 4}, {3, 4, 5, 6}};
    add(t);
    // optional stored (omega, mu) table to check instead of / in addition to training
    j["table"] = {{"omega", json::array()}, {"mu", json::array()}};
    j["train"] = true;
  } else if (sub == "risk-sweep") {
    add({{"d", 5},
         {"L", 40},
         {"sigma2", 0.1},
         {"cov", cov_defaults()},
         {"n", 100000},
         {"estimators", {"vanilla_gd", "debiased_gd", "ridge", "kernel"}},
         {"eta", -1.0},
         {"lambda", -1.0},
         {"lengths", json::array()},
         {"checkpoint", ""},
         {"model", {{"kind", "softmax"}, {"activation", "exp"}, {"C", 1.0}, {"L_norm", 0}}},
         {"asymptotic", {{"xi", json::array()}, {"sigma2", json::array()}}}});
  } else if (sub == "gradflow") {
    add({{"alpha", 1e-3}, {"d", 5}, {"L", 40}, {"sigma2", 0.1}, {"t_end", 200.0}, {"dt", 1e-3},
         {"sample_every", 100}});
  } else if (sub == "approx-validate") {
    add({{"d", 5},
         {"L", 40},
         {"sigma2", 0.1},
         {"n", 100000},
         {"omega", {0.05, 0.1, 0.15}},
         {"mu", {1.0, 2.0, 3.5}}});
  } else if (sub == "patterns") {
    add({{"checkpoint", ""}, {"L", 40}, {"sigma2", 0.1}});
  } else if (sub == "stein-check") {
    add({{"d", 3}, {"L", 6}, {"n", 1000000}, {"random", 5}, {"triples", json::array()}});
  } else {
    throw Error(ErrorKind::argument, "unknown subcommand '" + sub + "'");
  }
  return j;
}

json merge_config(const json& base, const json& user, const std::string& path) {
  require(user.is_object(), ErrorKind::schema, (path.empty() ? std::string("config") : path) + ": expected an object");
  json out = base;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    require(base.contains(it.key()), ErrorKind::schema, p + ": unknown key");
    const json& b = base[it.key()];
    const json& u = it.value();
    if (b.is_object()) {
      out[it.key()] = merge_config(b, u, p);
    } else if (b.is_number()) {
      require(u.is_number(), ErrorKind::schema, p + ": expected a number");
      if (b.is_number_integer() || b.is_number_unsigned()) {
        require(u.is_number_integer() || u.is_number_unsigned() ||
                    (std::isfinite(u.get<double>()) && u.get<double>() == std::floor(u.get<double>())),
                ErrorKind::schema, p + ": expected an integer");
        if (u.is_number_float()) {
          out[it.key()] = static_cast<long long>(u.get<double>());
          continue;
        }
      }
      out[it.key()] = u;
    } else {
      require(u.type() == b.type(), ErrorKind::schema,
              p + ": expected " + std::string(b.type_name()) + ", got " + u.type_name());
      out[it.key()] = u;
    }
  }
  return out;
}

void apply_override(json& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::argument, "override must look like a.b=value");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  // Build a one-path user document and merge it, so overrides get the same checks as files.
  json user = value;
  const auto parts = split(key, '.');
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) user = json{{*it, user}};
  cfg = merge_config(cfg, user);
}

CovSpec cov_from_json(const json& j) {
  const std::string k = j.at("kind").get<std::string>();
  if (k == "isotropic") return CovSpec::isotropic();
  if (k == "kms") return CovSpec::kms(j.at("rho").get<double>());
  if (k == "explicit") {
    const json& m = j.at("matrix");
    const int n = static_cast<int>(m.size());
    require(n > 0, ErrorKind::schema, "cov.matrix: empty");
    MatrixXd s(n, n);
    for (int i = 0; i < n; ++i) {
      require(m[i].size() == static_cast<size_t>(n), ErrorKind::schema, "cov.matrix: not square");
      for (int c = 0; c < n; ++c) s(i, c) = m[i][c].get<double>();
    }
    return CovSpec::explicit_matrix(s);
  }
  throw Error(ErrorKind::schema, "cov.kind: unknown value '" + k + "'");
}

TaskSpec tasks_from_json(const json& j) {
  TaskSpec t;
  t.N = static_cast<int>(j.size());
  for (const auto& s : j) t.supports.push_back(s.get<std::vector<int>>());
  return t;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.d = j.at("d").get<int>();
    c.L = j.at("L").get<int>();
    c.H = j.at("H").get<int>();
    c.sigma2 = j.at("sigma2").get<double>();
    c.cov = cov_from_json(j.at("cov"));
    c.steps = j.at("steps").get<long>();
    c.batch = j.at("batch").get<int>();
    const json& o = j.at("optimizer");
    const std::string ok = o.at("kind").get<std::string>();
    require(ok == "adam" || ok == "sgd", ErrorKind::schema, "optimizer.kind: expected adam or sgd");
    c.opt.kind = ok == "adam" ? OptimizerConfig::Kind::adam : OptimizerConfig::Kind::sgd;
    c.opt.lr = o.at("lr").get<double>();
    c.opt.beta1 = o.at("beta1").get<double>();
    c.opt.beta2 = o.at("beta2").get<double>();
    c.opt.eps = o.at("eps").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const json& in = j.at("init");
    const std::string ik = in.at("kind").get<std::string>();
    if (ik == "default_uniform")
      c.init.kind = InitConfig::Kind::default_uniform;
    else if (ik == "gaussian")
      c.init.kind = InitConfig::Kind::gaussian;
    else if (ik == "symmetric_two_head")
      c.init.kind = InitConfig::Kind::symmetric_two_head;
    else
      throw Error(ErrorKind::schema, "init.kind: unknown value '" + ik + "'");
    c.init.scale = in.at("scale").get<double>();
    c.init.alpha = in.at("alpha").get<double>();
    c.param = parse_parametrization(j.at("parametrization").get<std::string>());
    c.log_every = j.at("log_every").get<int>();
    const json& m = j.at("model");
    const std::string mk = m.at("kind").get<std::string>();
    if (mk == "softmax") {
      c.model.kind = ModelKind::softmax;
    } else if (mk == "linear") {
      c.model.kind = ModelKind::linear;
    } else if (mk == "activation") {
      c.model.kind = ModelKind::activation;
    } else if (mk == "multitask") {
      c.model.kind = ModelKind::multitask;
    } else {
      throw Error(ErrorKind::schema, "model.kind: unknown value '" + mk + "'");
    }
    c.model.act = Activation::parse(m.at("activation").get<std::string>(), m.at("C").get<double>());
    c.model.L_norm = m.at("L_norm").get<int>();
    c.model.signed_normalizer = m.value("signed_normalizer", false);
    if (c.model.kind == ModelKind::multitask) c.model.tasks = tasks_from_json(m.at("supports"));
    c.eval_batch = j.at("eval_batch").get<int>();
    c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, e.what());
  }
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  json cov = cov_defaults();
  if (c.cov.kind == CovSpec::Kind::kms) {
    cov["kind"] = "kms";
    cov["rho"] = c.cov.rho;
  } else if (c.cov.kind == CovSpec::Kind::explicit_matrix) {
    cov["kind"] = "explicit";
    cov["matrix"] = matrix_json(c.cov.sigma);
  }
  const char* ik = c.init.kind == InitConfig::Kind::default_uniform ? "default_uniform"
                   : c.init.kind == InitConfig::Kind::gaussian      ? "gaussian"
                                                                     : "symmetric_two_head";
  const char* mk = c.model.kind == ModelKind::softmax    ? "softmax"
                   : c.model.kind == ModelKind::linear   ? "linear"
                   : c.model.kind == ModelKind::activation ? "activation"
                                                           : "multitask";
  json supports = json::array();
  if (c.model.kind == ModelKind::multitask)
    for (const auto& s : c.model.tasks.supports) supports.push_back(s);
  return {{"d", c.d},
          {"L", c.L},
          {"H", c.H},
          {"sigma2", c.sigma2},
          {"cov", cov},
          {"steps", c.steps},
          {"batch", c.batch},
          {"optimizer",
           {{"kind", c.opt.kind == OptimizerConfig::Kind::adam ? "adam" : "sgd"},
            {"lr", c.opt.lr},
            {"beta1", c.opt.beta1},
            {"beta2", c.opt.beta2},
            {"eps", c.opt.eps}}},
          {"seed", c.seed},
          {"init", {{"kind", ik}, {"scale", c.init.scale}, {"alpha", c.init.alpha}}},
          {"parametrization", to_string(c.param)},
          {"log_every", c.log_every},
          {"model",
           {{"kind", mk},
            {"activation", c.model.act.name()},
            {"C", c.model.act.C},
            {"L_norm", c.model.L_norm},
            {"signed_normalizer", c.model.signed_normalizer},
            {"supports", supports}}},
          {"eval_batch", c.eval_batch},
          {"threads", c.threads}};
}

}  // namespace iclab
