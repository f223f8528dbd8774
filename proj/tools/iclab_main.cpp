#include "iclab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  using namespace iclab;
  CLI::App app{"In-context regression experiments with multi-head softmax attention"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  struct Flags {
    std::string config, out;
    std::uint64_t seed = 0;
    int threads = 1;
    bool deterministic = false;
    std::vector<std::string> sets;
  };
  const std::map<std::string, std::string> help = {
      {"train", "train a single-task attention model"},
      {"risk-sweep", "Monte-Carlo and closed-form risks of estimators and checkpoints"},
      {"gradflow", "integrate the two-head gradient-flow ODE"},
      {"approx-validate", "compare the approximate loss with Monte-Carlo loss on a grid"},
      {"patterns", "extract KQ/OV patterns from a checkpoint"},
      {"multitask", "train a multi-task model and group its heads"},
      {"stein-check", "Monte-Carlo check of the Gaussian integration-by-parts identity"}};
  std::vector<std::pair<CLI::App*, Flags>> subs;
  subs.reserve(subcommands().size());
  for (const auto& name : subcommands()) {
    const auto it = help.find(name);
    auto* s = app.add_subcommand(name, it == help.end() ? "" : it->second);
    subs.emplace_back(s, Flags{});
    Flags& f = subs.back().second;
    s->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    s->add_option("--seed", f.seed, "master seed");
    s->add_option("--out", f.out, "output directory");
    s->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_flag("--deterministic", f.deterministic, "fixed-order reductions (always on)");
    s->add_option("--set", f.sets, "override a config field, e.g. --set optimizer.lr=1e-3");
  }
  CLI11_PARSE(app, argc, argv);

  for (auto& [s, f] : subs) {
    if (!s->parsed()) continue;
    const std::string name = s->get_name();
    try {
      CliOverrides o;
      if (s->count("--config")) o.config_path = f.config;
      if (s->count("--seed")) o.seed = f.seed;
      if (s->count("--out")) o.out = f.out;
      if (s->count("--threads")) o.threads = f.threads;
      o.deterministic = f.deterministic;
      o.sets = f.sets;
      run_subcommand(name, resolve_config(name, o));
      return 0;
    } catch (const Error& e) {
      std::cerr << name << ": " << e.what() << "\n";
      return exit_code(e.kind());
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
