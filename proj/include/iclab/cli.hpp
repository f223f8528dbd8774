#pragma once

#include "iclab/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iclab {

// git-describe style string fixed at configure time.
std::string version_string();

const std::vector<std::string>& subcommands();

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool deterministic = false;
  std::vector<std::string> sets;  // dotted-path assignments
};

// Defaults, then the config file, then --set assignments, then dedicated flags.
json resolve_config(const std::string& sub, const CliOverrides& o);

// Runs one subcommand, writing artifacts and a manifest under cfg["out"]. Returns the summary document.
json run_subcommand(const std::string& sub, const json& cfg);

// Process exit code for an error kind.
int exit_code(ErrorKind k);

}  // namespace iclab
