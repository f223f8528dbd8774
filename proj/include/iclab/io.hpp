#pragma once

#include "iclab/training.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace iclab {

using nlohmann::json;

// Writes to `path.tmp.<pid>` then renames over `path`.
void atomic_write(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// %.17g, which round-trips any double through strtod.
std::string fmt17(double x);

// ---- training traces ----
std::string trace_header(int H);
std::string trace_csv(const TrainingTrace& tr);
void write_trace(const TrainingTrace& tr, const std::string& path);
std::vector<TraceRow> parse_trace_csv(const std::string& text);

// Generic CSV table with a mandatory header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string csv() const;
};

// KQ/OV circuits and their blocks per head, for heatmaps.
json heatmap_json(const ModelParams& p, int d);

// Fails on NaN or infinity anywhere in the document.
void require_finite_json(const json& j, const std::string& where = "");

// ---- checkpoints ----
// Layout: magic line, one-line JSON header, then little-endian float64 payload.
// Arrays are stored row-major; optimizer moments follow the parameters.
inline constexpr int kCheckpointSchema = 1;
inline constexpr const char* kCheckpointMagic = "ICLAB-CKPT";

struct CheckpointMeta {
  int schema = kCheckpointSchema;
  Parametrization mode = Parametrization::factored;
  int d = 0, L = 0, H = 0, N = 1;
  long step = 0;
  std::uint64_t seed = 0;
  json config;  // training config snapshot (may be null)
};

struct Checkpoint {
  CheckpointMeta meta;
  TrainState state;
};

std::string checkpoint_bytes(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
// Loads and checks that the stored parametrization and shapes match `cfg`.
TrainState load_state_for(const TrainConfig& cfg, const std::string& path);

// ---- configs ----
// Default documents per subcommand; user configs must only use keys present here.
json default_config(const std::string& subcommand);
// Recursively overlays `user` on `base`, rejecting unknown keys and type changes with the field path.
json merge_config(const json& base, const json& user, const std::string& path = "");
// Applies `a.b.c=value`; value is parsed as JSON when possible, else taken as a string.
void apply_override(json& cfg, const std::string& assignment);

TrainConfig train_config_from_json(const json& j);
json train_config_to_json(const TrainConfig& c);
CovSpec cov_from_json(const json& j);
TaskSpec tasks_from_json(const json& j);

}  // namespace iclab
