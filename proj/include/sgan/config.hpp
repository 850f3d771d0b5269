#pragma once

// Run configuration file (JSON). Every object is validated strictly: unknown
// keys are errors so that misspelled hyperparameters cannot pass silently.

#include "sgan/data.hpp"
#include "sgan/eval.hpp"
#include "sgan/networks.hpp"
#include "sgan/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace sgan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DatasetKind { kRings, kIdx };

struct IdxPaths {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::optional<Index> max_train;
  std::optional<Index> max_test;
};

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kRings;
  RingsConfig rings;
  IdxPaths idx;
  Index classes = 4;  // used by idx; rings takes rings.classes
  Index labels = 16;  // n, the labeled-example budget
};

struct EvalConfig {
  Index num_samples = 1000;
  int eval_every = 1;
  GoldenTrainOptions golden;
  ProbeOptions probe;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  int checkpoint_every = 0;  // 0: final checkpoint only
  DatasetConfig dataset;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;

  // Component seeds derived from the master seed by fixed offsets.
  std::uint64_t data_seed() const { return seed + 1; }
  std::uint64_t init_seed() const { return seed + 2; }
  std::uint64_t train_seed() const { return seed + 3; }
  std::uint64_t eval_seed() const { return seed + 4; }

  Index classes() const;
  PriorSpec priors() const;
};

/// Parses and validates; relative idx paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Re-derives seed-dependent fields (train.seed, rings.seed) after a seed change.
void apply_seed(RunConfig& config, std::uint64_t seed);

/// Canonical JSON of every field that affects results (output_dir excluded).
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

/// Dataset with the labeled split applied, deterministic in the data seed.
DatasetSplit build_dataset(const RunConfig& config);

/// Model section with x_dim / y_dim taken from the built dataset.
ModelConfig resolved_model(const RunConfig& config, const DatasetSplit& data);

}  // namespace sgan
