#pragma once

// Experiment configuration file for the command-line tool.
//
//   {
//     "train": {"epochs": 50, "batch_size": 16, "learning_rate": 0.0001,
//               "shuffle_seed": 0,
//               "classifier": {"conv_filters": 16, "kernel_size": 5,
//                              "hidden_units": 64, "seed": 0},
//               "augment": {"copies_per_sample": 4, "min_segments": 2,
//                           "max_segments": 5, "seed": 0}},
//     "synth": {"profile": "openpose70", "counts": [126, 126, 126],
//               "min_frames": 60, "max_frames": 300, "noise_sigma": 0.02,
//               "expression_amplitude": 0.15, "shake_frequency": 1.5, "seed": 0},
//     "split": {"train_counts": [101, 101, 100]}  or
//              {"train_fraction": 0.8, "seed": 0},
//     "paths": {"data_root": "...", "manifest": "...", "run_dir": "..."}
//   }
//
// Every section and key is optional; unknown keys are rejected.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "signface/pipeline.hpp"
#include "signface/synth.hpp"

namespace signface {

struct SplitOptions {
  std::optional<std::array<int, kNumClasses>> train_counts;
  std::optional<double> train_fraction;
  std::uint64_t seed = 0;
};

struct PathOptions {
  std::optional<std::string> data_root;
  std::optional<std::string> manifest;
  std::optional<std::string> run_dir;
};

struct CliConfig {
  TrainConfig train;
  SynthConfig synth;
  SplitOptions split;
  PathOptions paths;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
CliConfig parse_cli_config(std::string_view json_text);
CliConfig load_cli_config(const std::string& path);
std::string cli_config_to_json(const CliConfig& cfg);

}  // namespace signface
