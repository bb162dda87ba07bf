#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "harvestsim/types.hpp"

namespace harvestsim {

// Flat key=value run configuration with dotted keys. '#' lines and blank
// lines are ignored. Unknown keys are errors.
struct RunConfig {
  std::optional<std::uint64_t> seed;  // mandatory before running
  std::string out_dir;
  std::string manager = "fixed";  // fixed|greedy|ensure|freyr

  ClusterConfig cluster;

  double greedy_over_threshold = 0.8;
  double greedy_under_threshold = 0.95;
  double ensure_degradation_factor = 1.1;

  std::string freyr_mode = "greedy";  // greedy|sample
  std::string freyr_checkpoint_path;

  std::string workload_trace;    // with workload_catalog: explicit files
  std::string workload_catalog;
  int workload_calls = 250;      // otherwise: generated workload
  double workload_mean_iat_s = 2.2;
  int workload_functions = 4;
  double workload_scale_min = 0.5;
  double workload_scale_max = 2.0;
  std::string workload_weights;  // comma-separated, optional

  int train_episodes = 200;  // desk-scale default
  int train_epochs = 4;
  double train_clip = 0.2;
  double train_gamma = 1.0;
  double train_lr = 0.001;
  double train_reward_bonus = 1.0;
  int train_checkpoint_every = 50;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");

// Applies one key=value pair; throws ConfigError naming the key.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

// Every effective key, sorted, one per line. Input to the config hash.
std::string canonical_config_text(const RunConfig& cfg);

std::uint64_t config_hash(const RunConfig& cfg);

// "seed=<seed> config_hash=<16 hex digits>" for output file header comments.
std::string run_header_comment(const RunConfig& cfg);

}  // namespace harvestsim
