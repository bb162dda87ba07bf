#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "harvestsim/config.hpp"

namespace harvestsim {

struct GenTraceOptions {
  int calls = 268;
  double mean_iat_s = 2.2;
  int functions = 10;
  std::uint64_t seed = 0;
  double scale_min = 0.5;
  double scale_max = 2.0;
  std::string out_dir = ".";
};

// Writes <out>/trace.csv and <out>/catalog.csv; prints calls, sample mean
// IAT and requests/sec.
void cmd_gen_trace(const GenTraceOptions& opts, std::ostream& out);

// Runs the PPO loop; writes <out>/training_log.csv plus checkpoint files at
// the configured stem (default <out>/ckpt). Resumes if the stem's files
// already exist.
void cmd_train(const RunConfig& cfg, std::ostream& out);

// One full engine run under cfg.manager; writes <out>/report.csv,
// <out>/cdf.csv and <out>/aggregates.txt.
void cmd_eval(const RunConfig& cfg, std::ostream& out);

// Re-evaluates the freyr checkpoint on the same workload per threshold;
// writes <out>/sweep.csv with threshold,safe_rate,avg_slowdown,degraded_rate.
void cmd_sweep_threshold(const RunConfig& cfg,
                         const std::vector<double>& thresholds,
                         std::ostream& out);

}  // namespace harvestsim
