#pragma once

#include <array>
#include <vector>

#include "harvestsim/mlp.hpp"
#include "harvestsim/rng.hpp"
#include "harvestsim/safeguard.hpp"
#include "harvestsim/types.hpp"

namespace harvestsim {

// Fixed feature order: avail_cpu, avail_mem, inflight, avg_cpu_peak,
// avg_mem_peak, avg_interval, avg_execution_time, baseline, option_cpu,
// option_mem, option_index. All normalized to O(1).
inline constexpr int kStateDims = 11;
using StateVector = std::array<double, kStateDims>;

// Candidate allocations within the safeguard's ranges, ordered CPU
// ascending then memory ascending, with their embedded state vectors.
struct OptionSet {
  std::vector<Allocation> options;
  std::vector<StateVector> states;  // filled by embed_options

  int size() const { return static_cast<int>(options.size()); }
};

struct Decision {
  int chosen_index = 0;
  std::vector<double> probabilities;
  double log_probability = 0.0;
  std::vector<double> critic_values;
  double critic_mean = 0.0;  // variance-reduction baseline
  Allocation allocation;
};

enum class DecisionMode { Sample, Greedy };

OptionSet enumerate_options(ResourceRange cpu_range, ResourceRange mem_range,
                            const ClusterConfig& cfg);

StateVector embed(const PlatformState& platform, const FunctionHistory& history,
                  const Allocation& option, int option_index, int n_options,
                  const ClusterConfig& cfg);

void embed_options(OptionSet& set, const PlatformState& platform,
                   const FunctionHistory& history, const ClusterConfig& cfg);

// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> scores);

// Scores every option with the actor, samples or argmaxes, and averages the
// critic's per-option outputs into the baseline.
Decision decide(const OptionSet& set, const Mlp& actor, const Mlp& critic,
                DecisionMode mode, Rng& rng);

}  // namespace harvestsim
