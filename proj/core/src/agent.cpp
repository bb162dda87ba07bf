#include "harvestsim/agent.hpp"

#include <algorithm>
#include <cmath>

namespace harvestsim {

OptionSet enumerate_options(ResourceRange cpu_range, ResourceRange mem_range,
                            const ClusterConfig& cfg) {
  if (cpu_range.lo > cpu_range.hi || mem_range.lo > mem_range.hi) {
    throw ContractError("enumerate_options: empty range");
  }
  if (cpu_range.lo < cfg.cpu_unit ||
      cpu_range.hi > cfg.per_function_max.cpu ||
      mem_range.lo < cfg.mem_unit_mb ||
      mem_range.hi > cfg.per_function_max.mem) {
    throw ContractError("enumerate_options: range outside per-function caps");
  }
  OptionSet set;
  for (int cpu = cpu_range.lo; cpu <= cpu_range.hi; cpu += cfg.cpu_unit) {
    for (int mem = mem_range.lo; mem <= mem_range.hi; mem += cfg.mem_unit_mb) {
      set.options.push_back(Allocation{cpu, mem});
    }
  }
  return set;
}

StateVector embed(const PlatformState& platform, const FunctionHistory& history,
                  const Allocation& option, int option_index, int n_options,
                  const ClusterConfig& cfg) {
  if (!history.baseline_latency_s.has_value()) {
    throw ContractError("embed: function has no calibrated baseline");
  }
  const double max_cpu = cfg.per_function_max.cpu;
  const double max_mem = cfg.per_function_max.mem;
  StateVector s;
  s[0] = static_cast<double>(platform.avail_cpu) / cfg.total_cpu();
  s[1] = static_cast<double>(platform.avail_mem_mb) /
         static_cast<double>(cfg.total_mem_mb());
  s[2] = static_cast<double>(platform.inflight_request_num) / 100.0;
  s[3] = history.avg_cpu_peak / max_cpu;
  s[4] = history.avg_mem_peak / max_mem;
  s[5] = history.avg_interval_s / 60.0;
  s[6] = history.avg_execution_time_s / 60.0;
  s[7] = *history.baseline_latency_s / 60.0;
  s[8] = static_cast<double>(option.cpu) / max_cpu;
  s[9] = static_cast<double>(option.mem) / max_mem;
  s[10] = static_cast<double>(option_index) / std::max(n_options - 1, 1);
  return s;
}

void embed_options(OptionSet& set, const PlatformState& platform,
                   const FunctionHistory& history, const ClusterConfig& cfg) {
  set.states.clear();
  set.states.reserve(set.options.size());
  const int n = set.size();
  for (int i = 0; i < n; ++i) {
    set.states.push_back(embed(platform, history, set.options[i], i, n, cfg));
  }
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) {
    throw ContractError("softmax over zero scores");
  }
  double max_score = *std::max_element(scores.begin(), scores.end());
  std::vector<double> probs(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(scores[i] - max_score);
    sum += probs[i];
  }
  for (double& p : probs) {
    p /= sum;
  }
  return probs;
}

Decision decide(const OptionSet& set, const Mlp& actor, const Mlp& critic,
                DecisionMode mode, Rng& rng) {
  const int n = set.size();
  if (n < 1 || set.states.size() != set.options.size()) {
    throw ContractError("decide: option set not embedded");
  }
  std::vector<double> scores(static_cast<std::size_t>(n));
  Decision decision;
  decision.critic_values.resize(static_cast<std::size_t>(n));
  double critic_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] = actor.forward(set.states[i]);
    double b = critic.forward(set.states[i]);
    decision.critic_values[static_cast<std::size_t>(i)] = b;
    critic_sum += b;
  }
  decision.critic_mean = critic_sum / n;
  decision.probabilities = softmax(scores);

  int chosen = 0;
  if (mode == DecisionMode::Greedy) {
    // Argmax over scores, lowest index on ties.
    for (int i = 1; i < n; ++i) {
      if (scores[static_cast<std::size_t>(i)] >
          scores[static_cast<std::size_t>(chosen)]) {
        chosen = i;
      }
    }
  } else {
    double u = rng.uniform01();
    double cumulative = 0.0;
    chosen = n - 1;
    for (int i = 0; i < n; ++i) {
      cumulative += decision.probabilities[static_cast<std::size_t>(i)];
      if (u < cumulative) {
        chosen = i;
        break;
      }
    }
  }
  decision.chosen_index = chosen;
  // log prob computed from the shifted scores, not log(prob), for stability.
  double max_score = *std::max_element(scores.begin(), scores.end());
  double log_sum = 0.0;
  for (double q : scores) {
    log_sum += std::exp(q - max_score);
  }
  decision.log_probability =
      scores[static_cast<std::size_t>(chosen)] - max_score - std::log(log_sum);
  decision.allocation = set.options[static_cast<std::size_t>(chosen)];
  return decision;
}

}  // namespace harvestsim
