#include "harvestsim/managers.hpp"

#include <algorithm>

namespace harvestsim {

ManagerDecision FixedManager::on_arrival(const AllocationRequest& req) {
  return ManagerDecision{req.user_alloc};
}

GreedyManager::GreedyManager(const ClusterConfig& cfg, double over_threshold,
                             double under_threshold)
    : cfg_(cfg),
      over_threshold_(over_threshold),
      under_threshold_(under_threshold) {
  if (over_threshold_ > under_threshold_) {
    throw ConfigError("greedy.over_threshold must be <= greedy.under_threshold");
  }
}

ManagerDecision GreedyManager::on_arrival(const AllocationRequest& req) {
  const FunctionHistory& history = *req.history;
  if (!history.last_record.has_value()) {
    return ManagerDecision{req.user_alloc};
  }
  const InvocationRecord& last = *history.last_record;

  auto adjust = [this](double peak, int last_alloc, int unit, int max,
                       int& pool) {
    double util = peak / static_cast<double>(last_alloc);
    if (util < over_threshold_) {
      if (last_alloc - unit >= unit) {
        pool += unit;
        return last_alloc - unit;
      }
    } else if (util >= under_threshold_) {
      if (pool >= unit && last_alloc + unit <= max) {
        pool -= unit;
        return last_alloc + unit;
      }
    }
    return last_alloc;
  };

  Allocation alloc;
  alloc.cpu = adjust(last.peak.cpu, last.allocation.cpu, cfg_.cpu_unit,
                     cfg_.per_function_max.cpu, pool_.harvested_cpu);
  alloc.mem = adjust(last.peak.mem, last.allocation.mem, cfg_.mem_unit_mb,
                     cfg_.per_function_max.mem, pool_.harvested_mem);
  return ManagerDecision{alloc};
}

EnsureManager::EnsureManager(const ClusterConfig& cfg,
                             double degradation_factor)
    : cfg_(cfg), degradation_factor_(degradation_factor) {
  if (!(degradation_factor_ > 0.0)) {
    throw ConfigError("ensure.degradation_factor must be > 0");
  }
}

ManagerDecision EnsureManager::on_arrival(const AllocationRequest& req) {
  const FunctionHistory& history = *req.history;
  Allocation alloc{req.user_alloc.cpu, req.user_alloc.mem};
  if (!history.last_record.has_value()) {
    return ManagerDecision{alloc};
  }
  const InvocationRecord& last = *history.last_record;
  int cpu = last.allocation.cpu;
  const double baseline = history.baseline_latency_s.value_or(0.0);
  const double cpu_util =
      last.peak.cpu / static_cast<double>(last.allocation.cpu);
  if (baseline > 0.0 &&
      last.response_latency_s > degradation_factor_ * baseline) {
    cpu = std::min(cpu + cfg_.cpu_unit, cfg_.per_function_max.cpu);
  } else if (cpu_util < 0.5) {
    cpu = std::max(cpu - cfg_.cpu_unit, cfg_.cpu_unit);
  }
  alloc.cpu = cpu;
  return ManagerDecision{alloc};
}

}  // namespace harvestsim
