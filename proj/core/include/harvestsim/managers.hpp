#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "harvestsim/agent.hpp"
#include "harvestsim/safeguard.hpp"
#include "harvestsim/types.hpp"

namespace harvestsim {

// Everything a manager may look at when deciding one arrival's allocation.
// The history view is the engine's bookkeeping at the arrival instant.
struct AllocationRequest {
  int inv_id = 0;
  std::string function_id;
  double arrival_time_s = 0.0;
  const FunctionHistory* history = nullptr;
  PlatformState platform;
  Allocation user_alloc;
};

// Recorded when the learning manager took a policy action (not a safeguard
// invocation); feeds the trajectory.
struct PolicyStep {
  OptionSet options;
  Decision decision;
};

struct ManagerDecision {
  Allocation allocation;
  bool calibrate_baseline = false;
  std::optional<SafeguardOutcome> safeguard;
  std::optional<PolicyStep> policy;
};

class ResourceManager {
 public:
  virtual ~ResourceManager() = default;
  virtual std::string_view name() const = 0;
  virtual ManagerDecision on_arrival(const AllocationRequest& req) = 0;
};

// Applies the user-defined allocation, always.
class FixedManager : public ResourceManager {
 public:
  std::string_view name() const override { return "fixed"; }
  ManagerDecision on_arrival(const AllocationRequest& req) override;
};

// Cores/MB harvested but not yet re-assigned. First-come-first-serve.
struct HarvestPool {
  int harvested_cpu = 0;
  int harvested_mem = 0;
};

// Steps each function's allocation down when its last execution left the
// grant mostly idle, and up (from the pool) when it nearly filled it.
// One core / one memory unit per invocation per resource.
class GreedyManager : public ResourceManager {
 public:
  GreedyManager(const ClusterConfig& cfg, double over_threshold = 0.8,
                double under_threshold = 0.95);

  std::string_view name() const override { return "greedy"; }
  ManagerDecision on_arrival(const AllocationRequest& req) override;

  const HarvestPool& pool() const { return pool_; }

 private:
  ClusterConfig cfg_;
  double over_threshold_;
  double under_threshold_;
  HarvestPool pool_;
};

// Keeps memory at the user level and reacts on CPU only: one core up on
// latency degradation, one core down on low utilization.
class EnsureManager : public ResourceManager {
 public:
  explicit EnsureManager(const ClusterConfig& cfg,
                         double degradation_factor = 1.1);

  std::string_view name() const override { return "ensure"; }
  ManagerDecision on_arrival(const AllocationRequest& req) override;

 private:
  ClusterConfig cfg_;
  double degradation_factor_;
};

}  // namespace harvestsim
