#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "harvestsim/managers.hpp"
#include "harvestsim/types.hpp"
#include "harvestsim/workload.hpp"

namespace harvestsim {

// A worker node. Availability is integer and exact: allocated + available
// equals capacity at every event boundary.
struct Invoker {
  int id = 0;
  int capacity_cpu = 0;
  int capacity_mem_mb = 0;
  int available_cpu = 0;
  int available_mem_mb = 0;
};

// Lowest-id invoker with room for the allocation, or nullopt.
std::optional<int> pick_invoker(std::span<const Invoker> invokers,
                                const Allocation& alloc);

// The cluster's capacity bookkeeping.
class InvokerPool {
 public:
  InvokerPool() = default;
  explicit InvokerPool(const ClusterConfig& cfg);

  std::optional<int> schedule(const Allocation& alloc);
  void release(int invoker_id, const Allocation& alloc);
  PlatformState snapshot(double clock_s, int inflight) const;
  const std::vector<Invoker>& invokers() const { return invokers_; }

  // Throws ContractError if any invoker's books do not balance.
  void check_conservation() const;

 private:
  std::vector<Invoker> invokers_;
  std::vector<Allocation> allocated_;  // independently tracked running totals
};

// One manager consultation, kept for post-hoc audits and training.
struct DecisionLogEntry {
  std::uint64_t event_seq = 0;
  int inv_id = 0;
  std::string function_id;
  double arrival_time_s = 0.0;
  Allocation user_alloc;
  Allocation allocation;
  bool was_safeguard = false;
  bool had_history = false;
  PeakUsage prev_peak;     // predecessor record, valid when had_history
  Allocation prev_alloc;   // predecessor record, valid when had_history
  PeakUsage recent_peak;   // rolling peak at decision time
  std::optional<SafeguardOutcome> safeguard;  // freyr only
  std::optional<PolicyStep> policy;           // freyr, non-safeguard only
};

struct EpisodeResult {
  std::vector<InvocationRecord> records;    // completion order
  std::vector<DecisionLogEntry> decisions;  // arrival order
  std::map<std::string, FunctionHistory> final_history;
  std::uint64_t event_count = 0;
  std::uint64_t conservation_checks = 0;
};

// Deterministic discrete-event simulator. Ties are broken by (time,
// completion-before-arrival, invocation id). Invocations that fit no invoker
// wait in a strict FIFO queue retried on every completion. A single engine
// instance is single-threaded; run instances concurrently only with
// per-instance managers.
class Engine {
 public:
  explicit Engine(ClusterConfig cfg);

  // Processes every invocation to completion. The manager is consulted once
  // per arrival; the allocation is fixed from then on. An invalid manager
  // allocation is a hard error. `event_log` lines:
  //   event_kind,clock_s,inv_id,function_id,cpu,mem
  EpisodeResult run(const Trace& trace, ResourceManager& manager,
                    std::ostream* event_log = nullptr);

  const ClusterConfig& config() const { return cfg_; }

 private:
  ClusterConfig cfg_;
};

}  // namespace harvestsim
