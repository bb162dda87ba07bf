#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "harvestsim/errors.hpp"

namespace harvestsim {

// A (CPU cores, memory MB) grant. Non-preemptive: fixed for the lifetime of
// one invocation. CPU is whole cores, memory a multiple of the 64 MB unit.
struct Allocation {
  int cpu = 0;
  int mem = 0;

  bool operator==(const Allocation&) const = default;
};

// Minimal allocation beyond which latency stops improving for one
// invocation. Real-valued: demand does not align to allocation units.
struct SaturationPoint {
  double cpu = 0.0;
  double mem = 0.0;
};

// Observed usage peak of one execution. Never exceeds the allocation.
struct PeakUsage {
  double cpu = 0.0;
  double mem = 0.0;
};

// A deployed function: the user-requested allocation plus the synthetic
// saturation profile that drives the performance model.
struct FunctionSpec {
  std::string id;
  Allocation user_alloc;
  double base_latency_s = 0.0;  // latency at saturation, input scale 1
  double sat_cpu_base = 0.0;    // cores demanded at input scale 1
  double sat_mem_base = 0.0;    // MB demanded at input scale 1
  double cpu_exponent = 1.0;    // sub-saturation degradation slope
  double mem_exponent = 1.0;
  double sat_jitter = 0.0;      // relative demand noise, in [0, 1)
};

struct ClusterConfig {
  int n_invokers = 10;
  int invoker_cpu = 8;
  int invoker_mem_mb = 32768;
  Allocation per_function_max{8, 1024};
  int mem_unit_mb = 64;
  int cpu_unit = 1;
  double slo_threshold = 1.05;       // slowdown above this violates the SLO
  double safeguard_threshold = 0.8;  // usage-spike ratio
  std::uint64_t rng_seed = 0;

  int total_cpu() const { return n_invokers * invoker_cpu; }
  long total_mem_mb() const {
    return static_cast<long>(n_invokers) * invoker_mem_mb;
  }
};

enum class InvocationState { Pending, Running, Completed };

// One arrival moving through the platform.
struct Invocation {
  int inv_id = 0;
  std::string function_id;
  double arrival_time_s = 0.0;
  double input_scale = 1.0;
  SaturationPoint saturation;  // realized demand of this invocation
  InvocationState state = InvocationState::Pending;
  std::optional<Allocation> allocation;
  std::optional<double> start_time_s;
  std::optional<double> finish_time_s;
  bool is_safeguard_invocation = false;
};

// What the platform keeps after an invocation completes.
struct InvocationRecord {
  int inv_id = 0;
  std::string function_id;
  Allocation allocation;
  Allocation user_alloc;
  PeakUsage peak;
  double response_latency_s = 0.0;   // queue wait + execution
  double execution_latency_s = 0.0;  // execution only
  double slowdown = 0.0;             // vs. user allocation, queue-free
  bool was_safeguard = false;
  double arrival_time_s = 0.0;
  double start_time_s = 0.0;
  double finish_time_s = 0.0;
  std::uint64_t completion_seq = 0;  // engine event order
};

// Per-function rolling statistics. Averages are cumulative over all
// completed invocations of the function.
struct FunctionHistory {
  std::optional<double> baseline_latency_s;  // measured at user allocation
  double avg_cpu_peak = 0.0;
  double avg_mem_peak = 0.0;
  double avg_interval_s = 0.0;
  double avg_execution_time_s = 0.0;
  PeakUsage recent_peak;  // componentwise max since last baseline calibration
  std::optional<InvocationRecord> last_record;
  long invocation_count = 0;  // completed invocations

  // arrival-side bookkeeping for avg_interval_s
  long arrival_count = 0;
  double last_arrival_time_s = 0.0;
};

// Cluster-wide snapshot taken when a manager is asked for a decision.
struct PlatformState {
  int avail_cpu = 0;
  int avail_mem_mb = 0;
  int inflight_request_num = 0;  // pending + running, incl. the arrival
  double clock_s = 0.0;
};

bool validate_allocation(const Allocation& alloc, const ClusterConfig& cfg);

// Throw ConfigError / ContractError when invariants do not hold.
void validate(const ClusterConfig& cfg);
void validate(const FunctionSpec& spec);

// Smallest multiple of `unit` that is >= value; value >= 0, unit >= 1.
int quantize_up(double value, int unit);

}  // namespace harvestsim
