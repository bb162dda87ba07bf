#include "harvestsim/safeguard.hpp"

#include <algorithm>

namespace harvestsim {

namespace {

ResourceRange clamped(int lo, int hi) {
  if (lo > hi) {
    return ResourceRange{hi, hi};
  }
  return ResourceRange{lo, hi};
}

ResourceRange open_range(double recent_peak, int unit, int hi) {
  int lo = quantize_up(recent_peak, unit) + unit;
  lo = std::max(lo, unit);
  return clamped(lo, hi);
}

}  // namespace

SafeguardOutcome decide_ranges(const FunctionHistory& history,
                               const Allocation& user_alloc,
                               const ClusterConfig& cfg) {
  SafeguardOutcome outcome;
  if (!history.last_record.has_value()) {
    outcome.cpu_range = ResourceRange{user_alloc.cpu, user_alloc.cpu};
    outcome.mem_range = ResourceRange{user_alloc.mem, user_alloc.mem};
    outcome.calibrate_baseline = true;
    outcome.triggered_reason = SafeguardReason::NoHistory;
    return outcome;
  }

  const InvocationRecord& last = *history.last_record;
  const double threshold = cfg.safeguard_threshold;

  // Spike: an over-provisioned resource whose last execution nearly filled
  // its grant. Either resource spiking reverts both to user levels.
  auto spiked = [threshold](double peak, int alloc, int user) {
    return peak < static_cast<double>(user) &&
           peak / static_cast<double>(alloc) >= threshold;
  };
  if (spiked(last.peak.cpu, last.allocation.cpu, user_alloc.cpu) ||
      spiked(last.peak.mem, last.allocation.mem, user_alloc.mem)) {
    outcome.cpu_range = ResourceRange{user_alloc.cpu, user_alloc.cpu};
    outcome.mem_range = ResourceRange{user_alloc.mem, user_alloc.mem};
    outcome.calibrate_baseline = true;
    outcome.triggered_reason = SafeguardReason::SpikeDetected;
    return outcome;
  }

  auto range_for = [&](double last_peak, double recent_peak, int unit,
                       int user, int max) {
    if (last_peak < static_cast<double>(user)) {
      // Over-provisioned: harvesting allowed up to the user level.
      return open_range(recent_peak, unit, user);
    }
    // Under-provisioned: acceleration allowed up to the per-function cap.
    return open_range(recent_peak, unit, max);
  };
  outcome.cpu_range =
      range_for(last.peak.cpu, history.recent_peak.cpu, cfg.cpu_unit,
                user_alloc.cpu, cfg.per_function_max.cpu);
  outcome.mem_range =
      range_for(last.peak.mem, history.recent_peak.mem, cfg.mem_unit_mb,
                user_alloc.mem, cfg.per_function_max.mem);
  outcome.calibrate_baseline = false;
  outcome.triggered_reason = SafeguardReason::None;
  return outcome;
}

}  // namespace harvestsim
