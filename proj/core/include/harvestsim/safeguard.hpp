#pragma once

#include "harvestsim/types.hpp"

namespace harvestsim {

enum class SafeguardReason { NoHistory, SpikeDetected, None };

struct ResourceRange {
  int lo = 0;
  int hi = 0;
};

// Admissible allocation ranges for the next invocation of a function, plus
// whether it must run at the user allocation to (re)calibrate the baseline.
struct SafeguardOutcome {
  ResourceRange cpu_range;
  ResourceRange mem_range;
  bool calibrate_baseline = false;
  SafeguardReason triggered_reason = SafeguardReason::None;
};

// Per resource, with unit u and threshold t = cfg.safeguard_threshold:
//  - no completed invocation yet: range [user, user], calibrate;
//  - last peak below the user level (over-provisioned): a usage spike
//    (last peak / last allocation >= t, on either resource) forces
//    [user, user] + calibrate on both resources; otherwise
//    [quantize_up(recent peak) + u, user];
//  - last peak at or above the user level (under-provisioned):
//    [quantize_up(recent peak) + u, per-function max].
// Bounds collapse to [hi, hi] when the floor exceeds the branch ceiling.
SafeguardOutcome decide_ranges(const FunctionHistory& history,
                               const Allocation& user_alloc,
                               const ClusterConfig& cfg);

}  // namespace harvestsim
