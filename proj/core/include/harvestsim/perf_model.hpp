#pragma once

#include "harvestsim/rng.hpp"
#include "harvestsim/types.hpp"

namespace harvestsim {

// Sub-saturation degradation slopes of the latency model.
struct LatencyModelParams {
  double cpu_exponent = 1.0;
  double mem_exponent = 1.0;
};

// Per-resource position of an invocation's demand relative to its grant.
enum class ResourceLabel { Harvestable, Acceleratable, Decent };

struct ResourceClassification {
  ResourceLabel cpu = ResourceLabel::Decent;
  ResourceLabel mem = ResourceLabel::Decent;
};

// Demand realized by one invocation: base demand scaled by the input size,
// jittered by +/- sat_jitter, clamped to (0, per-function cap].
SaturationPoint realize_saturation(const FunctionSpec& spec, double input_scale,
                                   const ClusterConfig& cfg, Rng& rng);

// Latency of one execution. `saturated_latency_s` is the latency this
// invocation would see with demand fully met (base latency x input scale);
// each under-provisioned resource multiplies it by (demand/grant)^exponent.
// Flat beyond the saturation point.
double execution_latency(const SaturationPoint& sat, const Allocation& alloc,
                         double saturated_latency_s,
                         const LatencyModelParams& params);

// Usage peak observed over the execution: demand capped at the grant.
PeakUsage usage_peak(const SaturationPoint& sat, const Allocation& alloc);

// Decent means the grant equals the demand rounded up to the resource unit;
// below that is Acceleratable, above it Harvestable.
ResourceClassification classify(const SaturationPoint& sat,
                                const Allocation& alloc,
                                const ClusterConfig& cfg);

}  // namespace harvestsim
