#include "harvestsim/perf_model.hpp"

#include <algorithm>
#include <cmath>

namespace harvestsim {

SaturationPoint realize_saturation(const FunctionSpec& spec, double input_scale,
                                   const ClusterConfig& cfg, Rng& rng) {
  if (!(input_scale > 0.0)) {
    throw ContractError("realize_saturation: input_scale must be > 0");
  }
  double jitter_cpu = rng.uniform(-spec.sat_jitter, spec.sat_jitter);
  double jitter_mem = rng.uniform(-spec.sat_jitter, spec.sat_jitter);
  double cpu = spec.sat_cpu_base * input_scale * (1.0 + jitter_cpu);
  double mem = spec.sat_mem_base * input_scale * (1.0 + jitter_mem);
  cpu = std::min(cpu, static_cast<double>(cfg.per_function_max.cpu));
  mem = std::min(mem, static_cast<double>(cfg.per_function_max.mem));
  return SaturationPoint{cpu, mem};
}

double execution_latency(const SaturationPoint& sat, const Allocation& alloc,
                         double saturated_latency_s,
                         const LatencyModelParams& params) {
  if (!(saturated_latency_s > 0.0)) {
    throw ContractError("execution_latency: saturated latency must be > 0");
  }
  double cpu_pressure = std::max(1.0, sat.cpu / static_cast<double>(alloc.cpu));
  double mem_pressure = std::max(1.0, sat.mem / static_cast<double>(alloc.mem));
  return saturated_latency_s * std::pow(cpu_pressure, params.cpu_exponent) *
         std::pow(mem_pressure, params.mem_exponent);
}

PeakUsage usage_peak(const SaturationPoint& sat, const Allocation& alloc) {
  return PeakUsage{std::min(sat.cpu, static_cast<double>(alloc.cpu)),
                   std::min(sat.mem, static_cast<double>(alloc.mem))};
}

namespace {

ResourceLabel classify_one(double sat, int alloc, int unit) {
  if (alloc == quantize_up(sat, unit)) {
    return ResourceLabel::Decent;
  }
  return sat < static_cast<double>(alloc) ? ResourceLabel::Harvestable
                                          : ResourceLabel::Acceleratable;
}

}  // namespace

ResourceClassification classify(const SaturationPoint& sat,
                                const Allocation& alloc,
                                const ClusterConfig& cfg) {
  return ResourceClassification{
      classify_one(sat.cpu, alloc.cpu, cfg.cpu_unit),
      classify_one(sat.mem, alloc.mem, cfg.mem_unit_mb)};
}

}  // namespace harvestsim
