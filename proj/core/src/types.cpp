#include "harvestsim/types.hpp"

#include <cmath>

namespace harvestsim {

bool validate_allocation(const Allocation& alloc, const ClusterConfig& cfg) {
  if (alloc.cpu < cfg.cpu_unit || alloc.cpu > cfg.per_function_max.cpu) {
    return false;
  }
  if (alloc.cpu % cfg.cpu_unit != 0) {
    return false;
  }
  if (alloc.mem < cfg.mem_unit_mb || alloc.mem > cfg.per_function_max.mem) {
    return false;
  }
  if (alloc.mem % cfg.mem_unit_mb != 0) {
    return false;
  }
  return true;
}

void validate(const ClusterConfig& cfg) {
  if (cfg.n_invokers < 1) {
    throw ConfigError("cluster.n_invokers must be >= 1");
  }
  if (cfg.invoker_cpu < 1 || cfg.invoker_mem_mb < 1) {
    throw ConfigError("invoker capacity must be positive");
  }
  if (cfg.cpu_unit < 1 || cfg.mem_unit_mb < 1) {
    throw ConfigError("resource units must be positive");
  }
  if (cfg.per_function_max.cpu > cfg.invoker_cpu ||
      cfg.per_function_max.mem > cfg.invoker_mem_mb) {
    throw ConfigError("per-function cap exceeds invoker capacity");
  }
  if (cfg.per_function_max.cpu < cfg.cpu_unit ||
      cfg.per_function_max.mem < cfg.mem_unit_mb) {
    throw ConfigError("per-function cap below one resource unit");
  }
  if (cfg.per_function_max.mem % cfg.mem_unit_mb != 0) {
    throw ConfigError("per-function memory cap must align to the memory unit");
  }
  if (cfg.safeguard_threshold < 0.0 || cfg.safeguard_threshold > 1.0) {
    throw ConfigError("safeguard.threshold must be in [0, 1]");
  }
  if (cfg.slo_threshold <= 0.0) {
    throw ConfigError("cluster.slo_threshold must be positive");
  }
}

void validate(const FunctionSpec& spec) {
  if (spec.id.empty()) {
    throw ConfigError("function id must be non-empty");
  }
  if (!(spec.base_latency_s > 0.0) || !std::isfinite(spec.base_latency_s)) {
    throw ConfigError("function " + spec.id + ": base_latency_s must be > 0");
  }
  if (!(spec.sat_cpu_base > 0.0) || !(spec.sat_mem_base > 0.0)) {
    throw ConfigError("function " + spec.id + ": saturation bases must be > 0");
  }
  if (spec.cpu_exponent < 0.0 || spec.mem_exponent < 0.0) {
    throw ConfigError("function " + spec.id + ": exponents must be >= 0");
  }
  if (spec.sat_jitter < 0.0 || spec.sat_jitter >= 1.0) {
    throw ConfigError("function " + spec.id + ": sat_jitter must be in [0, 1)");
  }
  if (spec.user_alloc.cpu < 1 || spec.user_alloc.mem < 1) {
    throw ConfigError("function " + spec.id + ": user allocation must be positive");
  }
}

int quantize_up(double value, int unit) {
  if (unit < 1) {
    throw ContractError("quantize_up: unit must be >= 1");
  }
  if (value <= 0.0) {
    return 0;
  }
  double units = std::ceil(value / static_cast<double>(unit));
  return static_cast<int>(units) * unit;
}

}  // namespace harvestsim
