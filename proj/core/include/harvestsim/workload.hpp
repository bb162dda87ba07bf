#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "harvestsim/types.hpp"

namespace harvestsim {

struct TraceRow {
  std::string function_id;
  double arrival_time_s = 0.0;
  double input_scale = 1.0;
};

// A workload: time-ordered arrivals plus the catalog they reference.
struct Trace {
  std::vector<TraceRow> invocations;            // non-decreasing arrival times
  std::map<std::string, FunctionSpec> catalog;  // keyed by function id
};

struct PoissonTraceOptions {
  double mean_iat_s = 2.2;
  int n_calls = 250;
  std::uint64_t seed = 0;
  double input_scale_min = 0.5;  // input scale drawn log-uniformly
  double input_scale_max = 2.0;
  // Optional selection weights, aligned with the catalog's id order.
  // Empty means uniform.
  std::vector<double> weights;
};

// Exponential inter-arrival gaps; function ids drawn from the catalog.
// Deterministic for a fixed seed.
Trace generate_poisson_trace(const std::map<std::string, FunctionSpec>& catalog,
                             const PoissonTraceOptions& opts);

// All arrival times multiplied by `factor` (> 0); ordering preserved.
Trace rescale_trace(Trace trace, double factor);

// CSV I/O. Headers are fixed:
//   trace:   invocation_id,function_id,arrival_time_s,input_scale
//   catalog: function_id,user_cpu_cores,user_mem_mb,base_latency_s,
//            sat_cpu_base,sat_mem_base,cpu_exponent,mem_exponent,sat_jitter
// Leading '#' comment lines are skipped on read and may be passed as
// `header_comment` (without the '#') on write.
std::map<std::string, FunctionSpec> load_catalog(const std::string& path);
Trace load_trace(const std::string& trace_path,
                 const std::string& catalog_path);

void save_catalog(const std::map<std::string, FunctionSpec>& catalog,
                  const std::string& path,
                  const std::string& header_comment = "");
void save_trace(const Trace& trace, const std::string& path,
                const std::string& header_comment = "");

// Deterministic synthetic catalog of n functions cycling through four
// profiles: two over-provisioned on both resources, two CPU-hungry with
// generous user memory. Every function keeps at least one strictly
// over-provisioned resource at any realized input scale.
std::map<std::string, FunctionSpec> synthetic_catalog(int n_functions);

double sample_mean_iat(const Trace& trace);

}  // namespace harvestsim
