#include "harvestsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "harvestsim/io_util.hpp"
#include "harvestsim/rng.hpp"

namespace harvestsim {

namespace {

const char* kTraceHeader = "invocation_id,function_id,arrival_time_s,input_scale";
const char* kCatalogHeader =
    "function_id,user_cpu_cores,user_mem_mb,base_latency_s,sat_cpu_base,"
    "sat_mem_base,cpu_exponent,mem_exponent,sat_jitter";

void expect_header(CsvReader& reader, const char* expected) {
  std::string line;
  if (!reader.next(line) || line != expected) {
    throw ParseError(reader.path() + ": expected header '" +
                     std::string(expected) + "'");
  }
}

}  // namespace

Trace generate_poisson_trace(const std::map<std::string, FunctionSpec>& catalog,
                             const PoissonTraceOptions& opts) {
  if (catalog.empty()) {
    throw ConfigError("trace generation requires a non-empty catalog");
  }
  if (!(opts.mean_iat_s > 0.0)) {
    throw ConfigError("mean inter-arrival time must be > 0");
  }
  if (opts.n_calls < 1) {
    throw ConfigError("trace must contain at least one call");
  }
  if (!(opts.input_scale_min > 0.0) ||
      opts.input_scale_max < opts.input_scale_min) {
    throw ConfigError("input scale range must satisfy 0 < min <= max");
  }

  std::vector<std::string> ids;
  ids.reserve(catalog.size());
  for (const auto& [id, spec] : catalog) {
    ids.push_back(id);
  }
  std::vector<double> cumulative;
  if (!opts.weights.empty()) {
    if (opts.weights.size() != ids.size()) {
      throw ConfigError("selection weights must match catalog size");
    }
    double total = 0.0;
    for (double w : opts.weights) {
      if (w < 0.0) {
        throw ConfigError("selection weights must be non-negative");
      }
      total += w;
      cumulative.push_back(total);
    }
    if (!(total > 0.0)) {
      throw ConfigError("selection weights must not all be zero");
    }
  }

  Rng rng(opts.seed);
  Trace trace;
  trace.catalog = catalog;
  trace.invocations.reserve(static_cast<std::size_t>(opts.n_calls));
  double clock = 0.0;
  for (int i = 0; i < opts.n_calls; ++i) {
    clock += rng.exponential(opts.mean_iat_s);
    std::size_t pick;
    if (cumulative.empty()) {
      pick = rng.index(ids.size());
    } else {
      double u = rng.uniform01() * cumulative.back();
      pick = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin());
      pick = std::min(pick, ids.size() - 1);
    }
    double scale = opts.input_scale_min == opts.input_scale_max
                       ? opts.input_scale_min
                       : rng.log_uniform(opts.input_scale_min,
                                         opts.input_scale_max);
    trace.invocations.push_back(TraceRow{ids[pick], clock, scale});
  }
  return trace;
}

Trace rescale_trace(Trace trace, double factor) {
  if (!(factor > 0.0)) {
    throw ContractError("rescale_trace: factor must be > 0");
  }
  for (TraceRow& row : trace.invocations) {
    row.arrival_time_s *= factor;
  }
  return trace;
}

std::map<std::string, FunctionSpec> load_catalog(const std::string& path) {
  CsvReader reader(path);
  expect_header(reader, kCatalogHeader);
  std::map<std::string, FunctionSpec> catalog;
  std::string line;
  while (reader.next(line)) {
    std::string context = path + ":" + std::to_string(reader.line_number());
    auto fields = split_csv_line(line);
    if (fields.size() != 9) {
      throw ParseError(context + ": expected 9 fields, got " +
                       std::to_string(fields.size()));
    }
    FunctionSpec spec;
    spec.id = fields[0];
    spec.user_alloc.cpu = static_cast<int>(parse_long(fields[1], context));
    spec.user_alloc.mem = static_cast<int>(parse_long(fields[2], context));
    spec.base_latency_s = parse_double(fields[3], context);
    spec.sat_cpu_base = parse_double(fields[4], context);
    spec.sat_mem_base = parse_double(fields[5], context);
    spec.cpu_exponent = parse_double(fields[6], context);
    spec.mem_exponent = parse_double(fields[7], context);
    spec.sat_jitter = parse_double(fields[8], context);
    validate(spec);
    if (!catalog.emplace(spec.id, spec).second) {
      throw ParseError(context + ": duplicate function id '" + spec.id + "'");
    }
  }
  if (catalog.empty()) {
    throw ParseError(path + ": catalog has no functions");
  }
  return catalog;
}

Trace load_trace(const std::string& trace_path,
                 const std::string& catalog_path) {
  Trace trace;
  trace.catalog = load_catalog(catalog_path);

  CsvReader reader(trace_path);
  expect_header(reader, kTraceHeader);
  std::string line;
  while (reader.next(line)) {
    std::string context =
        trace_path + ":" + std::to_string(reader.line_number());
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ParseError(context + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    parse_long(fields[0], context);  // ids are reassigned sequentially
    TraceRow row;
    row.function_id = fields[1];
    row.arrival_time_s = parse_double(fields[2], context);
    row.input_scale = parse_double(fields[3], context);
    if (!trace.catalog.count(row.function_id)) {
      throw ParseError(context + ": unknown function id '" + row.function_id +
                       "'");
    }
    if (!(row.input_scale > 0.0)) {
      throw ParseError(context + ": input_scale must be > 0");
    }
    if (row.arrival_time_s < 0.0) {
      throw ParseError(context + ": arrival_time_s must be >= 0");
    }
    trace.invocations.push_back(std::move(row));
  }
  std::stable_sort(trace.invocations.begin(), trace.invocations.end(),
                   [](const TraceRow& a, const TraceRow& b) {
                     return a.arrival_time_s < b.arrival_time_s;
                   });
  return trace;
}

void save_catalog(const std::map<std::string, FunctionSpec>& catalog,
                  const std::string& path, const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path);
  }
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << kCatalogHeader << "\n";
  for (const auto& [id, spec] : catalog) {
    out << id << ',' << spec.user_alloc.cpu << ',' << spec.user_alloc.mem << ','
        << format_double(spec.base_latency_s) << ','
        << format_double(spec.sat_cpu_base) << ','
        << format_double(spec.sat_mem_base) << ','
        << format_double(spec.cpu_exponent) << ','
        << format_double(spec.mem_exponent) << ','
        << format_double(spec.sat_jitter) << "\n";
  }
}

void save_trace(const Trace& trace, const std::string& path,
                const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path);
  }
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  out << kTraceHeader << "\n";
  for (std::size_t i = 0; i < trace.invocations.size(); ++i) {
    const TraceRow& row = trace.invocations[i];
    out << i << ',' << row.function_id << ','
        << format_double(row.arrival_time_s) << ','
        << format_double(row.input_scale) << "\n";
  }
}

std::map<std::string, FunctionSpec> synthetic_catalog(int n_functions) {
  if (n_functions < 1) {
    throw ConfigError("catalog must contain at least one function");
  }
  // Four profiles; CPU-hungry ones keep memory strictly over-provisioned at
  // any input scale in [0.5, 2] with 10% jitter.
  struct Profile {
    Allocation user;
    double base_latency;
    double sat_cpu;
    double sat_mem;
  };
  const Profile profiles[4] = {
      {{4, 512}, 8.0, 1.2, 150.0},    // idle CPU and memory
      {{2, 512}, 10.0, 5.0, 160.0},   // CPU-starved, idle memory
      {{8, 1024}, 12.0, 2.5, 320.0},  // idle CPU and memory, large
      {{2, 1024}, 6.0, 6.0, 256.0},   // CPU-starved, idle memory
  };
  std::map<std::string, FunctionSpec> catalog;
  for (int i = 0; i < n_functions; ++i) {
    const Profile& p = profiles[i % 4];
    FunctionSpec spec;
    char id[16];
    std::snprintf(id, sizeof(id), "f%03d", i);
    spec.id = id;
    spec.user_alloc = p.user;
    spec.base_latency_s = p.base_latency + 0.5 * (i / 4);
    spec.sat_cpu_base = p.sat_cpu;
    spec.sat_mem_base = p.sat_mem;
    spec.cpu_exponent = 1.0;
    spec.mem_exponent = 1.0;
    spec.sat_jitter = 0.1;
    validate(spec);
    catalog.emplace(spec.id, spec);
  }
  return catalog;
}

double sample_mean_iat(const Trace& trace) {
  if (trace.invocations.empty()) {
    return 0.0;
  }
  // First gap is from time zero; every arrival contributes one gap.
  return trace.invocations.back().arrival_time_s /
         static_cast<double>(trace.invocations.size());
}

}  // namespace harvestsim
