#include "harvestsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "harvestsim/io_util.hpp"

namespace harvestsim {

double slowdown(double response_latency_s, double baseline_latency_s) {
  if (!(baseline_latency_s > 0.0)) {
    throw ContractError("slowdown: baseline latency must be > 0");
  }
  return response_latency_s / baseline_latency_s;
}

double avg_slowdown(std::span<const InvocationRecord> records) {
  if (records.empty()) {
    throw ContractError("avg_slowdown over an empty workload");
  }
  double sum = 0.0;
  for (const InvocationRecord& r : records) {
    sum += r.slowdown;
  }
  return sum / static_cast<double>(records.size());
}

const char* category_name(Category c) {
  switch (c) {
    case Category::Default:
      return "default";
    case Category::Accelerate:
      return "accelerate";
    case Category::Harvest:
      return "harvest";
    case Category::Safeguard:
      return "safeguard";
    case Category::Mixed:
      return "mixed";
  }
  return "?";
}

Category categorize(const InvocationRecord& record, const Allocation& user) {
  if (record.was_safeguard) {
    return Category::Safeguard;
  }
  const int dc = record.allocation.cpu - user.cpu;
  const int dm = record.allocation.mem - user.mem;
  if (dc == 0 && dm == 0) {
    return Category::Default;
  }
  if (dc <= 0 && dm <= 0) {
    return Category::Harvest;
  }
  if (dc >= 0 && dm >= 0) {
    return Category::Accelerate;
  }
  return Category::Mixed;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw ContractError("percentile of an empty set");
  }
  std::sort(values.begin(), values.end());
  auto idx = static_cast<std::size_t>(
      std::floor(p / 100.0 * static_cast<double>(values.size())));
  idx = std::min(idx, values.size() - 1);
  return values[idx];
}

WorkloadReport build_report(std::span<const InvocationRecord> records,
                            const ClusterConfig& cfg) {
  WorkloadReport report;
  if (records.empty()) {
    throw ContractError("report over an empty workload");
  }
  std::vector<double> latencies;
  std::vector<double> slowdowns;
  latencies.reserve(records.size());
  slowdowns.reserve(records.size());
  long counts[5] = {0, 0, 0, 0, 0};
  long violations = 0;
  for (const InvocationRecord& r : records) {
    ReportRow row;
    row.inv_id = r.inv_id;
    row.function_id = r.function_id;
    row.category = categorize(r, r.user_alloc);
    row.slowdown = r.slowdown;
    row.latency_s = r.response_latency_s;
    row.delta_cpu = r.allocation.cpu - r.user_alloc.cpu;
    row.delta_mem = r.allocation.mem - r.user_alloc.mem;
    ++counts[static_cast<int>(row.category)];
    if (r.slowdown > cfg.slo_threshold) {
      ++violations;
    }
    latencies.push_back(r.response_latency_s);
    slowdowns.push_back(r.slowdown);
    report.rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(records.size());
  report.avg_slowdown = avg_slowdown(records);
  report.p50_latency_s = percentile(latencies, 50.0);
  report.p99_latency_s = percentile(latencies, 99.0);
  report.p99_slowdown = percentile(slowdowns, 99.0);
  report.share_default = counts[static_cast<int>(Category::Default)] / n;
  report.share_accelerate = counts[static_cast<int>(Category::Accelerate)] / n;
  report.share_harvest = counts[static_cast<int>(Category::Harvest)] / n;
  report.share_safeguard = counts[static_cast<int>(Category::Safeguard)] / n;
  report.share_mixed = counts[static_cast<int>(Category::Mixed)] / n;
  report.slo_violation_rate = violations / n;
  report.latency_cdf.reserve(101);
  report.slowdown_cdf.reserve(101);
  for (int p = 0; p <= 100; ++p) {
    report.latency_cdf.push_back(percentile(latencies, p));
    report.slowdown_cdf.push_back(percentile(slowdowns, p));
  }
  return report;
}

namespace {

std::ofstream open_out(const std::string& path,
                       const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path);
  }
  if (!header_comment.empty()) {
    out << "# " << header_comment << "\n";
  }
  return out;
}

}  // namespace

void write_report_csv(const WorkloadReport& report, const std::string& path,
                      const std::string& header_comment) {
  auto out = open_out(path, header_comment);
  out << "inv_id,function_id,category,slowdown,latency_s,delta_cpu,delta_mem\n";
  for (const ReportRow& row : report.rows) {
    out << row.inv_id << ',' << row.function_id << ','
        << category_name(row.category) << ',' << format_double(row.slowdown)
        << ',' << format_double(row.latency_s) << ',' << row.delta_cpu << ','
        << row.delta_mem << "\n";
  }
}

void write_aggregates(const WorkloadReport& report, const std::string& path,
                      const std::string& header_comment) {
  auto out = open_out(path, header_comment);
  out << "records=" << report.rows.size() << "\n";
  out << "avg_slowdown=" << format_double(report.avg_slowdown) << "\n";
  out << "p50_latency_s=" << format_double(report.p50_latency_s) << "\n";
  out << "p99_latency_s=" << format_double(report.p99_latency_s) << "\n";
  out << "p99_slowdown=" << format_double(report.p99_slowdown) << "\n";
  out << "share_default=" << format_double(report.share_default) << "\n";
  out << "share_accelerate=" << format_double(report.share_accelerate) << "\n";
  out << "share_harvest=" << format_double(report.share_harvest) << "\n";
  out << "share_safeguard=" << format_double(report.share_safeguard) << "\n";
  out << "share_mixed=" << format_double(report.share_mixed) << "\n";
  out << "slo_violation_rate=" << format_double(report.slo_violation_rate)
      << "\n";
}

void write_cdf_csv(const WorkloadReport& report, const std::string& path,
                   const std::string& header_comment) {
  auto out = open_out(path, header_comment);
  out << "percentile,latency_s,slowdown\n";
  for (int p = 0; p <= 100; ++p) {
    out << p << ',' << format_double(report.latency_cdf[p]) << ','
        << format_double(report.slowdown_cdf[p]) << "\n";
  }
}

}  // namespace harvestsim
