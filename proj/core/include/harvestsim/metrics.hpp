#pragma once

#include <span>
#include <string>
#include <vector>

#include "harvestsim/types.hpp"

namespace harvestsim {

double slowdown(double response_latency_s, double baseline_latency_s);

double avg_slowdown(std::span<const InvocationRecord> records);

enum class Category { Default, Accelerate, Harvest, Safeguard, Mixed };

const char* category_name(Category c);

// Safeguard wins; otherwise the sign pattern of (allocation - user) decides:
// all zero -> Default, none positive -> Harvest, none negative -> Accelerate,
// both signs -> Mixed.
Category categorize(const InvocationRecord& record, const Allocation& user);

// Nearest-rank order statistic: sorted[floor(p/100 * n)], index clamped.
double percentile(std::vector<double> values, double p);

struct ReportRow {
  int inv_id = 0;
  std::string function_id;
  Category category = Category::Default;
  double slowdown = 0.0;
  double latency_s = 0.0;
  int delta_cpu = 0;
  int delta_mem = 0;
};

struct WorkloadReport {
  std::vector<ReportRow> rows;
  double avg_slowdown = 0.0;
  double p50_latency_s = 0.0;
  double p99_latency_s = 0.0;
  double p99_slowdown = 0.0;
  double share_default = 0.0;
  double share_accelerate = 0.0;
  double share_harvest = 0.0;
  double share_safeguard = 0.0;
  double share_mixed = 0.0;
  double slo_violation_rate = 0.0;  // slowdown > cfg.slo_threshold
  // CDF tables at 1% resolution: index p holds the p-th percentile.
  std::vector<double> latency_cdf;   // 101 entries
  std::vector<double> slowdown_cdf;  // 101 entries
};

WorkloadReport build_report(std::span<const InvocationRecord> records,
                            const ClusterConfig& cfg);

// Writers prepend `header_comment` as a '#' line when non-empty.
void write_report_csv(const WorkloadReport& report, const std::string& path,
                      const std::string& header_comment = "");
void write_aggregates(const WorkloadReport& report, const std::string& path,
                      const std::string& header_comment = "");
void write_cdf_csv(const WorkloadReport& report, const std::string& path,
                   const std::string& header_comment = "");

}  // namespace harvestsim
