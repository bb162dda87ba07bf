#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "harvestsim/workload.hpp"

using namespace harvestsim;

namespace {

std::map<std::string, FunctionSpec> tiny_catalog() {
  return synthetic_catalog(4);
}

std::string temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("poisson trace hits the target mean inter-arrival time") {
  PoissonTraceOptions opts;
  opts.mean_iat_s = 2.2;
  opts.n_calls = 268;
  opts.seed = 7;
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  REQUIRE(trace.invocations.size() == 268);
  const double mean = sample_mean_iat(trace);
  CHECK(mean >= 1.8);
  CHECK(mean <= 2.6);
  for (std::size_t i = 1; i < trace.invocations.size(); ++i) {
    CHECK(trace.invocations[i - 1].arrival_time_s <=
          trace.invocations[i].arrival_time_s);
  }
  for (const TraceRow& row : trace.invocations) {
    CHECK(trace.catalog.count(row.function_id) == 1);
    CHECK(row.input_scale > 0.0);
  }
}

TEST_CASE("single-call trace arrives at its sampled gap") {
  PoissonTraceOptions opts;
  opts.n_calls = 1;
  opts.seed = 3;
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  REQUIRE(trace.invocations.size() == 1);
  CHECK(trace.invocations[0].arrival_time_s > 0.0);
}

TEST_CASE("trace generation is deterministic in the seed") {
  PoissonTraceOptions opts;
  opts.n_calls = 50;
  opts.seed = 11;
  Trace a = generate_poisson_trace(tiny_catalog(), opts);
  Trace b = generate_poisson_trace(tiny_catalog(), opts);
  REQUIRE(a.invocations.size() == b.invocations.size());
  for (std::size_t i = 0; i < a.invocations.size(); ++i) {
    CHECK(a.invocations[i].function_id == b.invocations[i].function_id);
    CHECK(a.invocations[i].arrival_time_s == b.invocations[i].arrival_time_s);
    CHECK(a.invocations[i].input_scale == b.invocations[i].input_scale);
  }
  opts.seed = 12;
  Trace c = generate_poisson_trace(tiny_catalog(), opts);
  CHECK(a.invocations[0].arrival_time_s != c.invocations[0].arrival_time_s);
}

TEST_CASE("sample mean converges for large traces") {
  PoissonTraceOptions opts;
  opts.mean_iat_s = 2.2;
  opts.n_calls = 10000;
  opts.seed = 42;
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  CHECK(std::abs(sample_mean_iat(trace) / 2.2 - 1.0) < 0.05);
}

TEST_CASE("weighted selection skews the function mix") {
  PoissonTraceOptions opts;
  opts.n_calls = 2000;
  opts.seed = 5;
  opts.weights = {1.0, 0.0, 0.0, 0.0};  // ids sort as f000..f003
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  for (const TraceRow& row : trace.invocations) {
    CHECK(row.function_id == "f000");
  }
  opts.weights = {1.0, 1.0};
  CHECK_THROWS_AS(generate_poisson_trace(tiny_catalog(), opts), ConfigError);
}

TEST_CASE("empty catalog is a configuration error") {
  std::map<std::string, FunctionSpec> empty;
  PoissonTraceOptions opts;
  CHECK_THROWS_AS(generate_poisson_trace(empty, opts), ConfigError);
}

TEST_CASE("rescale_trace scales arrival times") {
  Trace trace;
  trace.catalog = tiny_catalog();
  trace.invocations = {{"f000", 0.0, 1.0}, {"f001", 60.0, 1.0},
                       {"f002", 120.0, 1.0}};
  Trace scaled = rescale_trace(trace, 1.0 / 60.0);
  CHECK(scaled.invocations[0].arrival_time_s == doctest::Approx(0.0));
  CHECK(scaled.invocations[1].arrival_time_s == doctest::Approx(1.0));
  CHECK(scaled.invocations[2].arrival_time_s == doctest::Approx(2.0));

  Trace identity = rescale_trace(trace, 1.0);
  CHECK(identity.invocations[1].arrival_time_s == 60.0);

  Trace doubled = rescale_trace(Trace{{{"f000", 0.0, 1.0}, {"f000", 1.0, 1.0}},
                                      tiny_catalog()},
                                2.0);
  CHECK(doubled.invocations[1].arrival_time_s == 2.0);

  CHECK_THROWS_AS(rescale_trace(trace, 0.0), ContractError);
}

TEST_CASE("rescale round trip restores arrival times within 1e-9") {
  PoissonTraceOptions opts;
  opts.n_calls = 200;
  opts.seed = 9;
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  for (double factor : {3.7, 0.01, 1e6}) {
    Trace round = rescale_trace(rescale_trace(trace, factor), 1.0 / factor);
    for (std::size_t i = 0; i < trace.invocations.size(); ++i) {
      CHECK(std::abs(round.invocations[i].arrival_time_s -
                     trace.invocations[i].arrival_time_s) < 1e-9);
    }
  }
}

TEST_CASE("trace and catalog round trip through CSV exactly") {
  const std::string dir = temp_dir("hsim_workload_csv");
  PoissonTraceOptions opts;
  opts.n_calls = 40;
  opts.seed = 17;
  Trace trace = generate_poisson_trace(tiny_catalog(), opts);
  save_trace(trace, dir + "/trace.csv", "seed=17 config_hash=0");
  save_catalog(trace.catalog, dir + "/catalog.csv", "seed=17 config_hash=0");

  Trace loaded = load_trace(dir + "/trace.csv", dir + "/catalog.csv");
  REQUIRE(loaded.invocations.size() == trace.invocations.size());
  for (std::size_t i = 0; i < trace.invocations.size(); ++i) {
    CHECK(loaded.invocations[i].function_id ==
          trace.invocations[i].function_id);
    CHECK(loaded.invocations[i].arrival_time_s ==
          trace.invocations[i].arrival_time_s);
    CHECK(loaded.invocations[i].input_scale == trace.invocations[i].input_scale);
  }
  CHECK(loaded.catalog.size() == trace.catalog.size());
  CHECK(loaded.catalog.at("f001").base_latency_s ==
        trace.catalog.at("f001").base_latency_s);
}

TEST_CASE("out-of-order trace rows are re-sorted stably") {
  const std::string dir = temp_dir("hsim_workload_sort");
  save_catalog(tiny_catalog(), dir + "/catalog.csv");
  {
    std::ofstream out(dir + "/trace.csv");
    out << "invocation_id,function_id,arrival_time_s,input_scale\n";
    out << "0,f000,5.0,1\n";
    out << "1,f001,2.0,1\n";   // earlier than its predecessor
    out << "2,f002,2.0,1\n";   // ties keep file order
    out << "3,f003,9.0,1\n";
  }
  Trace trace = load_trace(dir + "/trace.csv", dir + "/catalog.csv");
  REQUIRE(trace.invocations.size() == 4);
  CHECK(trace.invocations[0].function_id == "f001");
  CHECK(trace.invocations[1].function_id == "f002");
  CHECK(trace.invocations[2].function_id == "f000");
  CHECK(trace.invocations[3].function_id == "f003");
}

TEST_CASE("malformed trace rows report the line number") {
  const std::string dir = temp_dir("hsim_workload_bad");
  save_catalog(tiny_catalog(), dir + "/catalog.csv");
  {
    std::ofstream out(dir + "/trace.csv");
    out << "invocation_id,function_id,arrival_time_s,input_scale\n";
    out << "0,f000,1.0,1\n";
    out << "1,f000,oops,1\n";
  }
  try {
    load_trace(dir + "/trace.csv", dir + "/catalog.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("trace rows naming unknown functions are rejected") {
  const std::string dir = temp_dir("hsim_workload_unknown");
  save_catalog(tiny_catalog(), dir + "/catalog.csv");
  {
    std::ofstream out(dir + "/trace.csv");
    out << "invocation_id,function_id,arrival_time_s,input_scale\n";
    out << "0,ghost,1.0,1\n";
  }
  CHECK_THROWS_AS(load_trace(dir + "/trace.csv", dir + "/catalog.csv"),
                  ParseError);
}

TEST_CASE("catalog loader enforces header and field count") {
  const std::string dir = temp_dir("hsim_workload_catalog");
  {
    std::ofstream out(dir + "/catalog.csv");
    out << "function_id,user_cpu\n";
  }
  CHECK_THROWS_AS(load_catalog(dir + "/catalog.csv"), ParseError);
  {
    std::ofstream out(dir + "/catalog.csv");
    out << "function_id,user_cpu_cores,user_mem_mb,base_latency_s,sat_cpu_base,"
           "sat_mem_base,cpu_exponent,mem_exponent,sat_jitter\n";
    out << "f,4,512,10\n";
  }
  CHECK_THROWS_AS(load_catalog(dir + "/catalog.csv"), ParseError);
}

TEST_CASE("synthetic catalog keeps one over-provisioned resource everywhere") {
  auto catalog = synthetic_catalog(8);
  REQUIRE(catalog.size() == 8);
  for (const auto& [id, spec] : catalog) {
    // Worst case realized demand at max input scale and +jitter.
    const double worst_mem = spec.sat_mem_base * 2.0 * (1.0 + spec.sat_jitter);
    const double worst_cpu = spec.sat_cpu_base * 2.0 * (1.0 + spec.sat_jitter);
    const bool mem_over = worst_mem < spec.user_alloc.mem;
    const bool cpu_over = worst_cpu < spec.user_alloc.cpu;
    CHECK((mem_over || cpu_over));
  }
}
