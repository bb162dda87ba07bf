#include "harvestsim/sim_engine.hpp"

#include <algorithm>
#include <deque>
#include <queue>

#include "harvestsim/io_util.hpp"
#include "harvestsim/metrics.hpp"
#include "harvestsim/perf_model.hpp"
#include "harvestsim/rng.hpp"

namespace harvestsim {

std::optional<int> pick_invoker(std::span<const Invoker> invokers,
                                const Allocation& alloc) {
  for (const Invoker& inv : invokers) {
    if (inv.available_cpu >= alloc.cpu && inv.available_mem_mb >= alloc.mem) {
      return inv.id;
    }
  }
  return std::nullopt;
}

InvokerPool::InvokerPool(const ClusterConfig& cfg) {
  invokers_.reserve(static_cast<std::size_t>(cfg.n_invokers));
  for (int i = 0; i < cfg.n_invokers; ++i) {
    invokers_.push_back(Invoker{i, cfg.invoker_cpu, cfg.invoker_mem_mb,
                                cfg.invoker_cpu, cfg.invoker_mem_mb});
  }
  allocated_.assign(invokers_.size(), Allocation{0, 0});
}

std::optional<int> InvokerPool::schedule(const Allocation& alloc) {
  auto id = pick_invoker(invokers_, alloc);
  if (id.has_value()) {
    Invoker& inv = invokers_[static_cast<std::size_t>(*id)];
    inv.available_cpu -= alloc.cpu;
    inv.available_mem_mb -= alloc.mem;
    allocated_[static_cast<std::size_t>(*id)].cpu += alloc.cpu;
    allocated_[static_cast<std::size_t>(*id)].mem += alloc.mem;
  }
  return id;
}

void InvokerPool::release(int invoker_id, const Allocation& alloc) {
  Invoker& inv = invokers_.at(static_cast<std::size_t>(invoker_id));
  inv.available_cpu += alloc.cpu;
  inv.available_mem_mb += alloc.mem;
  allocated_[static_cast<std::size_t>(invoker_id)].cpu -= alloc.cpu;
  allocated_[static_cast<std::size_t>(invoker_id)].mem -= alloc.mem;
}

PlatformState InvokerPool::snapshot(double clock_s, int inflight) const {
  PlatformState state;
  state.clock_s = clock_s;
  state.inflight_request_num = inflight;
  for (const Invoker& inv : invokers_) {
    state.avail_cpu += inv.available_cpu;
    state.avail_mem_mb += inv.available_mem_mb;
  }
  return state;
}

void InvokerPool::check_conservation() const {
  for (std::size_t i = 0; i < invokers_.size(); ++i) {
    const Invoker& inv = invokers_[i];
    bool ok = inv.available_cpu + allocated_[i].cpu == inv.capacity_cpu &&
              inv.available_mem_mb + allocated_[i].mem == inv.capacity_mem_mb &&
              inv.available_cpu >= 0 && inv.available_mem_mb >= 0 &&
              inv.available_cpu <= inv.capacity_cpu &&
              inv.available_mem_mb <= inv.capacity_mem_mb;
    if (!ok) {
      throw ContractError("invoker " + std::to_string(inv.id) +
                          " books do not balance");
    }
  }
}

Engine::Engine(ClusterConfig cfg) : cfg_(cfg) { validate(cfg_); }

namespace {

enum class EventKind { Completion = 0, Arrival = 1 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  int inv_id = 0;
};

// priority_queue keeps the *greatest* element on top; order reversed.
struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.inv_id > b.inv_id;
  }
};

}  // namespace

EpisodeResult Engine::run(const Trace& trace, ResourceManager& manager,
                          std::ostream* event_log) {
  for (const auto& [id, spec] : trace.catalog) {
    validate(spec);
    if (!validate_allocation(spec.user_alloc, cfg_)) {
      throw ConfigError("function " + id +
                        ": user allocation violates cluster limits");
    }
  }
  for (const TraceRow& row : trace.invocations) {
    if (!trace.catalog.count(row.function_id)) {
      throw ConfigError("trace references unknown function '" +
                        row.function_id + "'");
    }
  }

  const std::size_t n = trace.invocations.size();
  std::vector<Invocation> invocations(n);
  std::vector<Allocation> decided_alloc(n);
  std::vector<double> exec_latency(n, 0.0);
  std::vector<int> host(n, -1);

  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  for (std::size_t i = 0; i < n; ++i) {
    const TraceRow& row = trace.invocations[i];
    Invocation& inv = invocations[i];
    inv.inv_id = static_cast<int>(i);
    inv.function_id = row.function_id;
    inv.arrival_time_s = row.arrival_time_s;
    inv.input_scale = row.input_scale;
    events.push(Event{row.arrival_time_s, EventKind::Arrival, inv.inv_id});
  }

  InvokerPool pool(cfg_);
  std::map<std::string, FunctionHistory> histories;
  std::deque<int> wait_queue;
  EpisodeResult result;
  result.records.reserve(n);
  result.decisions.reserve(n);
  int in_system = 0;
  std::uint64_t event_seq = 0;

  auto log_event = [&](const char* kind, double clock, const Invocation& inv,
                       const Allocation& alloc) {
    if (event_log != nullptr) {
      *event_log << kind << ',' << format_double(clock) << ',' << inv.inv_id
                 << ',' << inv.function_id << ',' << alloc.cpu << ','
                 << alloc.mem << '\n';
    }
  };

  // Starts a running invocation on `invoker`; completion gets enqueued.
  auto start = [&](int id, int invoker, double clock) {
    Invocation& inv = invocations[static_cast<std::size_t>(id)];
    const FunctionSpec& spec = trace.catalog.at(inv.function_id);
    inv.state = InvocationState::Running;
    inv.allocation = decided_alloc[static_cast<std::size_t>(id)];
    inv.start_time_s = clock;
    host[static_cast<std::size_t>(id)] = invoker;
    const double saturated = spec.base_latency_s * inv.input_scale;
    const LatencyModelParams params{spec.cpu_exponent, spec.mem_exponent};
    const double exec =
        execution_latency(inv.saturation, *inv.allocation, saturated, params);
    exec_latency[static_cast<std::size_t>(id)] = exec;
    inv.finish_time_s = clock + exec;
    events.push(Event{clock + exec, EventKind::Completion, id});
  };

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    ++event_seq;
    Invocation& inv = invocations[static_cast<std::size_t>(ev.inv_id)];
    const FunctionSpec& spec = trace.catalog.at(inv.function_id);
    FunctionHistory& history = histories[inv.function_id];

    if (ev.kind == EventKind::Arrival) {
      ++in_system;
      // Saturation is a property of the invocation, not of the manager's
      // behavior: derive its noise stream from the invocation id so the
      // same trace+seed realizes identical demand under every manager.
      Rng sat_rng(mix_seed(cfg_.rng_seed, static_cast<std::uint64_t>(
                                              inv.inv_id)));
      inv.saturation =
          realize_saturation(spec, inv.input_scale, cfg_, sat_rng);

      if (history.arrival_count > 0) {
        const double gap = ev.time - history.last_arrival_time_s;
        const double gaps = static_cast<double>(history.arrival_count);
        history.avg_interval_s =
            (history.avg_interval_s * (gaps - 1.0) + gap) / gaps;
      }
      history.last_arrival_time_s = ev.time;
      ++history.arrival_count;

      AllocationRequest req;
      req.inv_id = inv.inv_id;
      req.function_id = inv.function_id;
      req.arrival_time_s = ev.time;
      req.history = &history;
      req.platform = pool.snapshot(ev.time, in_system);
      req.user_alloc = spec.user_alloc;

      ManagerDecision md = manager.on_arrival(req);
      if (!validate_allocation(md.allocation, cfg_)) {
        throw ContractError("manager '" + std::string(manager.name()) +
                            "' returned invalid allocation (" +
                            std::to_string(md.allocation.cpu) + ", " +
                            std::to_string(md.allocation.mem) + ")");
      }
      const bool calibrate =
          md.calibrate_baseline || !history.baseline_latency_s.has_value();
      if (calibrate && !(md.allocation == spec.user_alloc)) {
        throw ContractError("calibration invocation of '" + inv.function_id +
                            "' must run at the user allocation");
      }
      inv.is_safeguard_invocation = calibrate;
      decided_alloc[static_cast<std::size_t>(ev.inv_id)] = md.allocation;

      DecisionLogEntry entry;
      entry.event_seq = event_seq;
      entry.inv_id = inv.inv_id;
      entry.function_id = inv.function_id;
      entry.arrival_time_s = ev.time;
      entry.user_alloc = spec.user_alloc;
      entry.allocation = md.allocation;
      entry.was_safeguard = calibrate;
      entry.had_history = history.last_record.has_value();
      if (entry.had_history) {
        entry.prev_peak = history.last_record->peak;
        entry.prev_alloc = history.last_record->allocation;
      }
      entry.recent_peak = history.recent_peak;
      entry.safeguard = md.safeguard;
      entry.policy = std::move(md.policy);
      result.decisions.push_back(std::move(entry));

      log_event("arrival", ev.time, inv, md.allocation);

      if (wait_queue.empty()) {
        auto invoker = pool.schedule(md.allocation);
        if (invoker.has_value()) {
          start(ev.inv_id, *invoker, ev.time);
        } else {
          wait_queue.push_back(ev.inv_id);
        }
      } else {
        // Someone is already waiting; keep strict FIFO order.
        wait_queue.push_back(ev.inv_id);
      }
    } else {
      // Completion.
      pool.release(host[static_cast<std::size_t>(ev.inv_id)], *inv.allocation);
      inv.state = InvocationState::Completed;
      --in_system;

      InvocationRecord record;
      record.inv_id = inv.inv_id;
      record.function_id = inv.function_id;
      record.allocation = *inv.allocation;
      record.user_alloc = spec.user_alloc;
      record.peak = usage_peak(inv.saturation, *inv.allocation);
      record.execution_latency_s =
          exec_latency[static_cast<std::size_t>(ev.inv_id)];
      // Queue wait plus execution, not finish minus arrival: the sum form
      // keeps a wait of zero exactly out of the latency.
      record.response_latency_s =
          (*inv.start_time_s - inv.arrival_time_s) + record.execution_latency_s;
      record.arrival_time_s = inv.arrival_time_s;
      record.start_time_s = *inv.start_time_s;
      record.finish_time_s = ev.time;
      record.was_safeguard = inv.is_safeguard_invocation;
      record.completion_seq = event_seq;
      // Slowdown normalizes against this same invocation run queue-free at
      // the user allocation, so Fixed runs sit at exactly 1.0.
      const double saturated = spec.base_latency_s * inv.input_scale;
      const LatencyModelParams params{spec.cpu_exponent, spec.mem_exponent};
      const double baseline_latency =
          execution_latency(inv.saturation, spec.user_alloc, saturated, params);
      record.slowdown = slowdown(record.response_latency_s, baseline_latency);

      ++history.invocation_count;
      const double k = static_cast<double>(history.invocation_count);
      history.avg_cpu_peak =
          (history.avg_cpu_peak * (k - 1.0) + record.peak.cpu) / k;
      history.avg_mem_peak =
          (history.avg_mem_peak * (k - 1.0) + record.peak.mem) / k;
      history.avg_execution_time_s =
          (history.avg_execution_time_s * (k - 1.0) +
           record.response_latency_s) /
          k;
      if (inv.is_safeguard_invocation) {
        history.baseline_latency_s = record.response_latency_s;
        history.recent_peak = record.peak;  // new calibration window
      } else {
        history.recent_peak.cpu =
            std::max(history.recent_peak.cpu, record.peak.cpu);
        history.recent_peak.mem =
            std::max(history.recent_peak.mem, record.peak.mem);
      }
      history.last_record = record;

      log_event("completion", ev.time, inv, *inv.allocation);
      result.records.push_back(std::move(record));

      // Head-of-line FIFO: later arrivals never overtake a waiting one.
      while (!wait_queue.empty()) {
        int head = wait_queue.front();
        auto invoker =
            pool.schedule(decided_alloc[static_cast<std::size_t>(head)]);
        if (!invoker.has_value()) {
          break;
        }
        wait_queue.pop_front();
        start(head, *invoker, ev.time);
      }
    }

    pool.check_conservation();
    ++result.conservation_checks;
  }

  if (result.records.size() != n) {
    throw ContractError("engine lost invocations: " +
                        std::to_string(result.records.size()) + " of " +
                        std::to_string(n));
  }
  result.event_count = event_seq;
  result.final_history = std::move(histories);
  return result;
}

}  // namespace harvestsim
