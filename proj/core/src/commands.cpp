#include "harvestsim/commands.hpp"

#include <filesystem>
#include <fstream>
#include <memory>

#include "harvestsim/freyr_manager.hpp"
#include "harvestsim/io_util.hpp"
#include "harvestsim/metrics.hpp"
#include "harvestsim/sim_engine.hpp"
#include "harvestsim/trainer.hpp"

namespace harvestsim {

namespace {

// Seed stream salts (one per independent random purpose).
constexpr std::uint64_t kSaltEvalTrace = 1;
constexpr std::uint64_t kSaltTrainTrace = 2;
constexpr std::uint64_t kSaltActorInit = 3;
constexpr std::uint64_t kSaltCriticInit = 4;
constexpr std::uint64_t kSaltFreyrSample = 5;

const std::vector<int> kNetDims = {kStateDims, 32, 16, 1};

std::string ensure_out_dir(const std::string& dir) {
  std::string out = dir.empty() ? "." : dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    throw ConfigError("cannot create output directory '" + out +
                      "': " + ec.message());
  }
  return out;
}

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed.has_value()) {
    throw ConfigError("seed is mandatory (config key 'seed' or --seed)");
  }
  return *cfg.seed;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> weights;
  if (text.empty()) {
    return weights;
  }
  for (const std::string& field : split_csv_line(text)) {
    weights.push_back(parse_double(field, "workload.weights"));
  }
  return weights;
}

// Explicit trace files when configured, otherwise a generated workload over
// the synthetic catalog, seeded from the run seed.
Trace resolve_trace(const RunConfig& cfg) {
  if (!cfg.workload_trace.empty() || !cfg.workload_catalog.empty()) {
    if (cfg.workload_trace.empty() || cfg.workload_catalog.empty()) {
      throw ConfigError(
          "workload.trace and workload.catalog must be set together");
    }
    if (!std::filesystem::exists(cfg.workload_trace)) {
      throw ConfigError("workload.trace not found: " + cfg.workload_trace);
    }
    if (!std::filesystem::exists(cfg.workload_catalog)) {
      throw ConfigError("workload.catalog not found: " + cfg.workload_catalog);
    }
    return load_trace(cfg.workload_trace, cfg.workload_catalog);
  }
  PoissonTraceOptions opts;
  opts.mean_iat_s = cfg.workload_mean_iat_s;
  opts.n_calls = cfg.workload_calls;
  opts.seed = mix_seed(require_seed(cfg), kSaltEvalTrace);
  opts.input_scale_min = cfg.workload_scale_min;
  opts.input_scale_max = cfg.workload_scale_max;
  opts.weights = parse_weights(cfg.workload_weights);
  return generate_poisson_trace(synthetic_catalog(cfg.workload_functions),
                                opts);
}

DecisionMode freyr_mode(const RunConfig& cfg) {
  return cfg.freyr_mode == "sample" ? DecisionMode::Sample
                                    : DecisionMode::Greedy;
}

std::pair<Mlp, Mlp> load_freyr_checkpoint(const RunConfig& cfg) {
  if (cfg.freyr_checkpoint_path.empty()) {
    throw ConfigError("manager freyr requires freyr.checkpoint_path");
  }
  const std::string actor_path = cfg.freyr_checkpoint_path + ".actor";
  const std::string critic_path = cfg.freyr_checkpoint_path + ".critic";
  if (!std::filesystem::exists(actor_path) ||
      !std::filesystem::exists(critic_path)) {
    throw ConfigError("checkpoint files not found at stem '" +
                      cfg.freyr_checkpoint_path + "'");
  }
  return {Mlp::load(actor_path), Mlp::load(critic_path)};
}

std::unique_ptr<ResourceManager> build_manager(const RunConfig& cfg,
                                               const ClusterConfig& cluster) {
  if (cfg.manager == "fixed") {
    return std::make_unique<FixedManager>();
  }
  if (cfg.manager == "greedy") {
    return std::make_unique<GreedyManager>(cluster, cfg.greedy_over_threshold,
                                           cfg.greedy_under_threshold);
  }
  if (cfg.manager == "ensure") {
    return std::make_unique<EnsureManager>(cluster,
                                           cfg.ensure_degradation_factor);
  }
  if (cfg.manager == "freyr") {
    auto [actor, critic] = load_freyr_checkpoint(cfg);
    return std::make_unique<FreyrManager>(
        std::move(actor), std::move(critic), freyr_mode(cfg), cluster,
        mix_seed(require_seed(cfg), kSaltFreyrSample));
  }
  throw ConfigError("unknown manager '" + cfg.manager + "'");
}

}  // namespace

void cmd_gen_trace(const GenTraceOptions& opts, std::ostream& out) {
  if (opts.calls < 1) {
    throw ConfigError("--calls must be >= 1");
  }
  if (!(opts.mean_iat_s > 0.0)) {
    throw ConfigError("--mean-iat must be > 0");
  }
  if (opts.functions < 1) {
    throw ConfigError("--functions must be >= 1");
  }
  const std::string dir = ensure_out_dir(opts.out_dir);

  auto catalog = synthetic_catalog(opts.functions);
  PoissonTraceOptions gen;
  gen.mean_iat_s = opts.mean_iat_s;
  gen.n_calls = opts.calls;
  gen.seed = opts.seed;
  gen.input_scale_min = opts.scale_min;
  gen.input_scale_max = opts.scale_max;
  Trace trace = generate_poisson_trace(catalog, gen);

  std::string canonical =
      "calls=" + std::to_string(opts.calls) +
      " mean_iat_s=" + format_double(opts.mean_iat_s) +
      " functions=" + std::to_string(opts.functions) +
      " scale_min=" + format_double(opts.scale_min) +
      " scale_max=" + format_double(opts.scale_max);
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  std::string header = "seed=" + std::to_string(opts.seed) +
                       " config_hash=" + std::string(hash_hex);

  save_trace(trace, dir + "/trace.csv", header);
  save_catalog(catalog, dir + "/catalog.csv", header);

  const double mean_iat = sample_mean_iat(trace);
  out << "trace=" << dir << "/trace.csv catalog=" << dir << "/catalog.csv\n";
  out << "calls=" << trace.invocations.size()
      << " avg_iat_s=" << format_double(mean_iat)
      << " reqs_per_sec=" << format_double(mean_iat > 0 ? 1.0 / mean_iat : 0.0)
      << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  const std::string dir = ensure_out_dir(cfg.out_dir);
  validate(cfg.cluster);

  PpoConfig ppo;
  ppo.epochs_per_update = cfg.train_epochs;
  ppo.clip = cfg.train_clip;
  ppo.gamma = cfg.train_gamma;
  ppo.lr = cfg.train_lr;
  ppo.episodes = cfg.train_episodes;
  ppo.reward_bonus = cfg.train_reward_bonus;
  ppo.seed = seed;
  ppo.checkpoint_every = cfg.train_checkpoint_every;
  validate(ppo);

  std::unique_ptr<TraceSource> source;
  if (!cfg.workload_trace.empty() || !cfg.workload_catalog.empty()) {
    if (cfg.workload_trace.empty() || cfg.workload_catalog.empty()) {
      throw ConfigError(
          "workload.trace and workload.catalog must be set together");
    }
    source = std::make_unique<FixedTraceSource>(
        load_trace(cfg.workload_trace, cfg.workload_catalog));
  } else {
    PoissonTraceOptions opts;
    opts.mean_iat_s = cfg.workload_mean_iat_s;
    opts.n_calls = cfg.workload_calls;
    opts.seed = mix_seed(seed, kSaltTrainTrace);
    opts.input_scale_min = cfg.workload_scale_min;
    opts.input_scale_max = cfg.workload_scale_max;
    opts.weights = parse_weights(cfg.workload_weights);
    source = std::make_unique<GeneratedTraceSource>(
        synthetic_catalog(cfg.workload_functions), opts);
  }

  const std::string stem = cfg.freyr_checkpoint_path.empty()
                               ? dir + "/ckpt"
                               : cfg.freyr_checkpoint_path;
  Mlp actor;
  Mlp critic;
  const bool resume = std::filesystem::exists(stem + ".actor") &&
                      std::filesystem::exists(stem + ".critic");
  if (resume) {
    actor = Mlp::load(stem + ".actor");
    critic = Mlp::load(stem + ".critic");
    out << "resuming from checkpoint stem " << stem << "\n";
  } else {
    actor = Mlp::initialized(kNetDims, mix_seed(seed, kSaltActorInit));
    critic = Mlp::initialized(kNetDims, mix_seed(seed, kSaltCriticInit));
  }

  std::ofstream log(dir + "/training_log.csv", std::ios::binary);
  if (!log) {
    throw ConfigError("cannot write training log in " + dir);
  }
  TrainResult result = train(*source, ppo, cfg.cluster, std::move(actor),
                             std::move(critic), stem, &log,
                             run_header_comment(cfg));
  out << "episodes=" << result.log.size() << " checkpoint=" << stem
      << ".actor/.critic log=" << dir << "/training_log.csv\n";
  if (!result.log.empty()) {
    out << "final_reward=" << format_double(result.log.back().cumulative_reward)
        << " final_avg_slowdown="
        << format_double(result.log.back().avg_slowdown) << "\n";
  }
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  const std::string dir = ensure_out_dir(cfg.out_dir);

  ClusterConfig cluster = cfg.cluster;
  cluster.rng_seed = seed;
  validate(cluster);

  Trace trace = resolve_trace(cfg);
  auto manager = build_manager(cfg, cluster);
  Engine engine(cluster);
  EpisodeResult episode = engine.run(trace, *manager);

  WorkloadReport report = build_report(episode.records, cluster);
  const std::string header = run_header_comment(cfg);
  write_report_csv(report, dir + "/report.csv", header);
  write_cdf_csv(report, dir + "/cdf.csv", header);
  write_aggregates(report, dir + "/aggregates.txt", header);

  out << "manager=" << cfg.manager << " records=" << report.rows.size()
      << " avg_slowdown=" << format_double(report.avg_slowdown)
      << " p99_latency_s=" << format_double(report.p99_latency_s)
      << " slo_violation_rate=" << format_double(report.slo_violation_rate)
      << "\n";
  out << "report=" << dir << "/report.csv cdf=" << dir << "/cdf.csv"
      << " aggregates=" << dir << "/aggregates.txt\n";
}

void cmd_sweep_threshold(const RunConfig& cfg,
                         const std::vector<double>& thresholds,
                         std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  const std::string dir = ensure_out_dir(cfg.out_dir);
  if (thresholds.empty()) {
    throw ConfigError("threshold sweep needs at least one threshold");
  }
  for (double t : thresholds) {
    if (t < 0.0 || t > 1.0) {
      throw ConfigError("thresholds must be in [0, 1], got " +
                        format_double(t));
    }
  }

  auto [actor, critic] = load_freyr_checkpoint(cfg);
  Trace trace = resolve_trace(cfg);

  std::ofstream sweep(dir + "/sweep.csv", std::ios::binary);
  if (!sweep) {
    throw ConfigError("cannot write sweep output in " + dir);
  }
  sweep << "# " << run_header_comment(cfg) << "\n";
  sweep << "threshold,safe_rate,avg_slowdown,degraded_rate\n";

  for (double threshold : thresholds) {
    ClusterConfig cluster = cfg.cluster;
    cluster.rng_seed = seed;
    cluster.safeguard_threshold = threshold;
    validate(cluster);
    Engine engine(cluster);
    FreyrManager manager(actor, critic, freyr_mode(cfg), cluster,
                         mix_seed(seed, kSaltFreyrSample));
    EpisodeResult episode = engine.run(trace, manager);

    long safeguards = 0;
    long degraded = 0;
    for (const InvocationRecord& r : episode.records) {
      safeguards += r.was_safeguard ? 1 : 0;
      degraded += r.slowdown > 1.0 ? 1 : 0;
    }
    const double n = static_cast<double>(episode.records.size());
    const double safe_rate = n > 0 ? safeguards / n : 0.0;
    const double degraded_rate = n > 0 ? degraded / n : 0.0;
    const double avg =
        episode.records.empty() ? 0.0 : avg_slowdown(episode.records);
    sweep << format_double(threshold) << ',' << format_double(safe_rate) << ','
          << format_double(avg) << ',' << format_double(degraded_rate) << "\n";
    out << "threshold=" << format_double(threshold)
        << " safe_rate=" << format_double(safe_rate)
        << " avg_slowdown=" << format_double(avg)
        << " degraded_rate=" << format_double(degraded_rate) << "\n";
  }
  out << "sweep=" << dir << "/sweep.csv\n";
}

}  // namespace harvestsim
