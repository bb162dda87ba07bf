#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harvestsim/commands.hpp"
#include "harvestsim/errors.hpp"
#include "harvestsim/io_util.hpp"

namespace {

// --out flag > config 'out' key > HARVESTSIM_OUT > current directory.
void resolve_out_dir(harvestsim::RunConfig& cfg, const std::string& flag) {
  if (!flag.empty()) {
    cfg.out_dir = flag;
  }
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("HARVESTSIM_OUT");
    if (env != nullptr && env[0] != '\0') {
      cfg.out_dir = env;
    }
  }
}

harvestsim::RunConfig load_run_config(const std::string& config_path,
                                      bool seed_set, std::uint64_t seed,
                                      const std::string& out_flag,
                                      const std::string& manager,
                                      const std::string& checkpoint,
                                      int episodes) {
  harvestsim::RunConfig cfg;
  if (!config_path.empty()) {
    cfg = harvestsim::parse_config_file(config_path);
  }
  if (seed_set) {
    cfg.seed = seed;
  }
  if (!manager.empty()) {
    harvestsim::apply_config_entry(cfg, "manager", manager);
  }
  if (!checkpoint.empty()) {
    cfg.freyr_checkpoint_path = checkpoint;
  }
  if (episodes >= 0) {
    cfg.train_episodes = episodes;
  }
  resolve_out_dir(cfg, out_flag);
  return cfg;
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> thresholds;
  for (const std::string& field : harvestsim::split_csv_line(text)) {
    thresholds.push_back(harvestsim::parse_double(field, "--thresholds"));
  }
  return thresholds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serverless cluster simulator with a learning resource manager"};
  app.require_subcommand(1);

  // gen-trace
  harvestsim::GenTraceOptions gen;
  bool gen_seed_set = false;
  auto* gen_cmd =
      app.add_subcommand("gen-trace", "Generate a synthetic trace + catalog");
  gen_cmd->add_option("--calls", gen.calls, "Number of invocations");
  gen_cmd->add_option("--mean-iat", gen.mean_iat_s,
                      "Mean inter-arrival time, seconds");
  gen_cmd->add_option("--functions", gen.functions, "Catalog size");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed")
      ->each([&](const std::string&) { gen_seed_set = true; });
  gen_cmd->add_option("--scale-min", gen.scale_min, "Input scale lower bound");
  gen_cmd->add_option("--scale-max", gen.scale_max, "Input scale upper bound");
  std::string gen_out;
  gen_cmd->add_option("--out", gen_out, "Output directory");

  // shared flags for config-driven commands
  struct CommonFlags {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    std::string manager;
    std::string checkpoint;
    int episodes = -1;
  };
  auto add_common = [](CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "key=value config file");
    cmd->add_option("--seed", flags.seed, "RNG seed (overrides config)")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--checkpoint", flags.checkpoint,
                    "Checkpoint stem (expects <stem>.actor/.critic)");
  };

  CommonFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train the learning manager");
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--episodes", train_flags.episodes,
                        "Training episodes");

  CommonFlags eval_flags;
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a manager on one workload");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--manager", eval_flags.manager,
                       "fixed|greedy|ensure|freyr");

  CommonFlags sweep_flags;
  std::string thresholds_text = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  auto* sweep_cmd = app.add_subcommand("sweep-threshold",
                                       "Safeguard threshold sensitivity sweep");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--thresholds", thresholds_text,
                        "Comma-separated thresholds in [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) {
      if (!gen_seed_set) {
        throw harvestsim::ConfigError("--seed is mandatory");
      }
      if (gen_out.empty()) {
        const char* env = std::getenv("HARVESTSIM_OUT");
        gen.out_dir = (env != nullptr && env[0] != '\0') ? env : ".";
      } else {
        gen.out_dir = gen_out;
      }
      harvestsim::cmd_gen_trace(gen, std::cout);
    } else if (train_cmd->parsed()) {
      auto cfg = load_run_config(train_flags.config, train_flags.seed_set,
                                 train_flags.seed, train_flags.out, "",
                                 train_flags.checkpoint, train_flags.episodes);
      harvestsim::cmd_train(cfg, std::cout);
    } else if (eval_cmd->parsed()) {
      auto cfg = load_run_config(eval_flags.config, eval_flags.seed_set,
                                 eval_flags.seed, eval_flags.out,
                                 eval_flags.manager, eval_flags.checkpoint,
                                 -1);
      harvestsim::cmd_eval(cfg, std::cout);
    } else if (sweep_cmd->parsed()) {
      auto cfg = load_run_config(sweep_flags.config, sweep_flags.seed_set,
                                 sweep_flags.seed, sweep_flags.out, "",
                                 sweep_flags.checkpoint, -1);
      harvestsim::cmd_sweep_threshold(cfg, parse_threshold_list(thresholds_text),
                                      std::cout);
    }
  } catch (const harvestsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
