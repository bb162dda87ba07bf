#include "harvestsim/config.hpp"

#include <fstream>
#include <sstream>

#include "harvestsim/io_util.hpp"

namespace harvestsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value, key);
  } catch (const ParseError&) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  try {
    return parse_long(value, key);
  } catch (const ParseError&) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  return static_cast<int>(to_long(key, value));
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "manager") {
    if (value != "fixed" && value != "greedy" && value != "ensure" &&
        value != "freyr") {
      throw ConfigError("manager must be fixed|greedy|ensure|freyr, got '" +
                        value + "'");
    }
    cfg.manager = value;
  } else if (key == "cluster.n_invokers") {
    cfg.cluster.n_invokers = to_int(key, value);
  } else if (key == "cluster.invoker_cpu") {
    cfg.cluster.invoker_cpu = to_int(key, value);
  } else if (key == "cluster.invoker_mem_mb") {
    cfg.cluster.invoker_mem_mb = to_int(key, value);
  } else if (key == "cluster.per_function_max_cpu") {
    cfg.cluster.per_function_max.cpu = to_int(key, value);
  } else if (key == "cluster.per_function_max_mem_mb") {
    cfg.cluster.per_function_max.mem = to_int(key, value);
  } else if (key == "cluster.mem_unit_mb") {
    cfg.cluster.mem_unit_mb = to_int(key, value);
  } else if (key == "cluster.cpu_unit") {
    cfg.cluster.cpu_unit = to_int(key, value);
  } else if (key == "cluster.slo_threshold") {
    cfg.cluster.slo_threshold = to_double(key, value);
  } else if (key == "safeguard.threshold") {
    cfg.cluster.safeguard_threshold = to_double(key, value);
  } else if (key == "greedy.over_threshold") {
    cfg.greedy_over_threshold = to_double(key, value);
  } else if (key == "greedy.under_threshold") {
    cfg.greedy_under_threshold = to_double(key, value);
  } else if (key == "ensure.degradation_factor") {
    cfg.ensure_degradation_factor = to_double(key, value);
  } else if (key == "freyr.mode") {
    if (value != "greedy" && value != "sample") {
      throw ConfigError("freyr.mode must be greedy|sample, got '" + value +
                        "'");
    }
    cfg.freyr_mode = value;
  } else if (key == "freyr.checkpoint_path") {
    cfg.freyr_checkpoint_path = value;
  } else if (key == "workload.trace") {
    cfg.workload_trace = value;
  } else if (key == "workload.catalog") {
    cfg.workload_catalog = value;
  } else if (key == "workload.calls") {
    cfg.workload_calls = to_int(key, value);
  } else if (key == "workload.mean_iat_s") {
    cfg.workload_mean_iat_s = to_double(key, value);
  } else if (key == "workload.functions") {
    cfg.workload_functions = to_int(key, value);
  } else if (key == "workload.input_scale_min") {
    cfg.workload_scale_min = to_double(key, value);
  } else if (key == "workload.input_scale_max") {
    cfg.workload_scale_max = to_double(key, value);
  } else if (key == "workload.weights") {
    cfg.workload_weights = value;
  } else if (key == "train.episodes") {
    cfg.train_episodes = to_int(key, value);
  } else if (key == "train.epochs") {
    cfg.train_epochs = to_int(key, value);
  } else if (key == "train.clip") {
    cfg.train_clip = to_double(key, value);
  } else if (key == "train.gamma") {
    cfg.train_gamma = to_double(key, value);
  } else if (key == "train.lr") {
    cfg.train_lr = to_double(key, value);
  } else if (key == "train.reward_bonus") {
    cfg.train_reward_bonus = to_double(key, value);
  } else if (key == "train.checkpoint_every") {
    cfg.train_checkpoint_every = to_int(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') {
      continue;
    }
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_number) +
                        ": expected key=value, got '" + stripped + "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_number) +
                        ": empty key");
    }
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream whole;
  whole << in.rdbuf();
  return parse_config_text(whole.str(), path);
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "cluster.cpu_unit=" << cfg.cluster.cpu_unit << "\n";
  out << "cluster.invoker_cpu=" << cfg.cluster.invoker_cpu << "\n";
  out << "cluster.invoker_mem_mb=" << cfg.cluster.invoker_mem_mb << "\n";
  out << "cluster.mem_unit_mb=" << cfg.cluster.mem_unit_mb << "\n";
  out << "cluster.n_invokers=" << cfg.cluster.n_invokers << "\n";
  out << "cluster.per_function_max_cpu=" << cfg.cluster.per_function_max.cpu
      << "\n";
  out << "cluster.per_function_max_mem_mb=" << cfg.cluster.per_function_max.mem
      << "\n";
  out << "cluster.slo_threshold=" << format_double(cfg.cluster.slo_threshold)
      << "\n";
  out << "ensure.degradation_factor="
      << format_double(cfg.ensure_degradation_factor) << "\n";
  out << "freyr.checkpoint_path=" << cfg.freyr_checkpoint_path << "\n";
  out << "freyr.mode=" << cfg.freyr_mode << "\n";
  out << "greedy.over_threshold=" << format_double(cfg.greedy_over_threshold)
      << "\n";
  out << "greedy.under_threshold=" << format_double(cfg.greedy_under_threshold)
      << "\n";
  out << "manager=" << cfg.manager << "\n";
  // out_dir is intentionally absent: where results land never changes them.
  out << "safeguard.threshold="
      << format_double(cfg.cluster.safeguard_threshold) << "\n";
  out << "seed=" << (cfg.seed.has_value() ? std::to_string(*cfg.seed) : "")
      << "\n";
  out << "train.checkpoint_every=" << cfg.train_checkpoint_every << "\n";
  out << "train.clip=" << format_double(cfg.train_clip) << "\n";
  out << "train.epochs=" << cfg.train_epochs << "\n";
  out << "train.episodes=" << cfg.train_episodes << "\n";
  out << "train.gamma=" << format_double(cfg.train_gamma) << "\n";
  out << "train.lr=" << format_double(cfg.train_lr) << "\n";
  out << "train.reward_bonus=" << format_double(cfg.train_reward_bonus)
      << "\n";
  out << "workload.calls=" << cfg.workload_calls << "\n";
  out << "workload.catalog=" << cfg.workload_catalog << "\n";
  out << "workload.functions=" << cfg.workload_functions << "\n";
  out << "workload.input_scale_max=" << format_double(cfg.workload_scale_max)
      << "\n";
  out << "workload.input_scale_min=" << format_double(cfg.workload_scale_min)
      << "\n";
  out << "workload.mean_iat_s=" << format_double(cfg.workload_mean_iat_s)
      << "\n";
  out << "workload.trace=" << cfg.workload_trace << "\n";
  out << "workload.weights=" << cfg.workload_weights << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(canonical_config_text(cfg));
}

std::string run_header_comment(const RunConfig& cfg) {
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  std::string seed_text =
      cfg.seed.has_value() ? std::to_string(*cfg.seed) : "unset";
  return "seed=" + seed_text + " config_hash=" + hash_hex;
}

}  // namespace harvestsim
