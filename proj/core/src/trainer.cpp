#include "harvestsim/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "harvestsim/freyr_manager.hpp"
#include "harvestsim/io_util.hpp"
#include "harvestsim/metrics.hpp"

namespace harvestsim {

void validate(const PpoConfig& cfg) {
  if (cfg.epochs_per_update < 1) {
    throw ConfigError("train.epochs must be >= 1");
  }
  if (!(cfg.clip > 0.0) || cfg.clip >= 1.0) {
    throw ConfigError("train.clip must be in (0, 1)");
  }
  if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0) {
    throw ConfigError("train.gamma must be in (0, 1]");
  }
  if (!(cfg.lr > 0.0)) {
    throw ConfigError("train.lr must be > 0");
  }
  if (cfg.episodes < 0) {
    throw ConfigError("train.episodes must be >= 0");
  }
}

double compute_reward(std::span<const InvocationRecord> completions, double c) {
  double reward = 0.0;
  for (const InvocationRecord& r : completions) {
    reward -= r.slowdown;
    if (r.slowdown < 1.0) {
      reward += c;
    } else if (r.slowdown > 1.0) {
      reward -= c;
    }
  }
  return reward;
}

Trajectory build_trajectory(const EpisodeResult& episode, double c,
                            double gamma) {
  Trajectory traj;
  std::vector<std::uint64_t> decision_seqs;
  for (const DecisionLogEntry& d : episode.decisions) {
    if (!d.policy.has_value()) {
      continue;  // safeguard invocations take no policy action
    }
    TrajectoryStep step;
    step.option_states = d.policy->options.states;
    step.chosen_index = d.policy->decision.chosen_index;
    step.log_prob_old = d.policy->decision.log_probability;
    step.critic_mean_old = d.policy->decision.critic_mean;
    traj.steps.push_back(std::move(step));
    decision_seqs.push_back(d.event_seq);
  }
  if (traj.steps.empty()) {
    return traj;
  }

  // Each completion charges the next policy decision after it; the tail of
  // the episode charges the last decision. Every completion counts once.
  for (const InvocationRecord& r : episode.records) {
    auto it = std::upper_bound(decision_seqs.begin(), decision_seqs.end(),
                               r.completion_seq);
    std::size_t idx = it == decision_seqs.end()
                          ? traj.steps.size() - 1
                          : static_cast<std::size_t>(it - decision_seqs.begin());
    TrajectoryStep& step = traj.steps[idx];
    step.reward -= r.slowdown;
    if (r.slowdown < 1.0) {
      step.reward += c;
    } else if (r.slowdown > 1.0) {
      step.reward -= c;
    }
  }

  double running = 0.0;
  for (std::size_t t = traj.steps.size(); t-- > 0;) {
    running = traj.steps[t].reward + gamma * running;
    traj.steps[t].return_to_go = running;
  }
  return traj;
}

std::vector<double> compute_advantages(const Trajectory& traj) {
  std::vector<double> advantages;
  advantages.reserve(traj.steps.size());
  for (const TrajectoryStep& step : traj.steps) {
    advantages.push_back(step.return_to_go - step.critic_mean_old);
  }
  return advantages;
}

double clip_objective(double ratio, double advantage, double epsilon) {
  if (!(ratio > 0.0)) {
    throw ContractError("clip_objective: ratio must be > 0");
  }
  const double g = advantage >= 0.0 ? (1.0 + epsilon) * advantage
                                    : (1.0 - epsilon) * advantage;
  return std::min(ratio * advantage, g);
}

PpoStats ppo_update(const Trajectory& traj, Mlp& actor, Mlp& critic,
                    AdamW& actor_opt, AdamW& critic_opt,
                    const PpoConfig& cfg) {
  if (traj.steps.empty()) {
    throw ContractError("ppo_update on an empty trajectory");
  }
  const std::vector<double> advantages = compute_advantages(traj);
  const double t_count = static_cast<double>(traj.steps.size());

  PpoStats stats;
  std::vector<double> actor_grad(actor.parameter_count());
  std::vector<double> critic_grad(critic.parameter_count());
  std::vector<double> scores;
  std::vector<double> probs;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
    std::fill(critic_grad.begin(), critic_grad.end(), 0.0);
    double objective_sum = 0.0;
    double critic_loss_sum = 0.0;

    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const TrajectoryStep& step = traj.steps[t];
      const std::size_t n = step.option_states.size();
      const double advantage = advantages[t];

      // --- actor: clipped surrogate ---
      scores.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = actor.forward(step.option_states[i]);
      }
      const double max_score = *std::max_element(scores.begin(), scores.end());
      double exp_sum = 0.0;
      probs.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        probs[i] = std::exp(scores[i] - max_score);
        exp_sum += probs[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        probs[i] /= exp_sum;
      }
      const std::size_t chosen = static_cast<std::size_t>(step.chosen_index);
      const double log_prob_new =
          scores[chosen] - max_score - std::log(exp_sum);
      const double ratio = std::exp(log_prob_new - step.log_prob_old);
      const double g = advantage >= 0.0 ? (1.0 + cfg.clip) * advantage
                                        : (1.0 - cfg.clip) * advantage;
      const double unclipped = ratio * advantage;
      objective_sum += std::min(unclipped, g);
      if (unclipped <= g) {
        // d(ratio * A)/d score_i = ratio * A * (1{i==chosen} - prob_i);
        // clipped samples contribute no actor gradient.
        const double coeff = unclipped / t_count;
        for (std::size_t i = 0; i < n; ++i) {
          const double indicator = i == chosen ? 1.0 : 0.0;
          const double upstream = coeff * (indicator - probs[i]);
          if (upstream != 0.0) {
            actor.accumulate_param_gradients(step.option_states[i], upstream,
                                             actor_grad);
          }
        }
      }

      // --- critic: MSE of the mean baseline against the return ---
      double critic_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        critic_sum += critic.forward(step.option_states[i]);
      }
      const double mean_b = critic_sum / static_cast<double>(n);
      const double diff = mean_b - step.return_to_go;
      critic_loss_sum += diff * diff;
      const double upstream_b =
          2.0 * diff / (static_cast<double>(n) * t_count);
      for (std::size_t i = 0; i < n; ++i) {
        critic.accumulate_param_gradients(step.option_states[i], upstream_b,
                                          critic_grad);
      }
    }

    if (epoch == 0) {
      stats.actor_loss = -objective_sum / t_count;
      stats.critic_loss = critic_loss_sum / t_count;
    }

    // Ascent on the surrogate: descend its negation.
    for (double& g : actor_grad) {
      g = -g;
    }
    actor_opt.step(actor.params(), actor_grad);
    critic_opt.step(critic.params(), critic_grad);
  }
  return stats;
}

GeneratedTraceSource::GeneratedTraceSource(
    std::map<std::string, FunctionSpec> catalog, PoissonTraceOptions opts,
    int pool_size)
    : catalog_(std::move(catalog)), opts_(opts), pool_size_(pool_size) {}

Trace GeneratedTraceSource::episode_trace(int episode) {
  const int slot = pool_size_ > 0 ? episode % pool_size_ : episode;
  PoissonTraceOptions opts = opts_;
  opts.seed = mix_seed(opts_.seed, static_cast<std::uint64_t>(slot));
  return generate_poisson_trace(catalog_, opts);
}

TrainResult train(TraceSource& source, const PpoConfig& cfg,
                  const ClusterConfig& cluster, Mlp actor, Mlp critic,
                  const std::string& checkpoint_stem, std::ostream* log_out,
                  const std::string& header_comment) {
  validate(cfg);
  validate(cluster);

  if (log_out != nullptr) {
    if (!header_comment.empty()) {
      *log_out << "# " << header_comment << "\n";
    }
    *log_out << "episode,cumulative_reward,actor_loss,critic_loss,"
                "avg_slowdown,safe_invocation_rate\n";
  }

  // Zero-advantage steps must leave the actor untouched, so decoupled decay
  // stays off inside the trainer.
  AdamW actor_opt(actor.parameter_count(), cfg.lr, 0.0);
  AdamW critic_opt(critic.parameter_count(), cfg.lr, 0.0);

  auto save_checkpoints = [&]() {
    if (!checkpoint_stem.empty()) {
      actor.save(checkpoint_stem + ".actor");
      critic.save(checkpoint_stem + ".critic");
    }
  };

  TrainResult result;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    Trace trace = source.episode_trace(episode);

    ClusterConfig episode_cluster = cluster;
    episode_cluster.rng_seed =
        mix_seed(cfg.seed, 0x10000ULL + source.world_seed(episode));
    Engine engine(episode_cluster);
    FreyrManager manager(
        actor, critic, DecisionMode::Sample, episode_cluster,
        mix_seed(cfg.seed, 0x20000ULL + static_cast<std::uint64_t>(episode)));
    EpisodeResult rollout = engine.run(trace, manager);

    Trajectory traj = build_trajectory(rollout, cfg.reward_bonus, cfg.gamma);
    TrainLogRow row;
    row.episode = episode;
    for (const TrajectoryStep& step : traj.steps) {
      row.cumulative_reward += step.reward;
    }
    if (!rollout.records.empty()) {
      row.avg_slowdown = avg_slowdown(rollout.records);
      long safeguards = 0;
      for (const InvocationRecord& r : rollout.records) {
        safeguards += r.was_safeguard ? 1 : 0;
      }
      row.safe_invocation_rate =
          static_cast<double>(safeguards) /
          static_cast<double>(rollout.records.size());
    }
    if (!traj.steps.empty()) {
      PpoStats stats = ppo_update(traj, actor, critic, actor_opt, critic_opt,
                                  cfg);
      row.actor_loss = stats.actor_loss;
      row.critic_loss = stats.critic_loss;
    }
    result.log.push_back(row);
    if (log_out != nullptr) {
      *log_out << row.episode << ',' << format_double(row.cumulative_reward)
               << ',' << format_double(row.actor_loss) << ','
               << format_double(row.critic_loss) << ','
               << format_double(row.avg_slowdown) << ','
               << format_double(row.safe_invocation_rate) << "\n";
    }
    if (cfg.checkpoint_every > 0 &&
        (episode + 1) % cfg.checkpoint_every == 0) {
      save_checkpoints();
    }
  }
  save_checkpoints();
  result.actor = std::move(actor);
  result.critic = std::move(critic);
  return result;
}

}  // namespace harvestsim
