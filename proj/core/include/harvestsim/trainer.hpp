#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "harvestsim/agent.hpp"
#include "harvestsim/mlp.hpp"
#include "harvestsim/sim_engine.hpp"
#include "harvestsim/workload.hpp"

namespace harvestsim {

// One policy decision of an episode, with everything needed to recompute
// its log-probability under updated parameters.
struct TrajectoryStep {
  std::vector<StateVector> option_states;
  int chosen_index = 0;
  double log_prob_old = 0.0;
  double critic_mean_old = 0.0;  // baseline at rollout time
  double reward = 0.0;
  double return_to_go = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

struct PpoConfig {
  int epochs_per_update = 4;
  double clip = 0.2;    // surrogate clip threshold
  double gamma = 1.0;   // discount
  double lr = 0.001;
  int episodes = 200;
  double reward_bonus = 1.0;  // +/- per completion below/above slowdown 1
  std::uint64_t seed = 0;
  int checkpoint_every = 50;
};

void validate(const PpoConfig& cfg);

// r = -sum(slowdown) + c * |{slowdown < 1}| - c * |{slowdown > 1}| over the
// completions of one reward interval. Exactly 1.0 earns neither.
double compute_reward(std::span<const InvocationRecord> completions, double c);

// Extracts the policy steps of an episode and assigns every completion to
// exactly one step's reward: a completion belongs to the next policy
// decision after it (event order); completions after the last decision fold
// into the last step. Also fills discounted returns-to-go.
Trajectory build_trajectory(const EpisodeResult& episode, double c,
                            double gamma);

// A_t = return-to-go - rollout-time critic mean.
std::vector<double> compute_advantages(const Trajectory& traj);

// min(ratio * A, g(eps, A)) with g = (1+eps)A for A >= 0, (1-eps)A otherwise.
double clip_objective(double ratio, double advantage, double epsilon);

struct PpoStats {
  double actor_loss = 0.0;   // negated mean clip objective, first epoch
  double critic_loss = 0.0;  // mean squared baseline error, first epoch
};

// Four epochs of full-batch AdamW: gradient ascent on the clipped surrogate
// for the actor, descent on (mean critic output - return)^2 for the critic.
PpoStats ppo_update(const Trajectory& traj, Mlp& actor, Mlp& critic,
                    AdamW& actor_opt, AdamW& critic_opt, const PpoConfig& cfg);

// Where episodes' workloads come from. Implementations must be
// deterministic in the episode index. world_seed() keys everything
// environment-side (demand jitter) so rotated episodes replay the same
// world while the policy's own sampling stays fresh.
class TraceSource {
 public:
  virtual ~TraceSource() = default;
  virtual Trace episode_trace(int episode) = 0;
  virtual std::uint64_t world_seed(int episode) const {
    return static_cast<std::uint64_t>(episode);
  }
};

// Poisson traces over a fixed catalog. With pool_size 0 every episode gets
// a fresh trace; otherwise episodes rotate through pool_size fixed traces,
// which keeps reward comparisons across training windows on equal footing.
class GeneratedTraceSource : public TraceSource {
 public:
  GeneratedTraceSource(std::map<std::string, FunctionSpec> catalog,
                       PoissonTraceOptions opts, int pool_size = 0);
  Trace episode_trace(int episode) override;
  std::uint64_t world_seed(int episode) const override {
    return static_cast<std::uint64_t>(pool_size_ > 0 ? episode % pool_size_
                                                     : episode);
  }

 private:
  std::map<std::string, FunctionSpec> catalog_;
  PoissonTraceOptions opts_;
  int pool_size_;
};

// The same trace every episode.
class FixedTraceSource : public TraceSource {
 public:
  explicit FixedTraceSource(Trace trace) : trace_(std::move(trace)) {}
  Trace episode_trace(int) override { return trace_; }
  std::uint64_t world_seed(int) const override { return 0; }

 private:
  Trace trace_;
};

struct TrainLogRow {
  int episode = 0;
  double cumulative_reward = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double avg_slowdown = 0.0;
  double safe_invocation_rate = 0.0;
};

struct TrainResult {
  Mlp actor;
  Mlp critic;
  std::vector<TrainLogRow> log;
};

// Runs `cfg.episodes` rollout+update cycles starting from the given
// networks. When `checkpoint_stem` is non-empty, writes
// <stem>.actor/<stem>.critic every `checkpoint_every` episodes and at the
// end. When `log_out` is non-null, streams the training log CSV
// (episode,cumulative_reward,actor_loss,critic_loss,avg_slowdown,
// safe_invocation_rate) prefixed by `header_comment`.
TrainResult train(TraceSource& source, const PpoConfig& cfg,
                  const ClusterConfig& cluster, Mlp actor, Mlp critic,
                  const std::string& checkpoint_stem = "",
                  std::ostream* log_out = nullptr,
                  const std::string& header_comment = "");

}  // namespace harvestsim
