#include <doctest.h>

#include <cmath>

#include "harvestsim/freyr_manager.hpp"
#include "harvestsim/metrics.hpp"
#include "harvestsim/trainer.hpp"

using namespace harvestsim;

namespace {

InvocationRecord completion(double slowdown_value, std::uint64_t seq = 0) {
  InvocationRecord r;
  r.slowdown = slowdown_value;
  r.completion_seq = seq;
  r.response_latency_s = slowdown_value;
  return r;
}

StateVector constant_state(double v) {
  StateVector s;
  s.fill(v);
  return s;
}

TrajectoryStep step_with(std::vector<StateVector> states, int chosen,
                         double log_prob_old, double critic_mean,
                         double return_to_go) {
  TrajectoryStep step;
  step.option_states = std::move(states);
  step.chosen_index = chosen;
  step.log_prob_old = log_prob_old;
  step.critic_mean_old = critic_mean;
  step.return_to_go = return_to_go;
  return step;
}

// Mean clipped surrogate of a trajectory under the given actor parameters;
// the independent oracle for gradient checks.
double surrogate(const Trajectory& traj, const Mlp& actor, double clip) {
  double total = 0.0;
  for (const TrajectoryStep& step : traj.steps) {
    std::vector<double> scores;
    scores.reserve(step.option_states.size());
    for (const auto& s : step.option_states) {
      scores.push_back(actor.forward(s));
    }
    double max_score = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double q : scores) {
      sum += std::exp(q - max_score);
    }
    const double log_prob =
        scores[static_cast<std::size_t>(step.chosen_index)] - max_score -
        std::log(sum);
    const double ratio = std::exp(log_prob - step.log_prob_old);
    const double advantage = step.return_to_go - step.critic_mean_old;
    total += clip_objective(ratio, advantage, clip);
  }
  return total / static_cast<double>(traj.steps.size());
}

}  // namespace

TEST_CASE("compute_reward formula") {
  CHECK(compute_reward({}, 1.0) == 0.0);

  std::vector<InvocationRecord> one = {completion(0.5)};
  CHECK(compute_reward(one, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<InvocationRecord> two = {completion(1.5), completion(0.8)};
  CHECK(compute_reward(two, 1.0) == doctest::Approx(-2.3).epsilon(1e-12));

  // Exactly 1.0 earns neither the bonus nor the penalty.
  std::vector<InvocationRecord> par = {completion(1.0)};
  CHECK(compute_reward(par, 5.0) == -1.0);
}

TEST_CASE("advantages are returns minus the rollout baseline") {
  Trajectory traj;
  traj.steps.push_back(step_with({constant_state(0.0)}, 0, 0.0, 1.5, 2.0));
  auto adv = compute_advantages(traj);
  CHECK(adv[0] == 0.5);
}

TEST_CASE("undiscounted returns are suffix sums") {
  Trajectory traj;
  for (int i = 0; i < 3; ++i) {
    TrajectoryStep step = step_with({constant_state(0.0)}, 0, 0.0, 0.0, 0.0);
    step.reward = 1.0;
    traj.steps.push_back(step);
  }
  // re-derive returns the way build_trajectory does
  double running = 0.0;
  for (std::size_t t = traj.steps.size(); t-- > 0;) {
    running = traj.steps[t].reward + 1.0 * running;
    traj.steps[t].return_to_go = running;
  }
  CHECK(traj.steps[0].return_to_go == 3.0);
  CHECK(traj.steps[1].return_to_go == 2.0);
  CHECK(traj.steps[2].return_to_go == 1.0);
}

TEST_CASE("clip objective closed forms") {
  CHECK(clip_objective(2.0, 1.0, 0.2) == 1.2);
  CHECK(clip_objective(0.5, -1.0, 0.2) == -0.8);
  CHECK(clip_objective(1.0, 0.37, 0.2) == 0.37);
  CHECK(clip_objective(1.0, -4.2, 0.2) == -4.2);
  CHECK_THROWS_AS(clip_objective(0.0, 1.0, 0.2), ContractError);
}

TEST_CASE("completions are charged to the next decision, tail to the last") {
  EpisodeResult episode;
  auto decision_at = [](std::uint64_t seq) {
    DecisionLogEntry d;
    d.event_seq = seq;
    d.policy = PolicyStep{};
    d.policy->options.options = {{1, 64}};
    d.policy->options.states = {constant_state(0.0)};
    d.policy->decision.chosen_index = 0;
    d.policy->decision.log_probability = 0.0;
    d.policy->decision.critic_mean = 0.0;
    return d;
  };
  episode.decisions.push_back(decision_at(2));
  episode.decisions.push_back(decision_at(5));
  episode.records = {completion(0.5, 1), completion(2.0, 3),
                     completion(1.0, 4), completion(0.25, 6),
                     completion(3.0, 7)};

  Trajectory traj = build_trajectory(episode, 1.0, 1.0);
  REQUIRE(traj.steps.size() == 2);
  // step 0 window: everything before decision seq 2 -> the 0.5 completion.
  CHECK(traj.steps[0].reward == doctest::Approx(-0.5 + 1.0));
  // step 1: completions 3,4 plus the post-episode tail 6,7.
  const double expected = (-2.0 - 1.0) + (-1.0) + (-0.25 + 1.0) + (-3.0 - 1.0);
  CHECK(traj.steps[1].reward == doctest::Approx(expected));
  // Total reward covers every completion exactly once.
  CHECK(traj.steps[0].reward + traj.steps[1].reward ==
        doctest::Approx(compute_reward(episode.records, 1.0)));
  // Returns-to-go are suffix sums.
  CHECK(traj.steps[0].return_to_go ==
        doctest::Approx(traj.steps[0].reward + traj.steps[1].reward));
}

TEST_CASE("safeguard invocations never enter the trajectory") {
  EpisodeResult episode;
  DecisionLogEntry safeguard;
  safeguard.event_seq = 1;
  safeguard.was_safeguard = true;  // no policy payload
  episode.decisions.push_back(safeguard);
  episode.records = {completion(1.0, 2)};
  Trajectory traj = build_trajectory(episode, 1.0, 1.0);
  CHECK(traj.steps.empty());
}

TEST_CASE("reward identity links the objective to avg_slowdown") {
  // Real rollout with untrained networks, c = 0: the summed rewards equal
  // -|W| * avg_slowdown.
  ClusterConfig cluster;
  cluster.rng_seed = 77;
  PoissonTraceOptions opts;
  opts.n_calls = 150;
  opts.seed = 7;
  Trace trace = generate_poisson_trace(synthetic_catalog(4), opts);
  Engine engine(cluster);
  FreyrManager manager(Mlp::initialized({kStateDims, 32, 16, 1}, 1),
                       Mlp::initialized({kStateDims, 32, 16, 1}, 2),
                       DecisionMode::Sample, cluster, 99);
  EpisodeResult episode = engine.run(trace, manager);
  Trajectory traj = build_trajectory(episode, 0.0, 1.0);
  REQUIRE_FALSE(traj.steps.empty());

  double total = 0.0;
  for (const TrajectoryStep& step : traj.steps) {
    total += step.reward;
  }
  const double expected =
      -static_cast<double>(episode.records.size()) *
      avg_slowdown(episode.records);
  CHECK(std::abs(total - expected) < 1e-9);
}

TEST_CASE("zero advantages leave the actor untouched") {
  Rng rng(3);
  Mlp actor = Mlp::initialized({kStateDims, 8, 1}, 10);
  Mlp critic = Mlp::initialized({kStateDims, 8, 1}, 11);
  const std::vector<double> actor_before(actor.params().begin(),
                                         actor.params().end());

  Trajectory traj;
  for (int t = 0; t < 5; ++t) {
    std::vector<StateVector> states = {constant_state(0.1 * t),
                                       constant_state(0.2)};
    // critic_mean_old equals the return: advantage is exactly zero.
    traj.steps.push_back(
        step_with(std::move(states), t % 2, std::log(0.5), 3.0, 3.0));
  }
  PpoConfig cfg;
  AdamW actor_opt(actor.parameter_count(), cfg.lr, 0.0);
  AdamW critic_opt(critic.parameter_count(), cfg.lr, 0.0);
  PpoStats stats = ppo_update(traj, actor, critic, actor_opt, critic_opt, cfg);
  CHECK(stats.actor_loss == 0.0);

  auto actor_after = actor.params();
  for (std::size_t i = 0; i < actor_before.size(); ++i) {
    CHECK(actor_before[i] == actor_after[i]);
  }

  // The critic still fits the returns: another update shrinks its loss.
  PpoStats again = ppo_update(traj, actor, critic, actor_opt, critic_opt, cfg);
  CHECK(again.critic_loss < stats.critic_loss);
}

TEST_CASE("first-epoch objective equals the mean advantage at ratio one") {
  Mlp actor = Mlp::initialized({kStateDims, 8, 1}, 21);
  Mlp critic = Mlp::initialized({kStateDims, 8, 1}, 22);
  ClusterConfig cluster;
  Rng rng(4);

  // Build rollout-consistent steps: log probs computed from this very actor.
  Trajectory traj;
  double advantage_sum = 0.0;
  for (int t = 0; t < 6; ++t) {
    OptionSet set = enumerate_options({1, 4}, {64, 128}, cluster);
    PlatformState platform{80, 327680, 1, 0.0};
    FunctionHistory history;
    history.baseline_latency_s = 10.0;
    embed_options(set, platform, history, cluster);
    Decision d = decide(set, actor, critic, DecisionMode::Sample, rng);
    TrajectoryStep step;
    step.option_states = set.states;
    step.chosen_index = d.chosen_index;
    step.log_prob_old = d.log_probability;
    step.critic_mean_old = d.critic_mean;
    step.return_to_go = 1.0 + t;
    traj.steps.push_back(step);
    advantage_sum += step.return_to_go - step.critic_mean_old;
  }
  PpoConfig cfg;
  AdamW actor_opt(actor.parameter_count(), cfg.lr, 0.0);
  AdamW critic_opt(critic.parameter_count(), cfg.lr, 0.0);
  PpoStats stats = ppo_update(traj, actor, critic, actor_opt, critic_opt, cfg);
  const double mean_advantage = advantage_sum / 6.0;
  CHECK(stats.actor_loss == doctest::Approx(-mean_advantage).epsilon(1e-9));
}

TEST_CASE("clipped samples contribute zero actor gradient") {
  Mlp actor = Mlp::initialized({kStateDims, 6, 1}, 31);
  Mlp critic({kStateDims, 1});

  // One step whose stored log prob is far below the current one: with a
  // positive advantage the ratio blows past 1 + clip and the min() picks
  // the constant branch.
  Trajectory traj;
  std::vector<StateVector> states = {constant_state(0.2), constant_state(-0.4)};
  TrajectoryStep step;
  step.option_states = states;
  step.chosen_index = 0;
  step.log_prob_old = std::log(1e-3);
  step.critic_mean_old = 0.0;
  step.return_to_go = 2.0;  // advantage +2
  traj.steps.push_back(step);

  PpoConfig cfg;
  cfg.epochs_per_update = 1;

  // Finite differences of the surrogate w.r.t. a few actor parameters.
  Trajectory traj_copy = traj;
  const double h = 1e-6;
  auto params = actor.params();
  for (std::size_t i : {std::size_t{0}, std::size_t{5}, params.size() - 1}) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = surrogate(traj_copy, actor, cfg.clip);
    params[i] = saved - h;
    const double down = surrogate(traj_copy, actor, cfg.clip);
    params[i] = saved;
    CHECK(std::abs(up - down) / (2 * h) < 1e-9);
  }

  // And the update itself leaves the actor unchanged.
  const std::vector<double> before(actor.params().begin(),
                                   actor.params().end());
  AdamW actor_opt(actor.parameter_count(), cfg.lr, 0.0);
  AdamW critic_opt(critic.parameter_count(), cfg.lr, 0.0);
  ppo_update(traj, actor, critic, actor_opt, critic_opt, cfg);
  auto after = actor.params();
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i] == after[i]);
  }
}

TEST_CASE("ppo_update rejects an empty trajectory and is deterministic") {
  Mlp actor = Mlp::initialized({kStateDims, 4, 1}, 41);
  Mlp critic = Mlp::initialized({kStateDims, 4, 1}, 42);
  PpoConfig cfg;
  AdamW a1(actor.parameter_count(), cfg.lr, 0.0);
  AdamW c1(critic.parameter_count(), cfg.lr, 0.0);
  Trajectory empty;
  CHECK_THROWS_AS(ppo_update(empty, actor, critic, a1, c1, cfg),
                  ContractError);

  Trajectory traj;
  traj.steps.push_back(step_with({constant_state(0.3), constant_state(0.6)}, 1,
                                 std::log(0.5), 0.0, 1.0));
  Mlp actor_a = actor, actor_b = actor;
  Mlp critic_a = critic, critic_b = critic;
  AdamW ao_a(actor.parameter_count(), cfg.lr, 0.0);
  AdamW co_a(critic.parameter_count(), cfg.lr, 0.0);
  AdamW ao_b(actor.parameter_count(), cfg.lr, 0.0);
  AdamW co_b(critic.parameter_count(), cfg.lr, 0.0);
  ppo_update(traj, actor_a, critic_a, ao_a, co_a, cfg);
  ppo_update(traj, actor_b, critic_b, ao_b, co_b, cfg);
  for (std::size_t i = 0; i < actor_a.params().size(); ++i) {
    CHECK(actor_a.params()[i] == actor_b.params()[i]);
  }
  for (std::size_t i = 0; i < critic_a.params().size(); ++i) {
    CHECK(critic_a.params()[i] == critic_b.params()[i]);
  }
}

TEST_CASE("train with zero episodes returns the initial networks") {
  PpoConfig cfg;
  cfg.episodes = 0;
  ClusterConfig cluster;
  Mlp actor = Mlp::initialized({kStateDims, 32, 16, 1}, 51);
  Mlp critic = Mlp::initialized({kStateDims, 32, 16, 1}, 52);
  const std::vector<double> before(actor.params().begin(),
                                   actor.params().end());
  GeneratedTraceSource source(synthetic_catalog(4), PoissonTraceOptions{});
  TrainResult result = train(source, cfg, cluster, actor, critic);
  CHECK(result.log.empty());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(result.actor.params()[i] == before[i]);
  }
}

TEST_CASE("short training runs are reproducible and log consistently") {
  PpoConfig cfg;
  cfg.episodes = 2;
  cfg.seed = 7;
  ClusterConfig cluster;
  PoissonTraceOptions opts;
  opts.n_calls = 60;
  opts.seed = 3;

  auto run_once = [&]() {
    GeneratedTraceSource source(synthetic_catalog(4), opts);
    Mlp actor = Mlp::initialized({kStateDims, 32, 16, 1}, 61);
    Mlp critic = Mlp::initialized({kStateDims, 32, 16, 1}, 62);
    return train(source, cfg, cluster, std::move(actor), std::move(critic));
  };
  TrainResult a = run_once();
  TrainResult b = run_once();
  REQUIRE(a.log.size() == 2);
  REQUIRE(b.log.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.log[i].cumulative_reward == b.log[i].cumulative_reward);
    CHECK(a.log[i].actor_loss == b.log[i].actor_loss);
    CHECK(a.log[i].critic_loss == b.log[i].critic_loss);
    CHECK(a.log[i].avg_slowdown == b.log[i].avg_slowdown);
  }
  for (std::size_t i = 0; i < a.actor.params().size(); ++i) {
    CHECK(a.actor.params()[i] == b.actor.params()[i]);
  }
}
