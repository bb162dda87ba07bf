#include "harvestsim/freyr_manager.hpp"

#include <utility>

namespace harvestsim {

FreyrManager::FreyrManager(Mlp actor, Mlp critic, DecisionMode mode,
                           const ClusterConfig& cfg, std::uint64_t sample_seed)
    : actor_(std::move(actor)),
      critic_(std::move(critic)),
      mode_(mode),
      cfg_(cfg),
      rng_(sample_seed) {
  if (actor_.dims().empty() || critic_.dims().empty()) {
    throw ContractError("FreyrManager requires initialized networks");
  }
  if (actor_.dims().front() != kStateDims ||
      critic_.dims().front() != kStateDims) {
    throw ContractError("FreyrManager networks must take the state vector");
  }
}

ManagerDecision FreyrManager::on_arrival(const AllocationRequest& req) {
  SafeguardOutcome outcome = decide_ranges(*req.history, req.user_alloc, cfg_);
  ManagerDecision md;
  md.safeguard = outcome;
  if (outcome.calibrate_baseline) {
    md.allocation = req.user_alloc;
    md.calibrate_baseline = true;
    return md;
  }

  OptionSet options = enumerate_options(outcome.cpu_range, outcome.mem_range,
                                        cfg_);
  embed_options(options, req.platform, *req.history, cfg_);
  Decision decision = decide(options, actor_, critic_, mode_, rng_);
  md.allocation = decision.allocation;
  md.policy = PolicyStep{std::move(options), std::move(decision)};
  return md;
}

}  // namespace harvestsim
