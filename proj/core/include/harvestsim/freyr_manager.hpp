#pragma once

#include <cstdint>

#include "harvestsim/managers.hpp"

namespace harvestsim {

// The learning resource manager: safeguard ranges -> option enumeration ->
// embedding -> actor/critic scoring -> softmax selection. Safeguard
// invocations bypass the networks and run at the user allocation.
class FreyrManager : public ResourceManager {
 public:
  FreyrManager(Mlp actor, Mlp critic, DecisionMode mode,
               const ClusterConfig& cfg, std::uint64_t sample_seed);

  std::string_view name() const override { return "freyr"; }
  ManagerDecision on_arrival(const AllocationRequest& req) override;

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }

 private:
  Mlp actor_;
  Mlp critic_;
  DecisionMode mode_;
  ClusterConfig cfg_;
  Rng rng_;
};

}  // namespace harvestsim
