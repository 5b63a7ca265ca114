#pragma once

#include <cstddef>

#include "splitq/agent.hpp"
#include "splitq/gp_ucb.hpp"

namespace splitq {

/// Objective for adaptive tuning: train a fresh agent with weights phi for
/// `episodes_per_round` episodes (same seed every round, so the objective is
/// a pure function of phi) and score the final 20% of its episodes.
inline double evaluate_weights(const MarkovEnv& env, const LearningConfig& cfg, std::size_t episodes_per_round,
                               const PhiVector& phi) {
  LearningConfig round_cfg = cfg;
  round_cfg.episodes = episodes_per_round;
  round_cfg.record_trajectories = false;
  const BiasProfile profile = make_profile("adaptive", Weights::from_array(phi));
  return final_mean_return(train_fresh(env, profile, round_cfg).records);
}

inline AdaptResult adapt_loop(const MarkovEnv& env, const LearningConfig& cfg, const CandidateGrid& grid,
                              std::size_t rounds, std::size_t episodes_per_round, const GPState& gp,
                              const BetaSchedule& schedule = {}) {
  if (episodes_per_round == 0) throw InvalidArgument("episodes_per_round must be >= 1");
  return adapt_loop([&](const PhiVector& phi) { return evaluate_weights(env, cfg, episodes_per_round, phi); },
                    grid, rounds, gp, schedule);
}

}  // namespace splitq
