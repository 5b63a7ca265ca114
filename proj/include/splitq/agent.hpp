#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "splitq/bias_profile.hpp"
#include "splitq/environment.hpp"
#include "splitq/errors.hpp"
#include "splitq/rng.hpp"
#include "splitq/split_q.hpp"
#include "splitq/trajectory.hpp"

namespace splitq {

/// Learning hyperparameters. Epsilon and alpha are constant unless the
/// matching *_decay_episodes is non-zero, in which case they move linearly to
/// their *_end value over that many episodes and stay there.
struct LearningConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  double epsilon_end = 0.1;
  std::size_t epsilon_decay_episodes = 0;
  double alpha_end = 0.1;
  std::size_t alpha_decay_episodes = 0;
  std::size_t episodes = 500;
  std::size_t max_steps_per_episode = 200;
  std::uint64_t seed = 0;
  bool record_trajectories = true;

  double epsilon_at(std::size_t episode) const {
    return linear(epsilon, epsilon_end, epsilon_decay_episodes, episode);
  }
  double alpha_at(std::size_t episode) const { return linear(alpha, alpha_end, alpha_decay_episodes, episode); }

 private:
  static double linear(double from, double to, std::size_t span, std::size_t episode) {
    if (span == 0) return from;
    const double frac = std::min(1.0, static_cast<double>(episode) / static_cast<double>(span));
    return from + (to - from) * frac;
  }
};

inline void validate(const LearningConfig& c) {
  auto in_alpha = [](double a) { return a > 0.0 && a <= 1.0; };
  auto in_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_alpha(c.alpha) || (c.alpha_decay_episodes > 0 && !in_alpha(c.alpha_end)))
    throw InvalidArgument("alpha must lie in (0, 1]");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
  if (!in_prob(c.epsilon) || (c.epsilon_decay_episodes > 0 && !in_prob(c.epsilon_end)))
    throw InvalidArgument("epsilon must lie in [0, 1]");
  if (c.max_steps_per_episode == 0) throw InvalidArgument("max_steps_per_episode must be >= 1");
}

struct EpisodeRecord {
  std::size_t episode = 0;
  double total_reward = 0.0;
  double total_pos = 0.0;
  double total_neg = 0.0;
  std::size_t steps = 0;
  double epsilon = 0.0;
  Trajectory trajectory;
};

/// A split Q-learning agent: tables, profile, config and its own RNG stream.
class SplitQAgent {
 public:
  SplitQAgent(std::size_t num_states, std::size_t num_actions, BiasProfile profile, LearningConfig cfg)
      : table_(num_states, num_actions),
        profile_(std::move(profile)),
        cfg_(cfg),
        rng_(derive_seed(cfg.seed, Stream::kAgent)) {
    validate(profile_);
    validate(cfg_);
  }

  const SplitQTable& table() const { return table_; }
  SplitQTable& table() { return table_; }
  const BiasProfile& profile() const { return profile_; }
  const LearningConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }

  std::size_t episodes_completed() const { return episodes_; }

  ActionId act(StateId s, double epsilon) { return select_action(table_, profile_, s, epsilon, rng_); }
  ActionId greedy(StateId s) const { return greedy_action(table_, profile_, s); }

  void learn(StateId s, ActionId a, double r, StateId s_next, bool done, double alpha) {
    update_streams(table_, profile_, alpha, cfg_.gamma, s, a, r, s_next, done);
  }

  /// reset -> repeat {select, step, update} until done or max steps. An
  /// episode cut by max steps bootstraps its last update as non-terminal.
  EpisodeRecord run_episode(MarkovEnv& env) {
    check_env(env);
    EpisodeRecord rec;
    rec.episode = episodes_;
    rec.epsilon = cfg_.epsilon_at(episodes_);
    const double alpha = cfg_.alpha_at(episodes_);
    StateId s = env.reset();
    for (std::size_t t = 0; t < cfg_.max_steps_per_episode; ++t) {
      const ActionId a = act(s, rec.epsilon);
      const StepOutcome out = env.step(a);
      learn(s, a, out.reward, out.next_state, out.done, alpha);
      const SplitReward split = split_reward(out.reward);
      rec.total_reward += out.reward;
      rec.total_pos += split.pos;
      rec.total_neg += split.neg;
      ++rec.steps;
      if (cfg_.record_trajectories) rec.trajectory.push_back({s, a, out.reward});
      s = out.next_state;
      if (out.done) break;
    }
    ++episodes_;
    return rec;
  }

  std::vector<EpisodeRecord> train(MarkovEnv& env, std::size_t episodes) {
    std::vector<EpisodeRecord> out;
    out.reserve(episodes);
    for (std::size_t i = 0; i < episodes; ++i) out.push_back(run_episode(env));
    return out;
  }
  std::vector<EpisodeRecord> train(MarkovEnv& env) { return train(env, cfg_.episodes); }

  /// Greedy episode without learning; leaves the agent's RNG untouched.
  Trajectory rollout(MarkovEnv& env) const {
    check_env(env);
    Trajectory traj;
    StateId s = env.reset();
    for (std::size_t t = 0; t < cfg_.max_steps_per_episode; ++t) {
      const ActionId a = greedy(s);
      const StepOutcome out = env.step(a);
      traj.push_back({s, a, out.reward});
      s = out.next_state;
      if (out.done) break;
    }
    return traj;
  }

  std::vector<ActionId> greedy_policy() const {
    std::vector<ActionId> policy(table_.num_states());
    for (StateId s = 0; s < policy.size(); ++s) policy[s] = greedy(s);
    return policy;
  }

 private:
  void check_env(const MarkovEnv& env) const {
    if (env.num_states() != table_.num_states() || env.num_actions() != table_.num_actions())
      throw InvalidArgument("environment dimensions do not match the agent's tables");
  }

  SplitQTable table_;
  BiasProfile profile_;
  LearningConfig cfg_;
  Rng rng_;
  std::size_t episodes_ = 0;
};

}  // namespace splitq

namespace splitq {

/// Mean total reward over the final `fraction` of episodes (at least one).
inline double final_mean_return(const std::vector<EpisodeRecord>& records, double fraction = 0.2) {
  if (records.empty()) throw InvalidArgument("no episodes to average");
  const auto n = records.size();
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) sum += records[i].total_reward;
  return sum / static_cast<double>(tail);
}

struct TrainedAgent {
  SplitQAgent agent;
  std::unique_ptr<MarkovEnv> env;
  std::vector<EpisodeRecord> records;
};

/// Builds a fresh agent, seeds a private copy of `env` from cfg.seed, and
/// trains for cfg.episodes.
inline TrainedAgent train_fresh(const MarkovEnv& env, const BiasProfile& profile, const LearningConfig& cfg) {
  auto local = env.clone();
  local->seed(derive_seed(cfg.seed, Stream::kEnvironment));
  SplitQAgent agent(local->num_states(), local->num_actions(), profile, cfg);
  auto records = agent.train(*local);
  return {std::move(agent), std::move(local), std::move(records)};
}

}  // namespace splitq
