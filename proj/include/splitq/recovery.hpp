#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "splitq/agent.hpp"
#include "splitq/csv.hpp"
#include "splitq/errors.hpp"
#include "splitq/trajectory.hpp"

namespace splitq {

/// Discounted state-action visitation, averaged over trajectories.
struct FeatureExpectation {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  double gamma = 0.0;
  std::vector<double> values;  // indexed s * num_actions + a

  double at(StateId s, ActionId a) const { return values.at(s * num_actions + a); }

  double distance(const FeatureExpectation& other) const {
    if (other.values.size() != values.size()) throw InvalidArgument("feature expectation sizes differ");
    double d2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) d2 += (values[i] - other.values[i]) * (values[i] - other.values[i]);
    return std::sqrt(d2);
  }
};

/// (1/N) sum_trajectories sum_t gamma^t [s_t, a_t], with t restarting at 0.
inline FeatureExpectation feature_expectations(const std::vector<Trajectory>& trajs, std::size_t num_states,
                                               std::size_t num_actions, double gamma) {
  if (trajs.empty()) throw InvalidArgument("feature_expectations needs at least one trajectory");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
  FeatureExpectation fe{num_states, num_actions, gamma, std::vector<double>(num_states * num_actions, 0.0)};
  for (const auto& traj : trajs) {
    double discount = 1.0;
    for (const auto& step : traj) {
      if (step.state >= num_states || step.action >= num_actions)
        throw IndexError("trajectory step (" + std::to_string(step.state) + ", " + std::to_string(step.action) +
                         ") out of range");
      fe.values[step.state * num_actions + step.action] += discount;
      discount *= gamma;
    }
  }
  const double n = static_cast<double>(trajs.size());
  for (double& v : fe.values) v /= n;
  return fe;
}

/// Trains an agent with `profile` (seeded from cfg.seed) and records
/// `n_trajectories` greedy rollouts on the agent's own environment copy.
inline std::vector<Trajectory> generate_expert(const MarkovEnv& env, const BiasProfile& profile,
                                               const LearningConfig& cfg, std::size_t n_trajectories) {
  LearningConfig train_cfg = cfg;
  train_cfg.record_trajectories = false;
  auto trained = train_fresh(env, profile, train_cfg);
  std::vector<Trajectory> out;
  out.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) out.push_back(trained.agent.rollout(*trained.env));
  return out;
}

struct CandidateDistance {
  BiasProfile profile;
  double distance = 0.0;
};

struct FitResult {
  std::size_t best = 0;
  std::vector<CandidateDistance> candidates;  // input order

  const BiasProfile& best_profile() const { return candidates.at(best).profile; }
};

/// For each candidate, averages feature expectations of expert rollouts
/// generated with seeds cfg.seed .. cfg.seed + seeds_per_candidate - 1 and
/// measures the Euclidean distance to the observed trajectories' features.
/// The first candidate wins ties.
inline FitResult fit_profile(const std::vector<Trajectory>& expert, const MarkovEnv& env,
                             const std::vector<BiasProfile>& candidates, const LearningConfig& cfg, double gamma,
                             std::size_t seeds_per_candidate) {
  if (candidates.empty()) throw InvalidArgument("fit_profile needs at least one candidate");
  if (seeds_per_candidate == 0) throw InvalidArgument("seeds_per_candidate must be >= 1");
  const std::size_t ns = env.num_states();
  const std::size_t na = env.num_actions();
  const FeatureExpectation target = feature_expectations(expert, ns, na, gamma);
  const std::size_t n_traj = expert.size();

  FitResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    FeatureExpectation mean{ns, na, gamma, std::vector<double>(ns * na, 0.0)};
    for (std::size_t k = 0; k < seeds_per_candidate; ++k) {
      LearningConfig run = cfg;
      run.seed = cfg.seed + k;
      const auto fe = feature_expectations(generate_expert(env, candidates[c], run, n_traj), ns, na, gamma);
      for (std::size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += fe.values[i];
    }
    for (double& v : mean.values) v /= static_cast<double>(seeds_per_candidate);
    const double d = mean.distance(target);
    out.candidates.push_back({candidates[c], d});
    if (d < best) {
      best = d;
      out.best = c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: episode_id,t,state,action,reward
// ---------------------------------------------------------------------------

inline constexpr const char* kTrajectoryHeader = "episode_id,t,state,action,reward";

inline void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs) {
  os << kTrajectoryHeader << '\n';
  for (std::size_t e = 0; e < trajs.size(); ++e)
    for (std::size_t t = 0; t < trajs[e].size(); ++t) {
      const auto& step = trajs[e][t];
      os << e << ',' << t << ',' << step.state << ',' << step.action << ',' << csv::format(step.reward) << '\n';
    }
}

/// Rows must be grouped by episode_id with t counting up from 0 inside each
/// episode. Episode ids need not be contiguous.
inline std::vector<Trajectory> read_trajectories(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  bool have_episode = false;
  std::size_t current = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = csv::trim(line);
    if (line_no == 1) {
      if (text != kTrajectoryHeader)
        throw ParseError(line_no, std::string("expected header '") + kTrajectoryHeader + "'");
      continue;
    }
    if (text.empty()) continue;
    const auto fields = csv::split(text);
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    std::size_t episode = 0, t = 0, state = 0, action = 0;
    double reward = 0.0;
    if (!csv::parse(fields[0], episode)) throw ParseError(line_no, "bad episode_id");
    if (!csv::parse(fields[1], t)) throw ParseError(line_no, "bad t");
    if (!csv::parse(fields[2], state)) throw ParseError(line_no, "bad state");
    if (!csv::parse(fields[3], action)) throw ParseError(line_no, "bad action");
    if (!csv::parse(fields[4], reward) || !std::isfinite(reward)) throw ParseError(line_no, "bad reward");
    if (!have_episode || episode != current) {
      out.emplace_back();
      current = episode;
      have_episode = true;
    }
    if (t != out.back().size())
      throw ParseError(line_no, "t=" + std::to_string(t) + " out of sequence (expected " +
                                    std::to_string(out.back().size()) + ")");
    out.back().push_back({state, action, reward});
  }
  if (line_no == 0) throw ParseError(1, "empty trajectory file");
  return out;
}

}  // namespace splitq
