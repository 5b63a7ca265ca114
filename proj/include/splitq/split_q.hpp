#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splitq/bias_profile.hpp"
#include "splitq/errors.hpp"
#include "splitq/rng.hpp"

namespace splitq {

using StateId = std::size_t;
using ActionId = std::size_t;

/// Dense, zero-initialized pair of action-value tables: one fed by the
/// positive part of each reward, one by the negative part.
class SplitQTable {
 public:
  SplitQTable() = default;
  SplitQTable(std::size_t num_states, std::size_t num_actions)
      : num_states_(num_states),
        num_actions_(num_actions),
        pos_(num_states * num_actions, 0.0),
        neg_(num_states * num_actions, 0.0) {
    if (num_states == 0 || num_actions == 0)
      throw InvalidArgument("SplitQTable needs at least one state and one action");
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  double& pos(StateId s, ActionId a) { return pos_[index(s, a)]; }
  double pos(StateId s, ActionId a) const { return pos_[index(s, a)]; }
  double& neg(StateId s, ActionId a) { return neg_[index(s, a)]; }
  double neg(StateId s, ActionId a) const { return neg_[index(s, a)]; }

  std::span<const double> pos_row(StateId s) const { return {&pos_[index(s, 0)], num_actions_}; }
  std::span<const double> neg_row(StateId s) const { return {&neg_[index(s, 0)], num_actions_}; }

  const std::vector<double>& pos_values() const { return pos_; }
  const std::vector<double>& neg_values() const { return neg_; }

  void check_state(StateId s) const {
    if (s >= num_states_)
      throw IndexError("state " + std::to_string(s) + " out of range [0, " +
                       std::to_string(num_states_) + ")");
  }
  void check_action(ActionId a) const {
    if (a >= num_actions_)
      throw IndexError("action " + std::to_string(a) + " out of range [0, " +
                       std::to_string(num_actions_) + ")");
  }

 private:
  std::size_t index(StateId s, ActionId a) const {
    check_state(s);
    check_action(a);
    return s * num_actions_ + a;
  }

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> pos_;
  std::vector<double> neg_;
};

struct SplitReward {
  double pos = 0.0;
  double neg = 0.0;
};

/// r = pos + neg with pos = max(r, 0), neg = min(r, 0).
inline SplitReward split_reward(double r) {
  if (!std::isfinite(r)) throw InvalidArgument("reward must be finite");
  return {std::max(r, 0.0), std::min(r, 0.0)};
}

/// phi2 * Q+(s, .) + phi4 * Q-(s, .)
inline std::vector<double> combined_q(const SplitQTable& table, const BiasProfile& profile, StateId s) {
  table.check_state(s);
  auto pos = table.pos_row(s);
  auto neg = table.neg_row(s);
  std::vector<double> out(table.num_actions());
  for (std::size_t a = 0; a < out.size(); ++a)
    out[a] = profile.phi2() * pos[a] + profile.phi4() * neg[a];
  return out;
}

/// Index of the largest value; ties go to the lowest index.
inline ActionId argmax(std::span<const double> values) {
  ActionId best = 0;
  for (ActionId a = 1; a < values.size(); ++a)
    if (values[a] > values[best]) best = a;
  return best;
}

inline ActionId greedy_action(const SplitQTable& table, const BiasProfile& profile, StateId s) {
  return argmax(combined_q(table, profile, s));
}

/// Epsilon-greedy over the combined values. Always consumes one uniform draw,
/// plus one uniform action draw when exploring.
inline ActionId select_action(const SplitQTable& table, const BiasProfile& profile, StateId s,
                              double epsilon, Rng& rng) {
  table.check_state(s);
  if (uniform01(rng) < epsilon) return uniform_index(rng, table.num_actions());
  return greedy_action(table, profile, s);
}

/// One split Q-learning step. Both streams bootstrap at the action that
/// maximizes the combined value at s_next, read before this update; the
/// bootstrap is zero when s_next is terminal.
inline void update_streams(SplitQTable& table, const BiasProfile& profile, double alpha, double gamma,
                           StateId s, ActionId a, double r, StateId s_next, bool done) {
  table.check_state(s);
  table.check_action(a);
  table.check_state(s_next);
  const SplitReward split = split_reward(r);

  double boot_pos = 0.0;
  double boot_neg = 0.0;
  if (!done) {
    const ActionId next = greedy_action(table, profile, s_next);
    boot_pos = table.pos(s_next, next);
    boot_neg = table.neg(s_next, next);
  }

  const double old_pos = table.pos(s, a);
  const double old_neg = table.neg(s, a);
  const double new_pos = profile.phi1() * old_pos + alpha * (split.pos + gamma * boot_pos - old_pos);
  const double new_neg = profile.phi3() * old_neg + alpha * (split.neg + gamma * boot_neg - old_neg);

  auto guard = [&](double v, const char* stream) {
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite ") + stream + " value at (state " + std::to_string(s) +
                         ", action " + std::to_string(a) + ")");
  };
  guard(new_pos, "Q+");
  guard(new_neg, "Q-");
  table.pos(s, a) = new_pos;
  table.neg(s, a) = new_neg;
}

}  // namespace splitq
