#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "splitq/errors.hpp"
#include "splitq/rng.hpp"
#include "splitq/split_q.hpp"

namespace splitq {

struct StepOutcome {
  StateId next_state = 0;
  double reward = 0.0;
  bool done = false;
};

/// Episodic tabular environment. Each instance owns its random stream.
class MarkovEnv {
 public:
  virtual ~MarkovEnv() = default;

  virtual std::size_t num_states() const = 0;
  virtual std::size_t num_actions() const = 0;
  /// Declared episode-length bound; callers enforce it with max_steps.
  virtual std::size_t horizon() const = 0;

  virtual StateId reset() = 0;
  virtual StepOutcome step(ActionId action) = 0;
  virtual void seed(std::uint64_t seed) = 0;
  virtual std::unique_ptr<MarkovEnv> clone() const = 0;
};

/// One possible result of taking an action: where it leads, how likely, and
/// the reward collected on the way.
struct Outcome {
  StateId next = 0;
  double probability = 1.0;
  double reward = 0.0;
};

/// Known dynamics of a finite episodic MDP. Terminal states have no outgoing
/// transitions that matter; their value is zero.
struct TabularModel {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  StateId start = 0;
  std::vector<std::vector<Outcome>> transitions;  // indexed s * num_actions + a
  std::vector<bool> terminal;
  std::size_t horizon = 1000;

  TabularModel() = default;
  TabularModel(std::size_t states, std::size_t actions)
      : num_states(states),
        num_actions(actions),
        transitions(states * actions),
        terminal(states, false) {}

  std::vector<Outcome>& outcomes(StateId s, ActionId a) { return transitions.at(s * num_actions + a); }
  const std::vector<Outcome>& outcomes(StateId s, ActionId a) const {
    return transitions.at(s * num_actions + a);
  }

  /// Every non-terminal row is a distribution (sum 1 within 1e-9) over valid
  /// states with finite rewards.
  void validate() const {
    if (num_states == 0 || num_actions == 0) throw InvalidArgument("empty model");
    if (transitions.size() != num_states * num_actions || terminal.size() != num_states)
      throw InvalidArgument("model tables have inconsistent sizes");
    if (start >= num_states) throw InvalidArgument("start state out of range");
    for (StateId s = 0; s < num_states; ++s) {
      if (terminal[s]) continue;
      for (ActionId a = 0; a < num_actions; ++a) {
        const auto& row = outcomes(s, a);
        double total = 0.0;
        for (const auto& o : row) {
          if (o.next >= num_states) throw InvalidArgument("transition to unknown state");
          if (!(o.probability >= 0.0) || !std::isfinite(o.reward))
            throw InvalidArgument("invalid probability or reward");
          total += o.probability;
        }
        if (std::abs(total - 1.0) > 1e-9)
          throw InvalidArgument("row (" + std::to_string(s) + ", " + std::to_string(a) +
                                ") sums to " + std::to_string(total));
      }
    }
  }
};

/// Samples episodes from a TabularModel.
class ModelEnv final : public MarkovEnv {
 public:
  explicit ModelEnv(TabularModel model, std::uint64_t seed = 0)
      : model_(std::make_shared<const TabularModel>(std::move(model))), rng_(seed) {
    model_->validate();
  }
  ModelEnv(std::shared_ptr<const TabularModel> model, std::uint64_t seed)
      : model_(std::move(model)), rng_(seed) {
    model_->validate();
  }

  std::size_t num_states() const override { return model_->num_states; }
  std::size_t num_actions() const override { return model_->num_actions; }
  std::size_t horizon() const override { return model_->horizon; }
  const TabularModel& model() const { return *model_; }

  StateId reset() override {
    state_ = model_->start;
    active_ = true;
    return state_;
  }

  StepOutcome step(ActionId action) override {
    if (!active_) throw InvalidArgument("step() called before reset() or after episode end");
    if (action >= model_->num_actions) throw IndexError("action " + std::to_string(action) + " out of range");
    const auto& row = model_->outcomes(state_, action);
    std::size_t pick = 0;
    if (row.size() > 1) {
      const double u = uniform01(rng_);
      double cumulative = 0.0;
      pick = row.size() - 1;
      for (std::size_t i = 0; i < row.size(); ++i) {
        cumulative += row[i].probability;
        if (u < cumulative) {
          pick = i;
          break;
        }
      }
    }
    const Outcome& o = row[pick];
    state_ = o.next;
    const bool done = model_->terminal[state_];
    if (done) active_ = false;
    return {state_, o.reward, done};
  }

  void seed(std::uint64_t seed) override { rng_.seed(seed); }
  std::unique_ptr<MarkovEnv> clone() const override { return std::make_unique<ModelEnv>(*this); }

 private:
  std::shared_ptr<const TabularModel> model_;
  Rng rng_;
  StateId state_ = 0;
  bool active_ = false;
};

}  // namespace splitq
