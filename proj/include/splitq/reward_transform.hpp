#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "splitq/environment.hpp"

namespace splitq {

/// Size and frequency rescaling for each reward stream.
struct StreamScaling {
  double pos_scale = 1.0;
  double neg_scale = 1.0;
  double pos_drop_prob = 0.0;
  double neg_drop_prob = 0.0;
  friend bool operator==(const StreamScaling&, const StreamScaling&) = default;
};

/// A scaling that applies from the first episode, optionally replaced by
/// `after_switch` from episode `switch_episode` onward.
struct RewardTransform {
  StreamScaling initial;
  std::optional<std::size_t> switch_episode;
  StreamScaling after_switch;

  static RewardTransform identity() { return {}; }
  static RewardTransform positive_only() { return {{1.0, 0.0, 0.0, 0.0}, std::nullopt, {}}; }
  static RewardTransform negative_only() { return {{0.0, 1.0, 0.0, 0.0}, std::nullopt, {}}; }

  const StreamScaling& active(std::size_t episode) const {
    return switch_episode && episode >= *switch_episode ? after_switch : initial;
  }
  bool is_identity() const {
    return initial == StreamScaling{} && (!switch_episode || after_switch == StreamScaling{});
  }
};

inline void validate(const StreamScaling& s) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!std::isfinite(s.pos_scale) || !std::isfinite(s.neg_scale) || s.pos_scale < 0.0 || s.neg_scale < 0.0)
    throw InvalidArgument("reward scales must be finite and >= 0");
  if (!prob(s.pos_drop_prob) || !prob(s.neg_drop_prob))
    throw InvalidArgument("drop probabilities must lie in [0, 1]");
}

inline void validate(const RewardTransform& t) {
  validate(t.initial);
  if (t.switch_episode) validate(t.after_switch);
}

/// Applies a RewardTransform to another environment's rewards. Transitions
/// and termination pass through untouched. The episode counter advances on
/// every reset (the first episode is 0).
class RewardWrapper final : public MarkovEnv {
 public:
  RewardWrapper(std::unique_ptr<MarkovEnv> inner, RewardTransform transform, std::uint64_t seed = 0)
      : inner_(std::move(inner)), transform_(transform), rng_(seed) {
    validate(transform_);
  }
  RewardWrapper(const RewardWrapper& other)
      : inner_(other.inner_->clone()),
        transform_(other.transform_),
        rng_(other.rng_),
        current_(other.current_),
        next_(other.next_) {}

  std::size_t num_states() const override { return inner_->num_states(); }
  std::size_t num_actions() const override { return inner_->num_actions(); }
  std::size_t horizon() const override { return inner_->horizon(); }

  StateId reset() override {
    current_ = next_++;
    return inner_->reset();
  }

  StepOutcome step(ActionId action) override {
    StepOutcome out = inner_->step(action);
    out.reward = transform(out.reward);
    return out;
  }

  /// Seeds the inner environment; the wrapper's own drop stream is derived.
  void seed(std::uint64_t seed) override {
    inner_->seed(seed);
    rng_.seed(derive_seed(seed, Stream::kRewardTransform));
  }

  std::unique_ptr<MarkovEnv> clone() const override { return std::make_unique<RewardWrapper>(*this); }

  /// Index of the episode in progress.
  std::size_t episode() const { return current_; }
  /// The next reset() starts episode `episode`.
  void set_next_episode(std::size_t episode) { next_ = episode; }

  double transform(double r) {
    const SplitReward split = split_reward(r);
    const StreamScaling& s = transform_.active(episode());
    double pos = split.pos * s.pos_scale;
    double neg = split.neg * s.neg_scale;
    if (s.pos_drop_prob > 0.0 && uniform01(rng_) < s.pos_drop_prob) pos = 0.0;
    if (s.neg_drop_prob > 0.0 && uniform01(rng_) < s.neg_drop_prob) neg = 0.0;
    return pos + neg;
  }

  const MarkovEnv& inner() const { return *inner_; }

 private:
  std::unique_ptr<MarkovEnv> inner_;
  RewardTransform transform_;
  Rng rng_;
  std::size_t current_ = 0;
  std::size_t next_ = 0;
};

inline std::unique_ptr<MarkovEnv> wrap_rewards(std::unique_ptr<MarkovEnv> env, const RewardTransform& t,
                                               std::uint64_t seed = 0) {
  return std::make_unique<RewardWrapper>(std::move(env), t, seed);
}

}  // namespace splitq
