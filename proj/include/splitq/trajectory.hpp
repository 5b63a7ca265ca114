#pragma once

#include <vector>

#include "splitq/split_q.hpp"

namespace splitq {

struct TrajectoryStep {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

/// One episode's (state, action, reward) records, in order.
using Trajectory = std::vector<TrajectoryStep>;

}  // namespace splitq
