#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "splitq/environment.hpp"

namespace splitq {

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<ActionId> policy;
  std::size_t sweeps = 0;
  /// Sup-norm change of each sweep, in order.
  std::vector<double> residuals;
};

/// Expected one-step return of (s, a) under `values`; terminal successors
/// contribute no bootstrap.
inline double q_value(const TabularModel& model, const std::vector<double>& values, double gamma, StateId s,
                      ActionId a) {
  double q = 0.0;
  for (const auto& o : model.outcomes(s, a))
    q += o.probability * (o.reward + (model.terminal[o.next] ? 0.0 : gamma * values[o.next]));
  return q;
}

/// Greedy policy with lowest-index tie-breaking (values within 1e-12 tie).
inline std::vector<ActionId> greedy_policy(const TabularModel& model, const std::vector<double>& values,
                                           double gamma) {
  std::vector<ActionId> policy(model.num_states, 0);
  for (StateId s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    double best = q_value(model, values, gamma, s, 0);
    for (ActionId a = 1; a < model.num_actions; ++a) {
      const double q = q_value(model, values, gamma, s, a);
      if (q > best + 1e-12) {
        best = q;
        policy[s] = a;
      }
    }
  }
  return policy;
}

/// Jacobi Bellman-optimality sweeps until the sup-norm change drops below tol.
/// Terminal states hold value 0.
inline ValueIterationResult value_iteration(const TabularModel& model, double gamma, double tol = 1e-10,
                                            std::size_t max_sweeps = 100000) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  model.validate();

  ValueIterationResult out;
  out.values.assign(model.num_states, 0.0);
  std::vector<double> next(model.num_states, 0.0);
  while (true) {
    if (out.sweeps >= max_sweeps)
      throw NumericError("value iteration did not converge within " + std::to_string(max_sweeps) + " sweeps");
    double change = 0.0;
    for (StateId s = 0; s < model.num_states; ++s) {
      if (model.terminal[s]) {
        next[s] = 0.0;
        continue;
      }
      double best = q_value(model, out.values, gamma, s, 0);
      for (ActionId a = 1; a < model.num_actions; ++a) best = std::max(best, q_value(model, out.values, gamma, s, a));
      next[s] = best;
      change = std::max(change, std::abs(best - out.values[s]));
    }
    out.values.swap(next);
    ++out.sweeps;
    out.residuals.push_back(change);
    if (change < tol) break;
  }
  out.policy = greedy_policy(model, out.values, gamma);
  return out;
}

/// Expected discounted return of a fixed deterministic policy (iterative).
inline std::vector<double> evaluate_policy(const TabularModel& model, const std::vector<ActionId>& policy,
                                           double gamma, double tol = 1e-12, std::size_t max_sweeps = 1000000) {
  std::vector<double> v(model.num_states, 0.0);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (StateId s = 0; s < model.num_states; ++s) {
      if (model.terminal[s]) continue;
      const double q = q_value(model, v, gamma, s, policy[s]);
      change = std::max(change, std::abs(q - v[s]));
      v[s] = q;
    }
    if (change < tol) return v;
  }
  throw NumericError("policy evaluation did not converge");
}

}  // namespace splitq
