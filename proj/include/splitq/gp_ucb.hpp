#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "splitq/errors.hpp"

namespace splitq {

using PhiVector = std::array<double, 4>;

struct Observation {
  PhiVector x{};
  double value = 0.0;
};

/// Observed (phi, mean return) pairs and fixed squared-exponential kernel
/// hyperparameters. `jitter` is added to the diagonal only when the exact
/// kernel matrix fails to factorize.
struct GPState {
  std::vector<Observation> points;
  double kernel_lengthscale = 1.0;
  double kernel_variance = 1.0;
  double noise_variance = 1e-6;
  double jitter = 1e-8;

  double kernel(const PhiVector& a, const PhiVector& b) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return kernel_variance * std::exp(-d2 / (2.0 * kernel_lengthscale * kernel_lengthscale));
  }

  void add(const PhiVector& x, double value) {
    if (!std::isfinite(value)) throw InvalidArgument("GP observation must be finite");
    for (double c : x)
      if (!std::isfinite(c)) throw InvalidArgument("GP input must be finite");
    points.push_back({x, value});
  }
};

inline void validate(const GPState& gp) {
  if (!(gp.kernel_lengthscale > 0.0) || !std::isfinite(gp.kernel_lengthscale))
    throw InvalidArgument("kernel_lengthscale must be > 0");
  if (!(gp.kernel_variance > 0.0) || !std::isfinite(gp.kernel_variance))
    throw InvalidArgument("kernel_variance must be > 0");
  if (!(gp.noise_variance >= 0.0) || !std::isfinite(gp.noise_variance))
    throw InvalidArgument("noise_variance must be >= 0");
  if (!(gp.jitter >= 0.0)) throw InvalidArgument("jitter must be >= 0");
}

struct Posterior {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Factorizes the kernel matrix once so many query points can be scored.
class GPPosterior {
 public:
  explicit GPPosterior(const GPState& gp) : gp_(gp) {
    validate(gp);
    const auto n = static_cast<Eigen::Index>(gp.points.size());
    if (n == 0) return;
    Eigen::MatrixXd k(n, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = gp.points[i].value;
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = gp.kernel(gp.points[i].x, gp.points[j].x);
    }
    k.diagonal().array() += gp.noise_variance;
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) {
      k.diagonal().array() += gp.jitter;
      llt_.compute(k);
      if (llt_.info() != Eigen::Success)
        throw NumericError("GP kernel matrix is numerically singular; increase noise_variance");
    }
    weights_ = llt_.solve(y);
  }

  Posterior operator()(const PhiVector& x) const {
    const auto n = static_cast<Eigen::Index>(gp_.points.size());
    const double prior = gp_.kernel_variance;
    if (n == 0) return {0.0, std::sqrt(prior)};
    Eigen::VectorXd kx(n);
    for (Eigen::Index i = 0; i < n; ++i) kx(i) = gp_.kernel(gp_.points[i].x, x);
    const double mean = kx.dot(weights_);
    const Eigen::VectorXd v = llt_.matrixL().solve(kx);
    const double var = std::max(0.0, prior - v.squaredNorm());
    return {mean, std::sqrt(var)};
  }

 private:
  const GPState& gp_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;
};

/// Exact zero-mean GP posterior at x.
inline Posterior posterior(const GPState& gp, const PhiVector& x) { return GPPosterior(gp)(x); }

inline double ucb_score(const Posterior& p, double beta) { return p.mean + std::sqrt(beta) * p.stddev; }

inline double ucb_score(const GPState& gp, const PhiVector& x, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  return ucb_score(posterior(gp, x), beta);
}

/// Per-coordinate candidate values; the search space is their product.
struct CandidateGrid {
  std::array<std::vector<double>, 4> axes;

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }

  /// Grid points in lexicographic order of the vector.
  std::vector<PhiVector> points() const {
    std::array<std::vector<double>, 4> sorted = axes;
    for (auto& a : sorted) std::sort(a.begin(), a.end());
    std::vector<PhiVector> out;
    out.reserve(size());
    for (double a : sorted[0])
      for (double b : sorted[1])
        for (double c : sorted[2])
          for (double d : sorted[3]) out.push_back({a, b, c, d});
    return out;
  }
};

inline void validate(const CandidateGrid& grid) {
  for (const auto& axis : grid.axes) {
    if (axis.empty()) throw InvalidArgument("candidate grid axis is empty");
    for (double v : axis)
      if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("candidate grid values must be finite and >= 0");
  }
}

/// Grid point with the largest UCB score; the lexicographically first wins ties.
inline PhiVector propose_next(const GPState& gp, const CandidateGrid& grid, double beta) {
  validate(grid);
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  const GPPosterior post(gp);
  const auto candidates = grid.points();
  std::size_t best = 0;
  double best_score = ucb_score(post(candidates[0]), beta);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double score = ucb_score(post(candidates[i]), beta);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return candidates[best];
}

struct BetaSchedule {
  enum class Kind { kConstant, kLogarithmic };
  Kind kind = Kind::kConstant;
  double beta = 4.0;
  /// Confidence parameter of the logarithmic schedule.
  double delta = 0.1;

  /// Beta for 1-based round t: constant, or 2 log(|D| t^2 pi^2 / (6 delta)).
  double at(std::size_t round, std::size_t grid_size) const {
    if (kind == Kind::kConstant) return beta;
    const double t = static_cast<double>(round);
    return 2.0 * std::log(static_cast<double>(grid_size) * t * t * std::numbers::pi * std::numbers::pi / (6.0 * delta));
  }
};

struct AdaptRound {
  PhiVector phi{};
  double value = 0.0;
  PhiVector incumbent_phi{};
  double incumbent_value = 0.0;
};

struct AdaptResult {
  std::vector<AdaptRound> history;
  GPState gp;

  const AdaptRound& incumbent() const { return history.back(); }
};

/// Propose / evaluate / observe for `rounds` rounds against an arbitrary
/// objective over the grid.
inline AdaptResult adapt_loop(const std::function<double(const PhiVector&)>& objective, const CandidateGrid& grid,
                              std::size_t rounds, GPState gp, const BetaSchedule& schedule = {}) {
  if (rounds == 0) throw InvalidArgument("rounds must be >= 1");
  validate(grid);
  validate(gp);
  AdaptResult out;
  const std::size_t grid_size = grid.size();
  for (std::size_t r = 1; r <= rounds; ++r) {
    const PhiVector phi = propose_next(gp, grid, schedule.at(r, grid_size));
    const double value = objective(phi);
    gp.add(phi, value);
    AdaptRound round{phi, value, phi, value};
    if (!out.history.empty() && out.history.back().incumbent_value >= value) {
      round.incumbent_phi = out.history.back().incumbent_phi;
      round.incumbent_value = out.history.back().incumbent_value;
    }
    out.history.push_back(round);
  }
  out.gp = std::move(gp);
  return out;
}

}  // namespace splitq
