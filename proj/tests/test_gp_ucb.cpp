#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "splitq/adaptive.hpp"
#include "splitq/environments.hpp"
#include "splitq/gp_ucb.hpp"

using namespace splitq;

namespace {

CandidateGrid unit_grid() {
  CandidateGrid g;
  for (auto& a : g.axes) a = {0.0, 0.25, 0.5, 0.75, 1.0};
  return g;
}

PhiVector random_point(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST(Posterior, PriorWithoutObservations) {
  GPState gp;
  gp.kernel_variance = 2.5;
  const auto p = posterior(gp, {0.3, 1, 2, 3});
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_DOUBLE_EQ(p.stddev, std::sqrt(2.5));
}

TEST(Posterior, InterpolatesNoiselessObservation) {
  GPState gp;
  gp.noise_variance = 0.0;
  gp.add({0.1, 0.2, 0.3, 0.4}, 3.7);
  const auto p = posterior(gp, {0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(p.mean, 3.7, 1e-12);
  EXPECT_NEAR(p.stddev, 0.0, 1e-6);
}

TEST(Posterior, MidpointMatchesDenseOracle) {
  GPState gp;
  gp.kernel_lengthscale = 0.7;
  gp.noise_variance = 0.01;
  gp.add({0, 0, 0, 0}, 1.0);
  gp.add({1, 1, 0, 0}, -2.0);
  oracle::DenseGP dense{{{0, 0, 0, 0}, {1, 1, 0, 0}}, {1.0, -2.0}, 0.7, 1.0, 0.01};
  const PhiVector mid{0.5, 0.5, 0, 0};
  const auto p = posterior(gp, mid);
  const auto [m, s] = dense.posterior(mid);
  EXPECT_NEAR(p.mean, m, 1e-8);
  EXPECT_NEAR(p.stddev, s, 1e-8);
}

TEST(Posterior, StddevAtObservedPointsBoundedByNoise) {
  Rng rng(8);
  for (double noise : {0.0, 1e-4, 0.01, 0.5}) {
    GPState gp;
    gp.noise_variance = noise;
    for (int i = 0; i < 20; ++i) gp.add(random_point(rng), std::normal_distribution<double>()(rng));
    const GPPosterior post(gp);
    for (const auto& o : gp.points) EXPECT_LE(post(o.x).stddev, std::sqrt(noise) + 1e-6);
  }
}

TEST(Posterior, DuplicatePointsFallBackToJitter) {
  GPState gp;
  gp.noise_variance = 0.0;
  gp.add({0.5, 0.5, 0.5, 0.5}, 1.0);
  gp.add({0.5, 0.5, 0.5, 0.5}, 1.0);
  EXPECT_NO_THROW(posterior(gp, {0, 0, 0, 0}));
}

TEST(Posterior, SingularMatrixIsReported) {
  GPState gp;
  gp.noise_variance = 0.0;
  gp.jitter = 0.0;
  gp.add({0.5, 0.5, 0.5, 0.5}, 1.0);
  gp.add({0.5, 0.5, 0.5, 0.5}, 2.0);
  EXPECT_THROW(posterior(gp, {0, 0, 0, 0}), NumericError);
}

TEST(Posterior, InvalidHyperparameters) {
  GPState gp;
  gp.kernel_lengthscale = 0.0;
  EXPECT_THROW(posterior(gp, {}), InvalidArgument);
  gp = {};
  gp.kernel_variance = -1.0;
  EXPECT_THROW(posterior(gp, {}), InvalidArgument);
  EXPECT_THROW(GPState{}.add({}, std::nan("")), InvalidArgument);
}

TEST(UcbScore, Examples) {
  GPState gp;
  EXPECT_EQ(ucb_score(gp, {1, 2, 3, 4}, 4.0), 2.0);
  gp.add({0.2, 0.2, 0.2, 0.2}, 1.5);
  const PhiVector x{0.3, 0.1, 0.2, 0.25};
  EXPECT_EQ(ucb_score(gp, x, 0.0), posterior(gp, x).mean);
  EXPECT_THROW(ucb_score(gp, x, -1.0), InvalidArgument);
}

TEST(UcbScore, MonotoneInBeta) {
  Rng rng(4);
  GPState gp;
  for (int i = 0; i < 10; ++i) gp.add(random_point(rng), std::normal_distribution<double>()(rng));
  for (int i = 0; i < 50; ++i) {
    const auto x = random_point(rng);
    double prev = ucb_score(gp, x, 0.0);
    for (double beta : {0.5, 1.0, 4.0, 9.0, 100.0}) {
      const double s = ucb_score(gp, x, beta);
      EXPECT_GE(s, prev);
      prev = s;
    }
  }
}

TEST(ProposeNext, EmptyHistoryPicksLexicographicFirst) {
  CandidateGrid g;
  g.axes = {std::vector<double>{0.5, 0.1}, {3.0, 1.0}, {0.2}, {7.0, 2.0}};
  EXPECT_EQ(propose_next(GPState{}, g, 4.0), (PhiVector{0.1, 1.0, 0.2, 2.0}));
}

TEST(ProposeNext, SinglePointGrid) {
  CandidateGrid g;
  g.axes = {std::vector<double>{0.3}, {1.0}, {0.3}, {1.0}};
  GPState gp;
  gp.add({0, 0, 0, 0}, 100.0);
  EXPECT_EQ(propose_next(gp, g, 4.0), (PhiVector{0.3, 1.0, 0.3, 1.0}));
}

TEST(ProposeNext, PureExploitationMatchesExhaustiveScoring) {
  Rng rng(21);
  const auto grid = unit_grid();
  const auto points = grid.points();
  for (int trial = 0; trial < 10; ++trial) {
    GPState gp;
    gp.kernel_lengthscale = 0.5;
    gp.noise_variance = 1e-4;
    const auto peak = points[uniform_index(rng, points.size())];
    for (int i = 0; i < 15; ++i) {
      const auto x = points[uniform_index(rng, points.size())];
      double d = 0;
      for (int k = 0; k < 4; ++k) d += (x[k] - peak[k]) * (x[k] - peak[k]);
      gp.add(x, 1.0 - d);
    }
    // Oracle: score every grid point with the dense solver, keep the first max.
    oracle::DenseGP dense{{}, {}, gp.kernel_lengthscale, gp.kernel_variance, gp.noise_variance};
    for (const auto& o : gp.points) {
      dense.xs.push_back(o.x);
      dense.ys.push_back(o.value);
    }
    std::size_t best = 0;
    double best_mean = -1e300;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double m = dense.posterior(points[i]).first;
      if (m > best_mean + 1e-9) {
        best_mean = m;
        best = i;
      }
    }
    EXPECT_EQ(propose_next(gp, grid, 0.0), points[best]);
  }
}

TEST(ProposeNext, Deterministic) {
  Rng rng(5);
  GPState gp;
  for (int i = 0; i < 8; ++i) gp.add(random_point(rng), std::normal_distribution<double>()(rng));
  const auto grid = unit_grid();
  EXPECT_EQ(propose_next(gp, grid, 2.0), propose_next(gp, grid, 2.0));
}

TEST(BetaSchedule, LogGrowth) {
  BetaSchedule s;
  s.kind = BetaSchedule::Kind::kLogarithmic;
  EXPECT_NEAR(s.at(1, 625), 2.0 * std::log(625.0 * M_PI * M_PI / 0.6), 1e-12);
  EXPECT_GT(s.at(10, 625), s.at(2, 625));
  EXPECT_EQ(BetaSchedule{}.at(7, 625), 4.0);
}

TEST(AdaptLoop, FindsQuadraticOptimum) {
  const auto grid = unit_grid();
  const auto points = grid.points();
  Rng rng(31);
  GPState gp;
  gp.kernel_lengthscale = 0.8;
  for (int trial = 0; trial < 5; ++trial) {
    const auto peak = points[uniform_index(rng, points.size())];
    auto f = [&](const PhiVector& x) {
      double d = 0;
      for (int k = 0; k < 4; ++k) d += (x[k] - peak[k]) * (x[k] - peak[k]);
      return 1.0 - d;
    };
    const auto r = adapt_loop(f, grid, 25, gp);
    EXPECT_EQ(r.incumbent().incumbent_phi, peak);
    EXPECT_EQ(r.history.size(), 25u);
    for (std::size_t i = 1; i < r.history.size(); ++i)
      EXPECT_GE(r.history[i].incumbent_value, r.history[i - 1].incumbent_value);
  }
}

TEST(AdaptLoop, SingleRoundAndErrors) {
  const auto r = adapt_loop([](const PhiVector&) { return 1.0; }, unit_grid(), 1, GPState{});
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_THROW(adapt_loop([](const PhiVector&) { return 1.0; }, unit_grid(), 0, GPState{}), InvalidArgument);
}

TEST(AdaptLoop, EnvironmentRunsAreDeterministic) {
  const ModelEnv env(make_risky_path(6, 1, 0.5, 2.0, 10.0));
  LearningConfig cfg;
  cfg.gamma = 0.95;
  cfg.epsilon = 0.2;
  cfg.seed = 4;
  CandidateGrid grid;
  grid.axes = {std::vector<double>{0.5, 1.0}, {1.0, 100.0}, {0.5, 1.0}, {1.0, 100.0}};
  GPState gp;
  gp.kernel_variance = 25.0;
  gp.kernel_lengthscale = 20.0;
  const auto a = adapt_loop(env, cfg, grid, 4, 100, gp);
  const auto b = adapt_loop(env, cfg, grid, 4, 100, gp);
  ASSERT_EQ(a.history.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.history[i].phi, b.history[i].phi);
    EXPECT_EQ(a.history[i].value, b.history[i].value);
  }
}

TEST(AdaptLoop, RiskyPathNotWorseThanStandard) {
  const ModelEnv env(make_risky_path(6, 1, 0.5, 2.0, 10.0));
  auto config = [](std::uint64_t seed) {
    LearningConfig cfg;
    cfg.gamma = 0.95;
    cfg.epsilon = 0.3;
    cfg.epsilon_end = 0.0;
    cfg.epsilon_decay_episodes = 225;
    cfg.episodes = 300;
    cfg.max_steps_per_episode = 100;
    cfg.seed = seed;
    cfg.record_trajectories = false;
    return cfg;
  };
  CandidateGrid grid;
  grid.axes = {std::vector<double>{0.1, 0.3, 0.5, 0.75, 1.0}, {0.5, 1, 5, 20, 100}, {0.1, 0.3, 0.5, 0.75, 1.0},
               {0.5, 1, 5, 20, 100}};
  GPState gp;
  gp.kernel_variance = 25.0;
  gp.noise_variance = 0.1;
  std::vector<double> adapted, standard;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto phi = adapt_loop(env, config(seed), grid, 20, 300, gp).incumbent().incumbent_phi;
    const auto tuned = make_profile("adaptive", {phi[0], phi[1], phi[2], phi[3]});
    adapted.push_back(final_mean_return(train_fresh(env, tuned, config(1000 + seed)).records));
    standard.push_back(final_mean_return(train_fresh(env, standard_profile(), config(1000 + seed)).records));
  }
  auto mean = [](const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); };
  double ss = 0;
  for (double x : standard) ss += (x - mean(standard)) * (x - mean(standard));
  const double stderr_standard = std::sqrt(ss / (standard.size() - 1)) / std::sqrt(double(standard.size()));
  EXPECT_GE(mean(adapted), mean(standard) - stderr_standard);
}
