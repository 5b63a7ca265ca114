// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "splitq/harness/commands.hpp"
#include "splitq/splitq.hpp"

using namespace splitq;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = r.ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s (%s; %.2fs, limit %.0fs%s)\n", pass ? "PASS" : "FAIL", id, name, r.detail.c_str(),
              secs, limit_seconds, in_time ? "" : ", too slow");
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("splitq_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

// Returns the number of mismatching actions and the largest value gap.
std::pair<std::size_t, double> classical_gap(const ModelEnv& env, const LearningConfig& cfg) {
  auto local = env.clone();
  local->seed(derive_seed(cfg.seed, Stream::kEnvironment));
  SplitQAgent agent(env.num_states(), env.num_actions(), standard_profile(), cfg);
  std::vector<ActionId> actions;
  for (const auto& rec : agent.train(*local))
    for (const auto& step : rec.trajectory) actions.push_back(step.action);
  oracle::ClassicalQ classical(env.num_states(), env.num_actions());
  classical.run(env, cfg.alpha, cfg.gamma, cfg.epsilon, cfg.epsilon_end, cfg.epsilon_decay_episodes, cfg.episodes,
                cfg.max_steps_per_episode, cfg.seed);
  std::size_t mismatches = actions.size() > classical.actions_taken.size()
                               ? actions.size() - classical.actions_taken.size()
                               : classical.actions_taken.size() - actions.size();
  for (std::size_t i = 0; i < std::min(actions.size(), classical.actions_taken.size()); ++i)
    mismatches += actions[i] != classical.actions_taken[i];
  double gap = 0.0;
  for (StateId s = 0; s < env.num_states(); ++s)
    for (ActionId a = 0; a < env.num_actions(); ++a)
      gap = std::max(gap, std::abs(agent.table().pos(s, a) + agent.table().neg(s, a) - classical.at(s, a)));
  return {mismatches, gap};
}

GridPacmanSpec pacman_layout() {
  GridPacmanSpec spec;
  spec.width = 4;
  spec.height = 4;
  spec.start = {0, 0};
  spec.pellets = {{3, 0}, {0, 3}, {3, 3}};
  spec.ghosts = {{2, 2}, {1, 1}};
  spec.pellet_reward = 1.0;
  spec.ghost_penalty = 5.0;
  spec.horizon = 60;
  return spec;
}

LearningConfig risky_learning(std::uint64_t seed) {
  LearningConfig cfg;
  cfg.alpha = 0.1;
  cfg.gamma = 0.95;
  cfg.epsilon = 0.3;
  cfg.epsilon_end = 0.0;
  cfg.epsilon_decay_episodes = 1500;
  cfg.episodes = 2000;
  cfg.max_steps_per_episode = 100;
  cfg.seed = seed;
  cfg.record_trajectories = false;
  return cfg;
}

PhiVector random_phi(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

int main() {
  criterion(1, "standard profile reduces to classical Q-learning", 5.0, [] {
    LearningConfig cfg;
    cfg.alpha = 0.5;
    cfg.gamma = 0.9;
    cfg.epsilon = 0.5;
    cfg.epsilon_end = 0.0;
    cfg.epsilon_decay_episodes = 200;
    cfg.episodes = 300;
    cfg.seed = 5;
    const auto [chain_mis, chain_gap] = classical_gap(ModelEnv(make_chain(5)), cfg);
    cfg.alpha = 0.2;
    cfg.epsilon = 0.3;
    cfg.epsilon_end = 0.05;
    cfg.epsilon_decay_episodes = 1000;
    cfg.episodes = 1500;
    cfg.max_steps_per_episode = 60;
    cfg.seed = 13;
    const auto [grid_mis, grid_gap] = classical_gap(ModelEnv(make_grid_pacman(pacman_layout())), cfg);
    char buf[160];
    std::snprintf(buf, sizeof buf, "chain: %zu action mismatches, max |dQ| %.3g; grid-pacman: %zu, %.3g", chain_mis,
                  chain_gap, grid_mis, grid_gap);
    return Verdict{chain_mis == 0 && grid_mis == 0 && chain_gap <= 1e-12 && grid_gap <= 1e-12, buf};
  });

  criterion(2, "sign invariants q_pos >= 0, q_neg <= 0", 5.0, [] {
    Rng rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    for (int seq = 0; seq < 1000; ++seq) {
      const std::size_t ns = 2 + uniform_index(rng, 6), na = 1 + uniform_index(rng, 4);
      const double alpha = 0.01 + 0.99 * u(rng);
      const double phi1 = alpha + (1.0 - alpha) * u(rng), phi3 = alpha + (1.0 - alpha) * u(rng);
      const BiasProfile p = make_profile("random", {phi1, 0.1 + 10 * u(rng), phi3, 0.1 + 10 * u(rng)});
      const double gamma = 0.99 * u(rng);
      SplitQTable table(ns, na);
      for (int k = 0; k < 100; ++k) {
        const StateId s = uniform_index(rng, ns), s2 = uniform_index(rng, ns);
        const ActionId a = uniform_index(rng, na);
        const double r = std::normal_distribution<double>(0.0, 5.0)(rng);
        update_streams(table, p, alpha, gamma, s, a, r, s2, u(rng) < 0.1);
      }
      for (StateId s = 0; s < ns; ++s)
        for (ActionId a = 0; a < na; ++a) violations += (table.pos(s, a) < 0.0) + (table.neg(s, a) > 0.0);
    }
    return Verdict{violations == 0, std::to_string(violations) + " violations over 1000 sequences x 100 updates"};
  });

  criterion(3, "standard profile on chain-5 converges to the value-iteration policy", 10.0, [] {
    const auto model = make_chain(5);
    const auto vi = value_iteration(model, 0.9);
    LearningConfig cfg;
    cfg.alpha = 0.5;
    cfg.gamma = 0.9;
    cfg.epsilon = 0.5;
    cfg.epsilon_end = 0.0;
    cfg.epsilon_decay_episodes = 400;
    cfg.episodes = 500;
    cfg.record_trajectories = false;
    int matched = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      cfg.seed = seed;
      const auto trained = train_fresh(ModelEnv(model), standard_profile(), cfg);
      bool same = true;
      for (StateId s = 0; s < model.num_states; ++s)
        if (!model.terminal[s]) same = same && trained.agent.greedy(s) == vi.policy[s];
      matched += same;
    }
    return Verdict{matched == 20, std::to_string(matched) + "/20 seeds match"};
  });

  criterion(4, "PD chooses the safe branch more often than standard on the risky path", 60.0, [] {
    const ModelEnv env(make_risky_path(6, 1, 0.5, 2.0, 10.0));
    auto safe_rate = [&](const BiasProfile& preset) {
      int safe = 0;
      for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng prng(derive_seed(seed, Stream::kProfile));
        const auto trained = train_fresh(env, sample_profile(preset, prng), risky_learning(seed));
        safe += trained.agent.greedy(0) == kSafe;
      }
      return safe / 30.0;
    };
    const double pd = safe_rate(*find_preset("PD"));
    const double standard = safe_rate(standard_profile());
    char buf[128];
    std::snprintf(buf, sizeof buf, "safe-branch rate PD %.1f%% vs standard %.1f%%, margin %.1f pp", 100 * pd,
                  100 * standard, 100 * (pd - standard));
    return Verdict{pd - standard >= 0.10, buf};
  });

  criterion(5, "3x3 sweep completes; positive-only logs total_neg = 0", 120.0, [] {
    const auto cfg = harness::parse_config(harness::json::parse(R"({
      "schema_version": 1,
      "environment": {"family": "risky_path", "safe_len": 6, "risky_len": 1, "penalty_prob": 0.5, "penalty": 2, "goal_reward": 10},
      "profiles": ["standard", "PD", "bvFTD"],
      "learning": {"alpha": 0.1, "gamma": 0.95, "epsilon": 0.3, "epsilon_end": 0.0, "epsilon_decay_episodes": 400,
                   "episodes": 500, "max_steps_per_episode": 100, "seed": 0},
      "variants": [{"name": "normal"}, {"name": "positive-only", "neg_scale": 0}, {"name": "negative-only", "pos_scale": 0}],
      "repetitions": 5
    })"));
    const auto report = harness::cmd_sweep(cfg, scratch("sweep"));
    bool complete = report.matrix.size() == 3;
    for (const auto& row : report.matrix) complete = complete && row.size() == 3;
    std::size_t nonzero = 0, episodes = 0;
    for (const auto& run : report.runs.at("positive-only"))
      for (const auto& e : run.episodes) {
        nonzero += e.total_neg != 0.0;
        ++episodes;
      }
    return Verdict{complete && nonzero == 0 && episodes == 3 * 5 * 500,
                   std::string(complete ? "3x3 matrix" : "incomplete matrix") + ", " + std::to_string(nonzero) +
                       " positive-only episodes with total_neg != 0 out of " + std::to_string(episodes)};
  });

  criterion(6, "GP posterior matches the dense oracle", 5.0, [] {
    Rng rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int set = 0; set < 50; ++set) {
      GPState gp;
      gp.kernel_lengthscale = 0.2 + 1.3 * u(rng);
      gp.kernel_variance = 0.5 + 2.5 * u(rng);
      gp.noise_variance = 1e-3 + 0.5 * u(rng);
      oracle::DenseGP dense{{}, {}, gp.kernel_lengthscale, gp.kernel_variance, gp.noise_variance};
      const std::size_t n = 1 + uniform_index(rng, 50);
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = random_phi(rng);
        const double y = std::normal_distribution<double>(0.0, 2.0)(rng);
        gp.add(x, y);
        dense.xs.push_back(x);
        dense.ys.push_back(y);
      }
      const GPPosterior post(gp);
      for (int q = 0; q < 20; ++q) {
        const auto x = q < 5 ? dense.xs[uniform_index(rng, n)] : random_phi(rng);
        const auto p = post(x);
        const auto [m, s] = dense.posterior(x);
        worst = std::max({worst, std::abs(p.mean - m), std::abs(p.stddev - s)});
      }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max deviation %.3g over 50 sets", worst);
    return Verdict{worst <= 1e-8, buf};
  });

  criterion(7, "GP-UCB finds the unique grid maximum within 25 rounds", 10.0, [] {
    CandidateGrid grid;
    for (auto& axis : grid.axes) axis = {0.0, 0.25, 0.5, 0.75, 1.0};
    const auto points = grid.points();
    GPState gp;
    gp.kernel_lengthscale = 0.8;
    int found = 0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      Rng rng(derive_seed(trial, Stream::kAgent));
      const auto peak = points[uniform_index(rng, points.size())];
      auto objective = [&](const PhiVector& x) {
        double d = 0.0;
        for (int k = 0; k < 4; ++k) d += (x[k] - peak[k]) * (x[k] - peak[k]);
        return 1.0 - d;
      };
      const auto result = adapt_loop(objective, grid, 25, gp);
      bool hit = false;
      for (const auto& r : result.history) hit = hit || r.phi == peak;
      found += hit;
    }
    return Verdict{found >= 48, std::to_string(found) + "/50 trials (need >= 95%)"};
  });

  criterion(8, "profile self-recovery among standard / PD / bvFTD", 120.0, [] {
    RiskyPathSpec spec;
    spec.segments = {ForkSegment{3, 1, 0.8, 2.5}, ForkSegment{8, 1, 0.5, 2.0}};
    spec.goal_reward = 10.0;
    const ModelEnv env(make_risky_path(spec));
    const std::vector<BiasProfile> candidates{standard_profile(), *find_preset("PD"), *find_preset("bvFTD")};
    int recovered = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const auto& truth = candidates[trial % 3];
      const auto expert = generate_expert(env, truth, risky_learning(1000 + trial), 20);
      const auto fit = fit_profile(expert, env, candidates, risky_learning(5000 + 10 * trial), 0.95, 3);
      recovered += fit.best_profile().label == truth.label;
    }
    return Verdict{recovered >= 16, std::to_string(recovered) + "/20 trials recovered (need >= 80%)"};
  });

  criterion(9, "train reruns give byte-identical metric CSVs", 30.0, [] {
    const auto cfg = harness::parse_config(harness::json::parse(R"({
      "schema_version": 1,
      "environment": {"family": "grid_pacman", "width": 4, "height": 4, "start": [0, 0],
                      "pellets": [[3, 0], [0, 3], [3, 3]], "ghosts": [[2, 2]], "horizon": 60},
      "profiles": ["standard", "PD", "ADHD"],
      "learning": {"alpha": 0.1, "gamma": 0.9, "epsilon": 0.2, "episodes": 300, "seed": 42},
      "reward_transform": {"pos_drop_prob": 0.2},
      "repetitions": 3,
      "workers": 2
    })"));
    const auto a = scratch("repro_a"), b = scratch("repro_b");
    harness::cmd_train(cfg, a);
    harness::cmd_train(cfg, b);
    std::size_t files = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      differing += slurp(entry.path()) != slurp(b / fs::relative(entry.path(), a));
    }
    return Verdict{files > 0 && differing == 0,
                   std::to_string(differing) + " of " + std::to_string(files) + " CSV files differ"};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
