#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "splitq/adaptive.hpp"
#include "splitq/harness/config.hpp"
#include "splitq/harness/runner.hpp"
#include "splitq/harness/svg.hpp"
#include "splitq/recovery.hpp"

namespace splitq::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// list-profiles
// ---------------------------------------------------------------------------

inline std::string list_profiles_table() {
  auto cell = [](double mean, double half) {
    std::string s = csv::format(mean);
    if (half != 0.0) s += " ± " + csv::format(half);
    return s;
  };
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-12s %-12s %-12s %-12s\n", "label", "phi1", "phi2", "phi3", "phi4");
  os << line;
  for (const auto& p : presets()) {
    const auto m = p.weights.as_array();
    const auto h = p.half_widths.as_array();
    // "±" is two bytes in UTF-8; pad by hand so columns line up on screen.
    os << p.label << std::string(p.label.size() < 11 ? 11 - p.label.size() : 1, ' ');
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string c = cell(m[i], h[i]);
      const std::size_t width = c.size() - (h[i] != 0.0 ? 1 : 0);
      os << c;
      if (i < 3) os << std::string(width < 13 ? 13 - width : 1, ' ');
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainReport {
  std::vector<RunResult> runs;
  CurveSet curves;
  /// Per label: mean and stderr across repetitions of the final-20% mean return.
  std::vector<std::pair<std::string, MeanStderr>> final_returns;
};

inline std::vector<std::string> labels_of(const std::vector<BiasProfile>& profiles) {
  std::vector<std::string> out;
  for (const auto& p : profiles) out.push_back(p.label);
  return out;
}

inline std::vector<std::pair<std::string, MeanStderr>> final_returns(const std::vector<RunResult>& runs,
                                                                     const std::vector<std::string>& labels) {
  std::vector<std::pair<std::string, MeanStderr>> out;
  for (const auto& l : labels) {
    std::vector<double> xs;
    for (const auto& r : runs)
      if (r.spec.profile.label == l && !r.episodes.empty()) xs.push_back(final_mean_return(r.episodes));
    out.emplace_back(l, mean_stderr(xs));
  }
  return out;
}

/// repetitions x profiles runs; per-run metric CSV + record, aggregate CSV,
/// learning-curve SVG and final-return summary under `out`.
inline TrainReport cmd_train(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<RunSpec> specs;
  for (const auto& p : cfg.profiles)
    for (std::size_t k = 0; k < cfg.repetitions; ++k) specs.push_back(make_run_spec(cfg, p, cfg.transform, "", k));

  TrainReport report;
  report.runs = execute_all(specs, cfg.workers);
  const auto labels = labels_of(cfg.profiles);
  report.curves = aggregate(report.runs, labels);
  report.final_returns = final_returns(report.runs, labels);

  ensure_dir(out / "runs");
  for (const auto& r : report.runs) write_run(out / "runs", r);
  write_file(out / "aggregate.csv", aggregate_csv(report.curves));
  write_file(out / "learning_curves.svg", learning_curves_svg(report.curves, "mean return per episode"));
  std::ostringstream summary;
  summary << "profile,final_mean_return,stderr,repetitions\n";
  for (const auto& [label, ms] : report.final_returns)
    summary << label << ',' << csv::format(ms.mean) << ',' << csv::format(ms.stderr_) << ',' << cfg.repetitions
            << '\n';
  write_file(out / "summary.csv", summary.str());
  return report;
}

/// Re-executes a run from the config snapshot stored in its record JSON.
inline RunResult replay_run(const fs::path& record_json) {
  std::ifstream in(record_json);
  if (!in) throw IoError("cannot open '" + record_json.string() + "'");
  json record;
  try {
    record = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid run record: ") + e.what());
  }
  return execute(run_spec_from_json(record.at("config")));
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct TransitionCheck {
  std::string variant;
  std::string profile;
  std::size_t switch_episode = 0;
  double before = 0.0;
  double after = 0.0;
  double threshold = 0.0;
  bool flagged = false;
};

struct SweepReport {
  std::vector<std::string> variants;
  std::vector<std::string> profiles;
  std::vector<std::vector<double>> matrix;  // [profile][variant] mean final return
  std::map<std::string, std::vector<RunResult>> runs;  // by variant
  std::vector<TransitionCheck> transitions;
};

inline constexpr std::size_t kTransitionWindow = 20;

/// Compares the 20-episode windows either side of a reward switch in one
/// label's per-episode mean return. Flags a change larger than twice the
/// standard error of the difference of window means.
inline TransitionCheck detect_transition(const std::vector<MeanStderr>& curve, std::size_t switch_episode) {
  TransitionCheck t;
  t.switch_episode = switch_episode;
  if (switch_episode < kTransitionWindow || switch_episode + kTransitionWindow > curve.size()) return t;
  std::vector<double> before, after;
  for (std::size_t e = switch_episode - kTransitionWindow; e < switch_episode; ++e) before.push_back(curve[e].mean);
  for (std::size_t e = switch_episode; e < switch_episode + kTransitionWindow; ++e) after.push_back(curve[e].mean);
  const auto b = mean_stderr(before);
  const auto a = mean_stderr(after);
  t.before = b.mean;
  t.after = a.mean;
  t.threshold = 2.0 * std::sqrt(b.stderr_ * b.stderr_ + a.stderr_ * a.stderr_);
  t.flagged = std::abs(a.mean - b.mean) > t.threshold;
  return t;
}

inline SweepReport cmd_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.variants.empty()) throw ConfigError("variants", "sweep needs at least one transform variant");
  std::vector<RunSpec> specs;
  for (const auto& v : cfg.variants)
    for (const auto& p : cfg.profiles)
      for (std::size_t k = 0; k < cfg.repetitions; ++k) specs.push_back(make_run_spec(cfg, p, v.transform, v.name, k));
  auto results = execute_all(specs, cfg.workers);

  SweepReport report;
  report.profiles = labels_of(cfg.profiles);
  for (const auto& v : cfg.variants) report.variants.push_back(v.name);
  for (auto& r : results) report.runs[r.spec.variant].push_back(std::move(r));

  report.matrix.assign(report.profiles.size(), std::vector<double>(report.variants.size(), 0.0));
  std::ostringstream transitions;
  transitions << "variant,profile,switch_episode,ma_before,ma_after,delta,threshold,flagged\n";
  for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
    const auto& variant = cfg.variants[vi];
    const auto& runs = report.runs[variant.name];
    const auto dir = out / "runs" / file_stem(variant.name);
    ensure_dir(dir);
    for (const auto& r : runs) write_run(dir, r);
    const auto curves = aggregate(runs, report.profiles);
    write_file(out / ("aggregate_" + file_stem(variant.name) + ".csv"), aggregate_csv(curves));
    write_file(out / ("learning_curves_" + file_stem(variant.name) + ".svg"),
               learning_curves_svg(curves, "variant " + variant.name));
    const auto finals = final_returns(runs, report.profiles);
    for (std::size_t pi = 0; pi < report.profiles.size(); ++pi) report.matrix[pi][vi] = finals[pi].second.mean;

    if (variant.transform.switch_episode) {
      for (std::size_t pi = 0; pi < report.profiles.size(); ++pi) {
        TransitionCheck t = detect_transition(curves.curves[pi], *variant.transform.switch_episode);
        t.variant = variant.name;
        t.profile = report.profiles[pi];
        transitions << t.variant << ',' << t.profile << ',' << t.switch_episode << ',' << csv::format(t.before) << ','
                    << csv::format(t.after) << ',' << csv::format(t.after - t.before) << ','
                    << csv::format(t.threshold) << ',' << (t.flagged ? "true" : "false") << '\n';
        report.transitions.push_back(std::move(t));
      }
    }
  }

  std::ostringstream matrix;
  matrix << "profile";
  for (const auto& v : report.variants) matrix << ',' << v;
  matrix << '\n';
  for (std::size_t pi = 0; pi < report.profiles.size(); ++pi) {
    matrix << report.profiles[pi];
    for (double x : report.matrix[pi]) matrix << ',' << csv::format(x);
    matrix << '\n';
  }
  write_file(out / "matrix.csv", matrix.str());

  std::ostringstream ranking;
  ranking << "variant,rank,profile,final_mean_return\n";
  for (std::size_t vi = 0; vi < report.variants.size(); ++vi) {
    std::vector<std::size_t> order(report.profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return report.matrix[a][vi] > report.matrix[b][vi]; });
    for (std::size_t r = 0; r < order.size(); ++r)
      ranking << report.variants[vi] << ',' << r + 1 << ',' << report.profiles[order[r]] << ','
              << csv::format(report.matrix[order[r]][vi]) << '\n';
  }
  write_file(out / "ranking.csv", ranking.str());
  if (!report.transitions.empty()) write_file(out / "transitions.csv", transitions.str());
  return report;
}

// ---------------------------------------------------------------------------
// adapt
// ---------------------------------------------------------------------------

inline AdaptResult cmd_adapt(const ExperimentConfig& cfg, const fs::path& out) {
  RunSpec base;
  base.environment = cfg.environment;
  base.transform = cfg.transform;
  const auto env = build_env(base);
  const auto& a = cfg.adapt;
  AdaptResult result = adapt_loop(*env, cfg.learning, a.grid, a.rounds, a.episodes_per_round, a.gp, a.beta);

  ensure_dir(out);
  std::ostringstream os;
  os << "round,phi1,phi2,phi3,phi4,mean_return,incumbent_best\n";
  for (std::size_t r = 0; r < result.history.size(); ++r) {
    const auto& h = result.history[r];
    os << r + 1;
    for (double x : h.phi) os << ',' << csv::format(x);
    os << ',' << csv::format(h.value) << ',' << csv::format(h.incumbent_value) << '\n';
  }
  write_file(out / "adapt_history.csv", os.str());
  const auto& best = result.incumbent();
  json report{{"rounds", result.history.size()},
              {"episodes_per_round", a.episodes_per_round},
              {"incumbent_phi", best.incumbent_phi},
              {"incumbent_mean_return", best.incumbent_value},
              {"seed", cfg.learning.seed}};
  write_file(out / "adapt_report.json", report.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// generate-expert / recover
// ---------------------------------------------------------------------------

inline BiasProfile resolve_profile(const ExperimentConfig& cfg, const std::string& label) {
  for (const auto& p : cfg.profiles)
    if (p.label == label) return p;
  if (auto p = find_preset(label)) return *p;
  throw ConfigError("recover.expert_profile", "unknown profile label '" + label + "'");
}

/// Trains an agent with recover.expert_profile and writes its greedy rollouts
/// to expert_trajectories.csv.
inline std::vector<Trajectory> cmd_generate_expert(const ExperimentConfig& cfg, const fs::path& out) {
  BiasProfile profile = resolve_profile(cfg, cfg.recover.expert_profile);
  if (!cfg.deterministic_profiles && profile.has_ranges()) {
    Rng rng(derive_seed(cfg.learning.seed, Stream::kProfile));
    profile = sample_profile(profile, rng);
  }
  RunSpec base;
  base.environment = cfg.environment;
  base.transform = cfg.transform;
  const auto env = build_env(base);
  auto trajs = generate_expert(*env, profile, cfg.learning, cfg.recover.n_trajectories);
  ensure_dir(out);
  std::ostringstream os;
  write_trajectories(os, trajs);
  write_file(out / "expert_trajectories.csv", os.str());
  return trajs;
}

inline std::vector<Trajectory> load_trajectories(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path.string() + "'");
  return read_trajectories(in);
}

/// Candidates ranked by feature-expectation distance to the expert file.
inline FitResult cmd_recover(const fs::path& trajectory_file, const ExperimentConfig& cfg, const fs::path& out) {
  const auto expert = load_trajectories(trajectory_file);
  RunSpec base;
  base.environment = cfg.environment;
  base.transform = cfg.transform;
  const auto env = build_env(base);
  for (const auto& traj : expert)
    for (const auto& step : traj)
      if (step.state >= env->num_states() || step.action >= env->num_actions())
        throw ConfigError("environment", "trajectory file references states/actions outside the configured environment");
  const auto& r = cfg.recover;
  const FitResult fit = fit_profile(expert, *env, r.candidates, cfg.learning, r.gamma.value_or(cfg.learning.gamma),
                                    r.seeds_per_candidate);

  std::vector<std::size_t> order(fit.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fit.candidates[a].distance < fit.candidates[b].distance;
  });
  ensure_dir(out);
  std::ostringstream os;
  os << "rank,label,phi1,phi2,phi3,phi4,distance\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& c = fit.candidates[order[i]];
    os << i + 1 << ',' << c.profile.label;
    for (double x : c.profile.weights.as_array()) os << ',' << csv::format(x);
    os << ',' << csv::format(c.distance) << '\n';
  }
  write_file(out / "recovery_report.csv", os.str());
  return fit;
}

}  // namespace splitq::harness
