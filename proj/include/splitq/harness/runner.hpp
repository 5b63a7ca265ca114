#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "splitq/agent.hpp"
#include "splitq/csv.hpp"
#include "splitq/environment.hpp"
#include "splitq/harness/config.hpp"
#include "splitq/reward_transform.hpp"

namespace splitq::harness {

inline constexpr const char* kMetricsHeader = "episode,total_reward,total_pos,total_neg,steps,epsilon";

/// Everything needed to reproduce one training run. The profile holds the
/// weights actually used (already sampled).
struct RunSpec {
  json environment;
  BiasProfile profile;
  LearningConfig learning;
  RewardTransform transform;
  std::string variant;
  std::size_t repetition = 0;
};

inline json run_spec_to_json(const RunSpec& r) {
  return json{{"schema_version", kSchemaVersion},
              {"environment", r.environment},
              {"profile", profile_to_json(r.profile)},
              {"learning", learning_to_json(r.learning)},
              {"reward_transform", transform_to_json(r.transform)},
              {"variant", r.variant},
              {"repetition", r.repetition}};
}

inline RunSpec run_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "run snapshot must be an object");
  RunSpec r;
  r.environment = j.at("environment");
  r.profile = parse_profile(j.at("profile"), "profile");
  r.learning = parse_learning(j.at("learning"));
  r.transform = parse_transform(j.at("reward_transform"), "reward_transform");
  r.variant = j.value("variant", std::string{});
  r.repetition = j.value("repetition", std::size_t{0});
  return r;
}

/// Seed for repetition k: base + k. Profiles with ranges are sampled once
/// from that seed unless `deterministic` is set.
inline RunSpec make_run_spec(const ExperimentConfig& cfg, const BiasProfile& preset, const RewardTransform& transform,
                             const std::string& variant, std::size_t repetition) {
  RunSpec r;
  r.environment = cfg.environment;
  r.learning = cfg.learning;
  r.learning.seed = cfg.learning.seed + repetition;
  r.transform = transform;
  r.variant = variant;
  r.repetition = repetition;
  if (cfg.deterministic_profiles || !preset.has_ranges()) {
    r.profile = preset;
  } else {
    Rng rng(derive_seed(r.learning.seed, Stream::kProfile));
    r.profile = sample_profile(preset, rng);
  }
  return r;
}

inline std::unique_ptr<MarkovEnv> build_env(const RunSpec& spec) {
  std::unique_ptr<MarkovEnv> env = std::make_unique<ModelEnv>(build_model(spec.environment));
  if (!spec.transform.is_identity()) env = wrap_rewards(std::move(env), spec.transform);
  return env;
}

struct RunResult {
  RunSpec spec;
  std::vector<EpisodeRecord> episodes;
  double seconds = 0.0;
};

inline RunResult execute(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const auto env = build_env(spec);
  LearningConfig cfg = spec.learning;
  cfg.record_trajectories = false;
  RunResult out{spec, train_fresh(*env, spec.profile, cfg).records, 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Runs every spec on `workers` threads; results come back in input order.
/// The first failure (by index) is rethrown after all workers finish.
inline std::vector<RunResult> execute_all(const std::vector<RunSpec>& specs, std::size_t workers) {
  std::vector<RunResult> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = execute(specs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, specs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string metrics_csv(const std::vector<EpisodeRecord>& episodes) {
  std::ostringstream os;
  os << kMetricsHeader << '\n';
  for (const auto& e : episodes)
    os << e.episode << ',' << csv::format(e.total_reward) << ',' << csv::format(e.total_pos) << ','
       << csv::format(e.total_neg) << ',' << e.steps << ',' << csv::format(e.epsilon) << '\n';
  return os.str();
}

inline std::string file_stem(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

/// Writes <stem>.csv (metrics) and <stem>.json (run record) into `dir`.
inline void write_run(const std::filesystem::path& dir, const RunResult& run) {
  const std::string stem = file_stem(run.spec.profile.label) + "_rep" + std::to_string(run.spec.repetition);
  write_file(dir / (stem + ".csv"), metrics_csv(run.episodes));
  json record{{"config", run_spec_to_json(run.spec)},
              {"seed", run.spec.learning.seed},
              {"episodes", run.episodes.size()},
              {"metrics_file", stem + ".csv"},
              {"wall_clock_seconds", run.seconds}};
  write_file(dir / (stem + ".json"), record.dump(2) + "\n");
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

/// Per-episode mean and stderr of total_reward across one label's repetitions.
struct CurveSet {
  std::vector<std::string> labels;
  std::vector<std::vector<MeanStderr>> curves;  // [label][episode]
};

inline CurveSet aggregate(const std::vector<RunResult>& runs, const std::vector<std::string>& labels) {
  CurveSet out;
  out.labels = labels;
  for (const auto& label : labels) {
    std::vector<const RunResult*> mine;
    for (const auto& r : runs)
      if (r.spec.profile.label == label) mine.push_back(&r);
    std::size_t episodes = 0;
    for (const auto* r : mine) episodes = std::max(episodes, r->episodes.size());
    std::vector<MeanStderr> curve(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
      std::vector<double> xs;
      for (const auto* r : mine)
        if (e < r->episodes.size()) xs.push_back(r->episodes[e].total_reward);
      curve[e] = mean_stderr(xs);
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

inline std::string aggregate_csv(const CurveSet& set) {
  std::ostringstream os;
  os << "episode";
  for (const auto& l : set.labels) os << ',' << l << "_mean," << l << "_stderr";
  os << '\n';
  std::size_t episodes = 0;
  for (const auto& c : set.curves) episodes = std::max(episodes, c.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    os << e;
    for (const auto& c : set.curves) {
      if (e < c.size())
        os << ',' << csv::format(c[e].mean) << ',' << csv::format(c[e].stderr_);
      else
        os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

/// Trailing moving average with a window of `window` (shorter at the start).
inline std::vector<double> moving_average(const std::vector<double>& xs, std::size_t window) {
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= window) sum -= xs[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace splitq::harness
