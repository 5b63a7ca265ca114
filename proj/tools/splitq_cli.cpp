// Command-line front end for split Q-learning experiments.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "splitq/harness/commands.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kNumericError = 4 };

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool deterministic_profiles = false;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", opts.seed, "Base seed (overrides learning.seed)");
  cmd->add_flag("--deterministic-profiles", opts.deterministic_profiles,
                "Use preset means instead of sampling within the +/- ranges");
  cmd->add_option("--workers", opts.workers, "Worker threads for independent runs");
}

splitq::harness::ExperimentConfig load(const CommonOptions& opts) {
  auto cfg = splitq::harness::load_config(opts.config);
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  if (opts.seed) cfg.learning.seed = *opts.seed;
  if (opts.deterministic_profiles) cfg.deterministic_profiles = true;
  if (opts.workers) cfg.workers = std::max<std::size_t>(1, *opts.workers);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = splitq::harness;
  CLI::App app{"splitq: split Q-learning with reward-processing bias profiles"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list-profiles", "Print the bias-profile presets");
  CommonOptions train_opts, sweep_opts, adapt_opts, recover_opts, expert_opts;
  auto* train_cmd = app.add_subcommand("train", "Train every profile x repetition and write learning curves");
  add_common(train_cmd, train_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "Profiles x reward-transform variants comparison matrix");
  add_common(sweep_cmd, sweep_opts);
  auto* adapt_cmd = app.add_subcommand("adapt", "Tune the four weights with GP-UCB");
  add_common(adapt_cmd, adapt_opts);
  auto* recover_cmd = app.add_subcommand("recover", "Identify the profile behind expert trajectories");
  std::string trajectory_file;
  recover_cmd->add_option("trajectories", trajectory_file, "Expert trajectory CSV")->required();
  add_common(recover_cmd, recover_opts);
  auto* expert_cmd = app.add_subcommand("generate-expert", "Write greedy rollouts of a trained profile as trajectory CSV");
  add_common(expert_cmd, expert_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*list_cmd) {
      std::cout << h::list_profiles_table();
    } else if (*train_cmd) {
      const auto cfg = load(train_opts);
      const auto report = h::cmd_train(cfg, cfg.output_dir);
      std::cout << "profile            final_mean_return  stderr\n";
      for (const auto& [label, ms] : report.final_returns)
        std::printf("%-18s %17.4f  %.4f\n", label.c_str(), ms.mean, ms.stderr_);
      std::cout << "wrote " << report.runs.size() << " runs to " << cfg.output_dir << '\n';
    } else if (*sweep_cmd) {
      const auto cfg = load(sweep_opts);
      const auto report = h::cmd_sweep(cfg, cfg.output_dir);
      std::printf("%-18s", "profile");
      for (const auto& v : report.variants) std::printf(" %16s", v.c_str());
      std::printf("\n");
      for (std::size_t p = 0; p < report.profiles.size(); ++p) {
        std::printf("%-18s", report.profiles[p].c_str());
        for (double x : report.matrix[p]) std::printf(" %16.4f", x);
        std::printf("\n");
      }
      for (const auto& t : report.transitions)
        std::printf("transition %s/%s at episode %zu: %.4f -> %.4f%s\n", t.variant.c_str(), t.profile.c_str(),
                    t.switch_episode, t.before, t.after, t.flagged ? "  [FLAGGED]" : "");
      std::cout << "wrote matrix.csv and ranking.csv to " << cfg.output_dir << '\n';
    } else if (*adapt_cmd) {
      const auto cfg = load(adapt_opts);
      const auto result = h::cmd_adapt(cfg, cfg.output_dir);
      const auto& best = result.incumbent();
      std::printf("incumbent phi = (%g, %g, %g, %g), mean return %.4f after %zu rounds\n", best.incumbent_phi[0],
                  best.incumbent_phi[1], best.incumbent_phi[2], best.incumbent_phi[3], best.incumbent_value,
                  result.history.size());
    } else if (*recover_cmd) {
      const auto cfg = load(recover_opts);
      const auto fit = h::cmd_recover(trajectory_file, cfg, cfg.output_dir);
      for (const auto& c : fit.candidates) std::printf("%-18s distance %.6f\n", c.profile.label.c_str(), c.distance);
      std::cout << "best: " << fit.best_profile().label << '\n';
    } else if (*expert_cmd) {
      const auto cfg = load(expert_opts);
      const auto trajs = h::cmd_generate_expert(cfg, cfg.output_dir);
      std::cout << "wrote " << trajs.size() << " trajectories to "
                << (std::filesystem::path(cfg.output_dir) / "expert_trajectories.csv").string() << '\n';
    }
  } catch (const splitq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const splitq::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const splitq::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const splitq::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const splitq::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  }
  return kOk;
}
