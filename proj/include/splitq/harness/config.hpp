#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "splitq/agent.hpp"
#include "splitq/bias_profile.hpp"
#include "splitq/environments.hpp"
#include "splitq/errors.hpp"
#include "splitq/gp_ucb.hpp"
#include "splitq/reward_transform.hpp"

namespace splitq::harness {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct TransformVariant {
  std::string name;
  RewardTransform transform;
};

struct AdaptSettings {
  CandidateGrid grid;
  std::size_t rounds = 20;
  std::size_t episodes_per_round = 300;
  GPState gp;
  BetaSchedule beta;
};

struct RecoverSettings {
  std::vector<BiasProfile> candidates;
  std::size_t seeds_per_candidate = 3;
  std::optional<double> gamma;
  std::size_t n_trajectories = 20;
  std::string expert_profile = "standard";
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  json environment;
  std::vector<BiasProfile> profiles;
  LearningConfig learning;
  RewardTransform transform;
  std::vector<TransformVariant> variants;
  std::size_t repetitions = 1;
  std::string output_dir = "out";
  bool deterministic_profiles = false;
  std::size_t workers = 1;
  AdaptSettings adapt;
  RecoverSettings recover;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
}

template <typename T>
T get(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where.empty() ? std::string(key) : where + "." + key, "has the wrong type");
  }
}

inline const json& object_at(const json& root, const char* key) {
  const json& v = root.at(key);
  if (!v.is_object()) throw ConfigError(key, "must be an object");
  return v;
}

inline Cell parse_cell(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where, "cell must be [x, y]");
  try {
    return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
  } catch (const json::exception&) {
    throw ConfigError(where, "cell coordinates must be non-negative integers");
  }
}

inline std::array<double, 4> parse_phi(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw ConfigError(where, "must be an array of 4 numbers");
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw ConfigError(where, "must be an array of 4 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

inline StreamScaling parse_scaling(const json& v, const std::string& where) {
  StreamScaling s;
  s.pos_scale = get(v, where, "pos_scale", 1.0);
  s.neg_scale = get(v, where, "neg_scale", 1.0);
  s.pos_drop_prob = get(v, where, "pos_drop_prob", 0.0);
  s.neg_drop_prob = get(v, where, "neg_drop_prob", 0.0);
  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  return s;
}

}  // namespace detail

inline RewardTransform parse_transform(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  detail::reject_unknown(v, where,
                         {"name", "pos_scale", "neg_scale", "pos_drop_prob", "neg_drop_prob", "switch_episode", "after"});
  RewardTransform t;
  t.initial = detail::parse_scaling(v, where);
  if (v.contains("switch_episode")) {
    t.switch_episode = detail::get<std::size_t>(v, where, "switch_episode", 0);
    if (!v.contains("after") || !v.at("after").is_object())
      throw ConfigError(where + ".after", "required object when switch_episode is set");
    detail::reject_unknown(v.at("after"), where + ".after", {"pos_scale", "neg_scale", "pos_drop_prob", "neg_drop_prob"});
    t.after_switch = detail::parse_scaling(v.at("after"), where + ".after");
  } else if (v.contains("after")) {
    throw ConfigError(where + ".after", "requires switch_episode");
  }
  return t;
}

inline json transform_to_json(const RewardTransform& t) {
  auto scaling = [](const StreamScaling& s) {
    return json{{"pos_scale", s.pos_scale},
                {"neg_scale", s.neg_scale},
                {"pos_drop_prob", s.pos_drop_prob},
                {"neg_drop_prob", s.neg_drop_prob}};
  };
  json out = scaling(t.initial);
  if (t.switch_episode) {
    out["switch_episode"] = *t.switch_episode;
    out["after"] = scaling(t.after_switch);
  }
  return out;
}

/// Builds the environment model described by an `environment` config object.
inline TabularModel build_model(const json& env) {
  const std::string where = "environment";
  if (!env.is_object()) throw ConfigError(where, "must be an object");
  const std::string family = detail::get<std::string>(env, where, "family", "");
  try {
    if (family == "chain") {
      detail::reject_unknown(env, where, {"family", "n"});
      return make_chain(detail::get<std::size_t>(env, where, "n", 5));
    }
    if (family == "grid_pacman") {
      detail::reject_unknown(env, where, {"family", "width", "height", "start", "pellets", "ghosts", "pellet_reward",
                                          "ghost_penalty", "horizon"});
      GridPacmanSpec spec;
      spec.width = detail::get<std::size_t>(env, where, "width", spec.width);
      spec.height = detail::get<std::size_t>(env, where, "height", spec.height);
      if (env.contains("start")) spec.start = detail::parse_cell(env["start"], where + ".start");
      if (env.contains("pellets"))
        for (const auto& c : env["pellets"]) spec.pellets.push_back(detail::parse_cell(c, where + ".pellets"));
      if (env.contains("ghosts"))
        for (const auto& c : env["ghosts"]) spec.ghosts.push_back(detail::parse_cell(c, where + ".ghosts"));
      spec.pellet_reward = detail::get(env, where, "pellet_reward", spec.pellet_reward);
      spec.ghost_penalty = detail::get(env, where, "ghost_penalty", spec.ghost_penalty);
      spec.horizon = detail::get<std::size_t>(env, where, "horizon", spec.horizon);
      return make_grid_pacman(spec);
    }
    if (family == "risky_path") {
      detail::reject_unknown(env, where,
                             {"family", "safe_len", "risky_len", "penalty_prob", "penalty", "goal_reward", "segments"});
      RiskyPathSpec spec;
      spec.goal_reward = detail::get(env, where, "goal_reward", spec.goal_reward);
      auto segment = [&](const json& v, const std::string& at) {
        ForkSegment seg;
        seg.safe_len = detail::get<std::size_t>(v, at, "safe_len", seg.safe_len);
        seg.risky_len = detail::get<std::size_t>(v, at, "risky_len", seg.risky_len);
        seg.penalty_prob = detail::get(v, at, "penalty_prob", seg.penalty_prob);
        seg.penalty = detail::get(v, at, "penalty", seg.penalty);
        return seg;
      };
      if (env.contains("segments")) {
        spec.segments.clear();
        for (const auto& s : env["segments"]) {
          detail::reject_unknown(s, where + ".segments", {"safe_len", "risky_len", "penalty_prob", "penalty"});
          spec.segments.push_back(segment(s, where + ".segments"));
        }
      } else {
        spec.segments = {segment(env, where)};
      }
      return make_risky_path(spec);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  throw ConfigError(where + ".family", "unknown environment family '" + family + "'");
}

inline BiasProfile parse_profile(const json& v, const std::string& where) {
  if (v.is_string()) {
    auto preset = find_preset(v.get<std::string>());
    if (!preset) throw ConfigError(where, "unknown profile label '" + v.get<std::string>() + "'");
    return *preset;
  }
  if (!v.is_object()) throw ConfigError(where, "must be a preset label or {label, phi[, ranges]}");
  detail::reject_unknown(v, where, {"label", "phi", "ranges"});
  const std::string label = detail::get<std::string>(v, where, "label", "");
  if (label.empty()) throw ConfigError(where + ".label", "required");
  if (!v.contains("phi")) throw ConfigError(where + ".phi", "required");
  BiasProfile p{label, Weights::from_array(detail::parse_phi(v["phi"], where + ".phi")), {0, 0, 0, 0}};
  if (v.contains("ranges")) p.half_widths = Weights::from_array(detail::parse_phi(v["ranges"], where + ".ranges"));
  try {
    validate(p);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  return p;
}

inline json profile_to_json(const BiasProfile& p) {
  return json{{"label", p.label},
              {"phi", p.weights.as_array()},
              {"ranges", p.half_widths.as_array()}};
}

inline LearningConfig parse_learning(const json& v) {
  const std::string where = "learning";
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  detail::reject_unknown(v, where, {"alpha", "gamma", "epsilon", "epsilon_end", "epsilon_decay_episodes", "alpha_end",
                                    "alpha_decay_episodes", "episodes", "max_steps_per_episode", "seed"});
  LearningConfig c;
  c.alpha = detail::get(v, where, "alpha", c.alpha);
  c.gamma = detail::get(v, where, "gamma", c.gamma);
  c.epsilon = detail::get(v, where, "epsilon", c.epsilon);
  c.epsilon_end = detail::get(v, where, "epsilon_end", c.epsilon);
  c.epsilon_decay_episodes = detail::get<std::size_t>(v, where, "epsilon_decay_episodes", 0);
  c.alpha_end = detail::get(v, where, "alpha_end", c.alpha);
  c.alpha_decay_episodes = detail::get<std::size_t>(v, where, "alpha_decay_episodes", 0);
  c.episodes = detail::get<std::size_t>(v, where, "episodes", c.episodes);
  c.max_steps_per_episode = detail::get<std::size_t>(v, where, "max_steps_per_episode", c.max_steps_per_episode);
  c.seed = detail::get<std::uint64_t>(v, where, "seed", c.seed);
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  return c;
}

inline json learning_to_json(const LearningConfig& c) {
  return json{{"alpha", c.alpha},
              {"gamma", c.gamma},
              {"epsilon", c.epsilon},
              {"epsilon_end", c.epsilon_end},
              {"epsilon_decay_episodes", c.epsilon_decay_episodes},
              {"alpha_end", c.alpha_end},
              {"alpha_decay_episodes", c.alpha_decay_episodes},
              {"episodes", c.episodes},
              {"max_steps_per_episode", c.max_steps_per_episode},
              {"seed", c.seed}};
}

inline AdaptSettings parse_adapt(const json& v) {
  const std::string where = "adapt";
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  detail::reject_unknown(v, where, {"grid", "rounds", "episodes_per_round", "beta", "beta_schedule", "delta",
                                    "kernel_lengthscale", "kernel_variance", "noise_variance", "jitter"});
  AdaptSettings a;
  a.grid.axes = {std::vector<double>{0.1, 0.3, 0.5, 0.75, 1.0}, {0.5, 1.0, 5.0, 20.0, 100.0},
                 {0.1, 0.3, 0.5, 0.75, 1.0}, {0.5, 1.0, 5.0, 20.0, 100.0}};
  if (v.contains("grid")) {
    const json& g = v["grid"];
    detail::reject_unknown(g, where + ".grid", {"phi1", "phi2", "phi3", "phi4"});
    const char* names[] = {"phi1", "phi2", "phi3", "phi4"};
    for (std::size_t i = 0; i < 4; ++i)
      if (g.contains(names[i])) a.grid.axes[i] = detail::get<std::vector<double>>(g, where + ".grid", names[i], {});
  }
  try {
    validate(a.grid);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ".grid", e.what());
  }
  a.rounds = detail::get<std::size_t>(v, where, "rounds", a.rounds);
  if (a.rounds == 0) throw ConfigError(where + ".rounds", "must be >= 1");
  a.episodes_per_round = detail::get<std::size_t>(v, where, "episodes_per_round", a.episodes_per_round);
  if (a.episodes_per_round == 0) throw ConfigError(where + ".episodes_per_round", "must be >= 1");
  a.beta.beta = detail::get(v, where, "beta", 4.0);
  a.beta.delta = detail::get(v, where, "delta", 0.1);
  const std::string schedule = detail::get<std::string>(v, where, "beta_schedule", "constant");
  if (schedule == "constant")
    a.beta.kind = BetaSchedule::Kind::kConstant;
  else if (schedule == "log")
    a.beta.kind = BetaSchedule::Kind::kLogarithmic;
  else
    throw ConfigError(where + ".beta_schedule", "must be 'constant' or 'log'");
  a.gp.kernel_lengthscale = detail::get(v, where, "kernel_lengthscale", 1.0);
  a.gp.kernel_variance = detail::get(v, where, "kernel_variance", 1.0);
  a.gp.noise_variance = detail::get(v, where, "noise_variance", 1e-6);
  a.gp.jitter = detail::get(v, where, "jitter", 1e-8);
  try {
    validate(a.gp);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  if (!(a.beta.beta >= 0.0)) throw ConfigError(where + ".beta", "must be >= 0");
  return a;
}

inline RecoverSettings parse_recover(const json& v, const std::vector<BiasProfile>& fallback) {
  const std::string where = "recover";
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  detail::reject_unknown(v, where, {"candidates", "seeds_per_candidate", "gamma", "n_trajectories", "expert_profile"});
  RecoverSettings r;
  if (v.contains("candidates")) {
    for (const auto& c : v["candidates"]) r.candidates.push_back(parse_profile(c, where + ".candidates"));
  } else {
    r.candidates = fallback.empty() ? presets() : fallback;
  }
  if (r.candidates.empty()) throw ConfigError(where + ".candidates", "needs at least one candidate");
  r.seeds_per_candidate = detail::get<std::size_t>(v, where, "seeds_per_candidate", r.seeds_per_candidate);
  if (r.seeds_per_candidate == 0) throw ConfigError(where + ".seeds_per_candidate", "must be >= 1");
  if (v.contains("gamma")) {
    r.gamma = detail::get(v, where, "gamma", 0.0);
    if (!(*r.gamma >= 0.0 && *r.gamma < 1.0)) throw ConfigError(where + ".gamma", "must lie in [0, 1)");
  }
  r.n_trajectories = detail::get<std::size_t>(v, where, "n_trajectories", r.n_trajectories);
  r.expert_profile = detail::get<std::string>(v, where, "expert_profile", r.expert_profile);
  return r;
}

inline ExperimentConfig parse_config(const json& root) {
  if (!root.is_object()) throw ConfigError("", "config must be a JSON object");
  detail::reject_unknown(root, "", {"schema_version", "environment", "profiles", "learning", "reward_transform",
                                    "variants", "repetitions", "output_dir", "deterministic_profiles", "workers",
                                    "adapt", "recover"});
  ExperimentConfig cfg;
  if (!root.contains("schema_version")) throw ConfigError("schema_version", "required");
  cfg.schema_version = detail::get<int>(root, "", "schema_version", 0);
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

  if (!root.contains("environment")) throw ConfigError("environment", "required");
  cfg.environment = root["environment"];
  (void)build_model(cfg.environment);

  if (root.contains("profiles")) {
    if (!root["profiles"].is_array()) throw ConfigError("profiles", "must be an array");
    std::set<std::string> seen;
    for (const auto& p : root["profiles"]) {
      cfg.profiles.push_back(parse_profile(p, "profiles"));
      if (!seen.insert(cfg.profiles.back().label).second)
        throw ConfigError("profiles", "duplicate label '" + cfg.profiles.back().label + "'");
    }
  } else {
    cfg.profiles = {standard_profile()};
  }
  if (cfg.profiles.empty()) throw ConfigError("profiles", "needs at least one profile");

  if (root.contains("learning")) cfg.learning = parse_learning(root["learning"]);
  if (root.contains("reward_transform")) cfg.transform = parse_transform(root["reward_transform"], "reward_transform");
  if (root.contains("variants")) {
    if (!root["variants"].is_array()) throw ConfigError("variants", "must be an array");
    std::set<std::string> seen;
    for (const auto& v : root["variants"]) {
      TransformVariant tv;
      tv.name = detail::get<std::string>(v, "variants", "name", "");
      if (tv.name.empty()) throw ConfigError("variants.name", "required");
      if (!seen.insert(tv.name).second) throw ConfigError("variants", "duplicate name '" + tv.name + "'");
      tv.transform = parse_transform(v, "variants." + tv.name);
      cfg.variants.push_back(std::move(tv));
    }
  }
  cfg.repetitions = detail::get<std::size_t>(root, "", "repetitions", 1);
  if (cfg.repetitions == 0) throw ConfigError("repetitions", "must be >= 1");
  cfg.output_dir = detail::get<std::string>(root, "", "output_dir", cfg.output_dir);
  cfg.deterministic_profiles = detail::get(root, "", "deterministic_profiles", false);
  cfg.workers = detail::get<std::size_t>(root, "", "workers", 1);
  if (cfg.workers == 0) throw ConfigError("workers", "must be >= 1");
  if (root.contains("adapt")) cfg.adapt = parse_adapt(root["adapt"]);
  else cfg.adapt = parse_adapt(json::object());
  cfg.recover = parse_recover(root.contains("recover") ? root["recover"] : json::object(), {});
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return parse_config(root);
}

}  // namespace splitq::harness
