#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitq/errors.hpp"
#include "splitq/rng.hpp"

namespace splitq {

/// The four bias weights of split Q-learning.
///
///  - memory_pos (phi1): retention of the positive table at each update
///  - weight_pos (phi2): weight of the positive table at action selection
///  - memory_neg (phi3): retention of the negative table at each update
///  - weight_neg (phi4): weight of the negative table at action selection
struct Weights {
  double memory_pos = 1.0;
  double weight_pos = 1.0;
  double memory_neg = 1.0;
  double weight_neg = 1.0;

  std::array<double, 4> as_array() const {
    return {memory_pos, weight_pos, memory_neg, weight_neg};
  }
  static Weights from_array(const std::array<double, 4>& v) {
    return {v[0], v[1], v[2], v[3]};
  }
  friend bool operator==(const Weights&, const Weights&) = default;
};

struct BiasProfile {
  std::string label;
  Weights weights;
  /// Per-weight half-width used by sample_profile; all zero means fixed.
  Weights half_widths{0.0, 0.0, 0.0, 0.0};

  double phi1() const { return weights.memory_pos; }
  double phi2() const { return weights.weight_pos; }
  double phi3() const { return weights.memory_neg; }
  double phi4() const { return weights.weight_neg; }

  bool has_ranges() const {
    for (double h : half_widths.as_array())
      if (h != 0.0) return true;
    return false;
  }

  friend bool operator==(const BiasProfile&, const BiasProfile&) = default;
};

inline void validate(const BiasProfile& p) {
  for (double w : p.weights.as_array())
    if (!std::isfinite(w) || w < 0.0)
      throw InvalidArgument("profile '" + p.label + "': weights must be finite and >= 0");
  for (double h : p.half_widths.as_array())
    if (!std::isfinite(h) || h < 0.0)
      throw InvalidArgument("profile '" + p.label + "': ranges must be finite and >= 0");
}

inline BiasProfile make_profile(std::string label, const Weights& w, const Weights& ranges = {0, 0, 0, 0}) {
  BiasProfile p{std::move(label), w, ranges};
  validate(p);
  return p;
}

/// The eight reward-processing presets, in table order.
inline const std::vector<BiasProfile>& presets() {
  static const std::vector<BiasProfile> kPresets = {
      {"AD", {1.0, 1.0, 0.5, 1.0}, {0.1, 0.1, 0.1, 0.1}},
      {"ADHD", {0.2, 1.0, 0.2, 1.0}, {0.1, 0.1, 0.1, 0.1}},
      {"AZ", {0.1, 1.0, 0.1, 1.0}, {0.1, 0.1, 0.1, 0.1}},
      {"CP", {0.5, 0.5, 1.0, 1.0}, {0.1, 0.1, 0.1, 0.1}},
      {"bvFTD", {0.5, 100.0, 0.5, 1.0}, {0.1, 10.0, 0.1, 0.1}},
      {"PD", {0.5, 1.0, 0.5, 100.0}, {0.1, 0.1, 0.1, 10.0}},
      {"M", {0.5, 1.0, 0.5, 1.0}, {0.1, 0.1, 0.1, 0.1}},
      {"standard", {1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0, 0.0}},
  };
  return kPresets;
}

/// Case-insensitive preset lookup.
inline std::optional<BiasProfile> find_preset(std::string_view label) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string key = lower(label);
  for (const auto& p : presets())
    if (lower(p.label) == key) return p;
  return std::nullopt;
}

inline const BiasProfile& standard_profile() { return presets().back(); }

/// Draws each weight uniformly from mean +/- half-width, clamped below at 0.
/// A zero half-width returns the mean without consuming randomness.
inline BiasProfile sample_profile(const BiasProfile& preset, Rng& rng) {
  validate(preset);
  auto mean = preset.weights.as_array();
  auto half = preset.half_widths.as_array();
  std::array<double, 4> drawn{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (half[i] == 0.0) {
      drawn[i] = mean[i];
      continue;
    }
    std::uniform_real_distribution<double> dist(mean[i] - half[i], mean[i] + half[i]);
    drawn[i] = std::max(0.0, dist(rng));
  }
  BiasProfile out = preset;
  out.weights = Weights::from_array(drawn);
  return out;
}

}  // namespace splitq
