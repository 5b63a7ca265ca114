#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "splitq/environment.hpp"

namespace splitq {

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

/// Chain actions. Advancing is action 0 so that a fresh table (all ties)
/// walks toward the goal.
enum ChainAction : ActionId { kChainRight = 0, kChainLeft = 1 };

/// States s0..s(n-1); right advances, left retreats (floor at s0); +1 on
/// entering the terminal state s(n-1).
inline TabularModel make_chain(std::size_t n) {
  if (n < 2) throw InvalidArgument("chain needs n >= 2");
  TabularModel m(n, 2);
  m.start = 0;
  m.terminal[n - 1] = true;
  m.horizon = 20 * n;
  for (StateId s = 0; s + 1 < n; ++s) {
    const StateId right = s + 1;
    const StateId left = s == 0 ? 0 : s - 1;
    m.outcomes(s, kChainRight) = {{right, 1.0, right == n - 1 ? 1.0 : 0.0}};
    m.outcomes(s, kChainLeft) = {{left, 1.0, 0.0}};
  }
  return m;
}

// ---------------------------------------------------------------------------
// Grid pacman
// ---------------------------------------------------------------------------

struct Cell {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum GridAction : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct GridPacmanSpec {
  std::size_t width = 4;
  std::size_t height = 4;
  Cell start{0, 0};
  std::vector<Cell> pellets;
  std::vector<Cell> ghosts;
  double pellet_reward = 1.0;
  double ghost_penalty = 10.0;
  std::size_t horizon = 200;
};

/// State layout for grid pacman: (position, remaining-pellet bitmask) packed
/// as position + cells * mask, plus one absorbing "caught" state at the end.
class GridPacmanLayout {
 public:
  static constexpr std::size_t kMaxPellets = 16;

  explicit GridPacmanLayout(const GridPacmanSpec& spec) : spec_(spec) { check(); }

  std::size_t cells() const { return spec_.width * spec_.height; }
  std::size_t num_masks() const { return std::size_t{1} << spec_.pellets.size(); }
  std::size_t full_mask() const { return num_masks() - 1; }
  std::size_t num_states() const { return cells() * num_masks() + 1; }
  StateId caught_state() const { return num_states() - 1; }

  std::size_t cell_index(Cell c) const { return c.y * spec_.width + c.x; }
  StateId encode(Cell c, std::size_t mask) const { return cell_index(c) + cells() * mask; }
  std::pair<Cell, std::size_t> decode(StateId s) const {
    const std::size_t pos = s % cells();
    return {{pos % spec_.width, pos / spec_.width}, s / cells()};
  }

  bool is_ghost(Cell c) const { return std::find(spec_.ghosts.begin(), spec_.ghosts.end(), c) != spec_.ghosts.end(); }
  int pellet_bit(Cell c) const {
    for (std::size_t i = 0; i < spec_.pellets.size(); ++i)
      if (spec_.pellets[i] == c) return static_cast<int>(i);
    return -1;
  }

  Cell move(Cell c, ActionId a) const {
    switch (a) {
      case kUp: return c.y == 0 ? c : Cell{c.x, c.y - 1};
      case kDown: return c.y + 1 == spec_.height ? c : Cell{c.x, c.y + 1};
      case kLeft: return c.x == 0 ? c : Cell{c.x - 1, c.y};
      case kRight: return c.x + 1 == spec_.width ? c : Cell{c.x + 1, c.y};
      default: throw IndexError("grid action out of range");
    }
  }

  const GridPacmanSpec& spec() const { return spec_; }

 private:
  void check() const {
    if (spec_.width < 2 || spec_.height < 2) throw InvalidArgument("grid dimensions must be >= 2");
    if (spec_.pellets.empty()) throw InvalidArgument("grid needs at least one pellet");
    if (spec_.pellets.size() > kMaxPellets) throw InvalidArgument("at most 16 pellets supported");
    auto inside = [&](Cell c) { return c.x < spec_.width && c.y < spec_.height; };
    if (!inside(spec_.start)) throw InvalidArgument("start cell outside grid");
    for (const auto& g : spec_.ghosts)
      if (!inside(g)) throw InvalidArgument("ghost cell outside grid");
    for (std::size_t i = 0; i < spec_.pellets.size(); ++i) {
      const Cell p = spec_.pellets[i];
      if (!inside(p)) throw InvalidArgument("pellet cell outside grid");
      if (p == spec_.start) throw InvalidArgument("pellet on start cell");
      if (is_ghost(p)) throw InvalidArgument("pellet on ghost cell");
      for (std::size_t j = 0; j < i; ++j)
        if (spec_.pellets[j] == p) throw InvalidArgument("duplicate pellet cell");
    }
    if (!(spec_.pellet_reward >= 0.0) || !(spec_.ghost_penalty >= 0.0))
      throw InvalidArgument("pellet_reward and ghost_penalty must be >= 0");
  }

  GridPacmanSpec spec_;
};

/// Four-directional grid with static ghost tiles. Entering a pellet cell pays
/// pellet_reward once; entering a ghost pays -ghost_penalty and ends the
/// episode; collecting every pellet ends the episode. Walls bump in place.
/// Starting on a ghost ends the episode on the first step.
inline TabularModel make_grid_pacman(const GridPacmanSpec& spec) {
  const GridPacmanLayout layout(spec);
  TabularModel m(layout.num_states(), 4);
  m.horizon = spec.horizon;
  m.start = layout.encode(spec.start, layout.full_mask());
  const StateId caught = layout.caught_state();
  m.terminal[caught] = true;

  for (StateId s = 0; s < caught; ++s) {
    const auto [cell, mask] = layout.decode(s);
    if (mask == 0) {
      m.terminal[s] = true;
      continue;
    }
    const bool start_on_ghost = s == m.start && layout.is_ghost(cell);
    for (ActionId a = 0; a < 4; ++a) {
      if (start_on_ghost) {
        m.outcomes(s, a) = {{caught, 1.0, -spec.ghost_penalty}};
        continue;
      }
      const Cell to = layout.move(cell, a);
      if (layout.is_ghost(to)) {
        m.outcomes(s, a) = {{caught, 1.0, -spec.ghost_penalty}};
        continue;
      }
      std::size_t next_mask = mask;
      double reward = 0.0;
      const int bit = layout.pellet_bit(to);
      if (bit >= 0 && (mask >> bit) & 1U) {
        next_mask &= ~(std::size_t{1} << bit);
        reward = spec.pellet_reward;
      }
      m.outcomes(s, a) = {{layout.encode(to, next_mask), 1.0, reward}};
    }
  }
  // Ghost-position states other than the start are unreachable; keep them
  // well-formed by making them terminal.
  for (StateId s = 0; s < caught; ++s) {
    if (s != m.start && layout.is_ghost(layout.decode(s).first)) m.terminal[s] = true;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Risky path
// ---------------------------------------------------------------------------

/// One fork: a long penalty-free branch of safe_len cells and a short branch
/// of risky_len cells where every step into a risky cell costs `penalty`
/// with probability `penalty_prob`.
struct ForkSegment {
  std::size_t safe_len = 4;
  std::size_t risky_len = 2;
  double penalty_prob = 0.5;
  double penalty = 2.0;
};

struct RiskyPathSpec {
  std::vector<ForkSegment> segments{ForkSegment{}};
  double goal_reward = 10.0;
};

/// Fork actions. In corridor cells action 0 advances and action 1 steps back.
enum RiskyAction : ActionId { kSafe = 0, kRisky = 1, kAdvance = 0, kRetreat = 1 };

/// State ids of one segment inside a risky-path model.
struct ForkStates {
  StateId fork = 0;
  StateId first_safe = 0;
  StateId first_risky = 0;
  std::size_t safe_len = 0;
  std::size_t risky_len = 0;
};

inline std::vector<ForkStates> risky_path_layout(const RiskyPathSpec& spec) {
  std::vector<ForkStates> out;
  StateId next = 0;
  for (const auto& seg : spec.segments) {
    ForkStates f;
    f.fork = next;
    f.first_safe = next + 1;
    f.first_risky = next + 1 + seg.safe_len;
    f.safe_len = seg.safe_len;
    f.risky_len = seg.risky_len;
    next = f.first_risky + seg.risky_len;
    out.push_back(f);
  }
  return out;
}

/// Sequence of forks ending in a terminal goal worth goal_reward. Leaving a
/// branch's last cell enters the next fork (or the goal), so a lone segment's
/// branches reach the goal after safe_len + 1 and risky_len + 1 steps.
inline TabularModel make_risky_path(const RiskyPathSpec& spec) {
  if (spec.segments.empty()) throw InvalidArgument("risky path needs at least one segment");
  if (!std::isfinite(spec.goal_reward)) throw InvalidArgument("goal_reward must be finite");
  for (const auto& seg : spec.segments) {
    if (seg.risky_len == 0) throw InvalidArgument("risky_len must be >= 1");
    if (seg.risky_len >= seg.safe_len) throw InvalidArgument("risky_len must be < safe_len");
    if (!(seg.penalty_prob >= 0.0 && seg.penalty_prob <= 1.0))
      throw InvalidArgument("penalty_prob must lie in [0, 1]");
    if (!std::isfinite(seg.penalty)) throw InvalidArgument("penalty must be finite");
  }
  const auto layout = risky_path_layout(spec);
  const StateId goal = layout.back().first_risky + layout.back().risky_len;
  TabularModel m(goal + 1, 2);
  m.start = 0;
  m.terminal[goal] = true;

  std::size_t longest = 0;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const ForkStates& f = layout[k];
    const ForkSegment& seg = spec.segments[k];
    const StateId exit = k + 1 < layout.size() ? layout[k + 1].fork : goal;
    const double exit_reward = exit == goal ? spec.goal_reward : 0.0;
    longest += seg.safe_len + 1;

    auto risky_step = [&](StateId to) {
      std::vector<Outcome> row;
      if (seg.penalty_prob < 1.0) row.push_back({to, 1.0 - seg.penalty_prob, 0.0});
      if (seg.penalty_prob > 0.0) row.push_back({to, seg.penalty_prob, -seg.penalty});
      return row;
    };

    m.outcomes(f.fork, kSafe) = {{f.first_safe, 1.0, 0.0}};
    m.outcomes(f.fork, kRisky) = risky_step(f.first_risky);

    for (std::size_t i = 0; i < seg.safe_len; ++i) {
      const StateId s = f.first_safe + i;
      const StateId ahead = i + 1 < seg.safe_len ? s + 1 : exit;
      const StateId back = i == 0 ? f.fork : s - 1;
      m.outcomes(s, kAdvance) = {{ahead, 1.0, ahead == exit ? exit_reward : 0.0}};
      m.outcomes(s, kRetreat) = {{back, 1.0, 0.0}};
    }
    for (std::size_t i = 0; i < seg.risky_len; ++i) {
      const StateId s = f.first_risky + i;
      const bool last = i + 1 == seg.risky_len;
      if (last)
        m.outcomes(s, kAdvance) = {{exit, 1.0, exit_reward}};
      else
        m.outcomes(s, kAdvance) = risky_step(s + 1);
      m.outcomes(s, kRetreat) = i == 0 ? std::vector<Outcome>{{f.fork, 1.0, 0.0}} : risky_step(s - 1);
    }
  }
  m.horizon = 4 * longest;
  return m;
}

inline TabularModel make_risky_path(std::size_t safe_len, std::size_t risky_len, double penalty_prob,
                                    double penalty, double goal_reward) {
  return make_risky_path(RiskyPathSpec{{ForkSegment{safe_len, risky_len, penalty_prob, penalty}}, goal_reward});
}

}  // namespace splitq
