#pragma once

#include <array>
#include <numbers>
#include <string>
#include <string_view>

#include "pgvo/error.hpp"
#include "pgvo/se2.hpp"

namespace pgvo {

enum class Action { move_forward = 0, turn_left = 1, turn_right = 2, stop = 3 };

inline constexpr std::array<Action, 3> kMovementActions{Action::move_forward, Action::turn_left,
                                                         Action::turn_right};

inline constexpr double kForwardStep = 0.25;                      // meters
inline constexpr double kTurnAngle = 30.0 * std::numbers::pi / 180.0;  // radians

inline bool is_valid(Action a) {
  const int v = static_cast<int>(a);
  return v >= 0 && v <= 3;
}

inline bool is_movement(Action a) { return a != Action::stop && is_valid(a); }

inline std::string to_string(Action a) {
  switch (a) {
    case Action::move_forward: return "move_forward";
    case Action::turn_left: return "turn_left";
    case Action::turn_right: return "turn_right";
    case Action::stop: return "stop";
  }
  throw UsageError("unknown action " + std::to_string(static_cast<int>(a)));
}

inline Action parse_action(std::string_view s) {
  if (s == "move_forward") return Action::move_forward;
  if (s == "turn_left") return Action::turn_left;
  if (s == "turn_right") return Action::turn_right;
  if (s == "stop") return Action::stop;
  throw UsageError("unknown action '" + std::string(s) + "'");
}

/// Index into per-action tables (movement actions only).
inline std::size_t action_index(Action a) {
  if (!is_movement(a)) throw UsageError("not a movement action: " + std::to_string(static_cast<int>(a)));
  return static_cast<std::size_t>(a);
}

/// Noise-free motion of an action in the agent frame.
inline Se2 nominal_motion(Action a) {
  switch (a) {
    case Action::move_forward: return {0.0, 0.0, -kForwardStep};
    case Action::turn_left: return {kTurnAngle, 0.0, 0.0};
    case Action::turn_right: return {-kTurnAngle, 0.0, 0.0};
    case Action::stop: return Se2::identity();
  }
  throw UsageError("unknown action " + std::to_string(static_cast<int>(a)));
}

}  // namespace pgvo
