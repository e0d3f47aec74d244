#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samem/error.hpp"

namespace samem {

// Discrete navigation actions. The canonical token spelling is the uppercase
// underscore form used in datasets and model output.
enum class Action : std::uint8_t {
  kMoveForward = 0,
  kTurnLeft = 1,
  kTurnRight = 2,
  kStop = 3,
};

inline std::string_view to_token(Action a) {
  switch (a) {
    case Action::kMoveForward: return "MOVE_FORWARD";
    case Action::kTurnLeft: return "TURN_LEFT";
    case Action::kTurnRight: return "TURN_RIGHT";
    case Action::kStop: return "STOP";
  }
  throw ConfigError("unknown action value");
}

// Token name -> action. Configurable so deployments can add aliases; the
// default covers exactly the four canonical tokens.
using ActionVocabulary = std::vector<std::pair<std::string, Action>>;

inline const ActionVocabulary& default_vocabulary() {
  static const ActionVocabulary vocab = {
      {"MOVE_FORWARD", Action::kMoveForward},
      {"TURN_LEFT", Action::kTurnLeft},
      {"TURN_RIGHT", Action::kTurnRight},
      {"STOP", Action::kStop},
  };
  return vocab;
}

inline std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

inline std::optional<Action> action_from_token(
    std::string_view token, const ActionVocabulary& vocab = default_vocabulary()) {
  const std::string upper = ascii_upper(token);
  for (const auto& [name, action] : vocab) {
    if (upper == name) return action;
  }
  return std::nullopt;
}

// Strict canonical-token parse used by file readers; throws on unknown names.
inline Action action_from_token_or_throw(std::string_view token) {
  if (auto a = action_from_token(token)) return *a;
  throw ConfigError("unknown action token: " + std::string(token));
}

}  // namespace samem
