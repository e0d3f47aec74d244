#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "samem/actions.hpp"
#include "samem/error.hpp"

namespace samem::nav {

// Evaluation kinematics. Camera height / HFOV style settings are carried as
// config metadata elsewhere; motion needs only these three.
struct ActionKinematics {
  double step_size = 0.25;        // meters per MOVE_FORWARD
  double turn_angle = 30.0;       // degrees per turn
  double success_distance = 1.0;  // meters to the nearest target

  void validate() const {
    if (!(step_size > 0.0 && turn_angle > 0.0 && success_distance > 0.0)) {
      throw ConfigError("kinematics values must be positive");
    }
  }
};

// Planar pose; heading in degrees, normalized to [0, 360), 0 = +x.
struct AgentPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

inline double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) h += 360.0;
  return h;
}

inline AgentPose apply_action(const AgentPose& pose, Action action,
                              const ActionKinematics& kin) {
  AgentPose out = pose;
  switch (action) {
    case Action::kMoveForward: {
      const double rad = pose.heading * std::numbers::pi / 180.0;
      out.x += kin.step_size * std::cos(rad);
      out.y += kin.step_size * std::sin(rad);
      break;
    }
    case Action::kTurnLeft:
      out.heading = normalize_heading(pose.heading + kin.turn_angle);
      break;
    case Action::kTurnRight:
      out.heading = normalize_heading(pose.heading - kin.turn_angle);
      break;
    case Action::kStop:
      break;
  }
  return out;
}

// One evaluation episode: the action sequence actually taken, where it
// started, every target instance position, and the geodesic shortest-path
// length used for SPL.
struct EpisodeRecord {
  std::vector<Action> actions;
  AgentPose start;
  std::vector<std::array<double, 2>> targets;
  double geodesic = 0.0;

  void validate() const {
    if (targets.empty()) throw ConfigError("episode needs >= 1 target");
    if (!(geodesic > 0.0)) {
      throw ConfigError("geodesic shortest-path length must be > 0");
    }
  }
};

struct JudgedEpisode {
  bool success = false;
  double path_length = 0.0;
  double geodesic = 0.0;
};

// Walks the action sequence and judges success: the final pose must lie
// within success_distance (Euclidean) of the nearest target, and — unless
// require_stop is disabled — the episode must have ended with an explicit
// STOP (a truncated episode next to the target still fails). Path length
// counts forward motion only; turning in place is free.
inline JudgedEpisode judge_episode(const EpisodeRecord& rec,
                                   const ActionKinematics& kin,
                                   bool require_stop = true) {
  kin.validate();
  rec.validate();
  JudgedEpisode out;
  out.geodesic = rec.geodesic;
  AgentPose pose = rec.start;
  pose.heading = normalize_heading(pose.heading);
  bool stopped = false;
  for (Action a : rec.actions) {
    pose = apply_action(pose, a, kin);
    if (a == Action::kMoveForward) out.path_length += kin.step_size;
    if (a == Action::kStop) {
      stopped = true;
      break;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : rec.targets) {
    best = std::min(best, std::hypot(pose.x - t[0], pose.y - t[1]));
  }
  out.success = best <= kin.success_distance && (stopped || !require_stop);
  return out;
}

struct NavMetrics {
  double sr = 0.0;
  double spl = 0.0;
};

// SR = fraction of successes. SPL discounts each success by geodesic length
// over the longer of agent path and geodesic, so SPL <= SR always.
inline NavMetrics compute_sr_spl(std::span<const JudgedEpisode> episodes) {
  if (episodes.empty()) throw ConfigError("no episodes to score");
  NavMetrics m;
  for (const JudgedEpisode& e : episodes) {
    if (!(e.geodesic > 0.0)) {
      throw ConfigError("geodesic shortest-path length must be > 0");
    }
    if (e.success) {
      m.sr += 1.0;
      m.spl += e.geodesic / std::max(e.path_length, e.geodesic);
    }
  }
  const double n = static_cast<double>(episodes.size());
  m.sr /= n;
  m.spl /= n;
  return m;
}

// --- episode records as JSON Lines ----------------------------------------
// One object per line:
//   {"actions": ["MOVE_FORWARD", ...],
//    "start": {"x": 0.0, "y": 0.0, "heading": 0.0},
//    "targets": [[x, y], ...],
//    "geodesic": 5.0}

inline nlohmann::json record_to_json(const EpisodeRecord& rec) {
  nlohmann::json j;
  j["actions"] = nlohmann::json::array();
  for (Action a : rec.actions) j["actions"].push_back(std::string(to_token(a)));
  j["start"] = {{"x", rec.start.x},
                {"y", rec.start.y},
                {"heading", rec.start.heading}};
  j["targets"] = nlohmann::json::array();
  for (const auto& t : rec.targets) j["targets"].push_back({t[0], t[1]});
  j["geodesic"] = rec.geodesic;
  return j;
}

inline EpisodeRecord record_from_json(const nlohmann::json& j) {
  EpisodeRecord rec;
  for (const auto& a : j.at("actions")) {
    rec.actions.push_back(action_from_token_or_throw(a.get<std::string>()));
  }
  const auto& start = j.at("start");
  rec.start.x = start.at("x").get<double>();
  rec.start.y = start.at("y").get<double>();
  rec.start.heading = start.at("heading").get<double>();
  for (const auto& t : j.at("targets")) {
    if (!t.is_array() || t.size() != 2) {
      throw ConfigError("target must be an [x, y] pair");
    }
    rec.targets.push_back({t[0].get<double>(), t[1].get<double>()});
  }
  rec.geodesic = j.at("geodesic").get<double>();
  rec.validate();
  return rec;
}

inline void write_episode_records(std::span<const EpisodeRecord> records,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const EpisodeRecord& rec : records) {
    out << record_to_json(rec).dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

inline std::vector<EpisodeRecord> read_episode_records(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file: " + path.string());
  std::vector<EpisodeRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace samem::nav
