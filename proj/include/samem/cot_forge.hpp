#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "samem/action_parse.hpp"
#include "samem/actions.hpp"
#include "samem/error.hpp"
#include "samem/rng.hpp"

namespace samem::cot {

inline constexpr std::size_t kGroundTruthActions = 5;

// An expert trajectory to cut samples from. frames holds trace frame indices;
// actions[i] is the transition frame i -> i+1 (a trailing action on the final
// frame, usually STOP, is allowed, so len(actions) is len(frames)-1 or
// len(frames)).
struct TrajectorySource {
  std::vector<std::int64_t> frames;
  std::vector<Action> actions;
  std::string instruction;
  std::string target;

  void validate() const {
    if (frames.empty()) throw ConfigError("trajectory has no frames");
    if (actions.size() + 1 != frames.size() &&
        actions.size() != frames.size()) {
      throw ConfigError(
          "trajectory actions must number len(frames)-1 or len(frames)");
    }
  }
};

// One training sample: a chosen current frame, everything before it as
// history, the three-section reasoning block, and the next five expert
// actions as ground truth.
struct CoTSample {
  std::string instruction;
  std::string target;  // carried for annotation; not serialized
  std::vector<std::int64_t> history;
  std::int64_t current = 0;
  CoTBlock cot;
  std::vector<Action> ground_truth;

  void validate() const {
    if (ground_truth.size() != kGroundTruthActions) {
      throw ConfigError("ground truth must hold exactly 5 actions");
    }
  }

  friend bool operator==(const CoTSample&, const CoTSample&) = default;
};

// Picks the current frame uniformly (seeded) among indices that still have
// five expert actions ahead, takes all preceding frames as history and the
// next five actions as ground truth. The reasoning block is left empty for
// the annotator.
inline CoTSample sample_keyframe(const TrajectorySource& traj,
                                 std::uint64_t seed) {
  traj.validate();
  if (traj.actions.size() < kGroundTruthActions) {
    throw ConfigError("insufficient trailing actions");
  }
  const std::size_t n_valid = traj.actions.size() - kGroundTruthActions + 1;
  // Valid current indices are [0, n_valid); every one of them is a frame
  // index because len(actions) <= len(frames).
  SplitMix64 rng(seed);
  const std::size_t c = static_cast<std::size_t>(rng.next_below(n_valid));

  CoTSample sample;
  sample.instruction = traj.instruction;
  sample.target = traj.target;
  sample.history.assign(traj.frames.begin(),
                        traj.frames.begin() + static_cast<std::ptrdiff_t>(c));
  sample.current = traj.frames[c];
  sample.ground_truth.assign(
      traj.actions.begin() + static_cast<std::ptrdiff_t>(c),
      traj.actions.begin() + static_cast<std::ptrdiff_t>(c) +
          kGroundTruthActions);
  return sample;
}

// Produces the three reasoning sections for a sample skeleton. Must be safe
// to call concurrently.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual CoTBlock annotate(const CoTSample& skeleton) const = 0;
};

// Deterministic template annotator: fills the sections from the target label
// and the ground-truth action names. Never fails, never hedges.
class TemplateAnnotator : public Annotator {
 public:
  CoTBlock annotate(const CoTSample& skeleton) const override {
    const std::string& target = skeleton.target;
    CoTBlock cot;
    cot.perception =
        "The agent sees an indoor space with walls, open floor and nearby "
        "furniture while searching for a " +
        target + ". " + std::to_string(skeleton.history.size()) +
        " earlier viewpoints are in memory.";
    cot.target_env =
        "Rooms connected by the visible doorways are the kind of place a " +
        target + " is typically found; visible large furniture anchors the "
        "layout and frames the open route ahead.";
    std::string plan;
    for (std::size_t i = 0; i < skeleton.ground_truth.size(); ++i) {
      if (i) plan += ", ";
      plan += to_token(skeleton.ground_truth[i]);
    }
    cot.env_action = "To approach the " + target +
                     ", the agent follows the open route: " + plan + ".";
    return cot;
  }
};

inline CoTSample annotate(const CoTSample& skeleton,
                          const Annotator& annotator) {
  CoTSample out = skeleton;
  out.cot = annotator.annotate(skeleton);
  if (out.cot.perception.empty() || out.cot.target_env.empty() ||
      out.cot.env_action.empty()) {
    throw AnnotationError("annotator returned an incomplete reasoning block");
  }
  return out;
}

struct AnnotationFailure {
  std::size_t index = 0;
  std::string message;
};

struct AnnotationReport {
  std::size_t annotated = 0;
  std::vector<AnnotationFailure> failures;
};

// Annotates in place; samples whose annotation fails keep an empty block and
// are reported. Requests run on up to max_concurrency threads; output order
// is the input order regardless.
inline AnnotationReport annotate_all(std::vector<CoTSample>& samples,
                                     const Annotator& annotator,
                                     std::size_t max_concurrency = 1) {
  if (max_concurrency == 0) max_concurrency = 1;
  AnnotationReport report;
  std::vector<std::optional<AnnotationFailure>> failures(samples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) return;
      try {
        samples[i] = annotate(samples[i], annotator);
      } catch (const std::exception& e) {
        failures[i] = AnnotationFailure{i, e.what()};
      }
    }
  };
  if (max_concurrency == 1 || samples.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t n = std::min(max_concurrency, samples.size());
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures) {
    if (f) {
      report.failures.push_back(std::move(*f));
    }
  }
  report.annotated = samples.size() - report.failures.size();
  return report;
}

// --- curation ---------------------------------------------------------------

struct CurationConfig {
  // The conservative expansions (suggest/suggests/possibly/perhaps) are off
  // by default; the default list is the four stems with their inflections.
  bool extended_terms = false;
  std::vector<std::string> extra_terms;
};

inline std::vector<std::string> hedging_terms(const CurationConfig& cfg = {}) {
  std::vector<std::string> terms = {
      "indicate", "indicates", "indicated", "indicating",
      "might",
      "may",
      "imply", "implies", "implied", "implying",
  };
  if (cfg.extended_terms) {
    terms.insert(terms.end(), {"suggest", "suggests", "possibly", "perhaps"});
  }
  terms.insert(terms.end(), cfg.extra_terms.begin(), cfg.extra_terms.end());
  return terms;
}

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

// Case-insensitive whole-word containment: "may" matches "May," but not
// "mayonnaise", "dismay" or "MAY2024".
inline bool contains_word(std::string_view text, std::string_view word) {
  const std::string lower = ascii_lower(text);
  std::size_t pos = 0;
  while ((pos = lower.find(word, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !is_word_char(static_cast<unsigned char>(lower[pos - 1]));
    const std::size_t end = pos + word.size();
    const bool right_ok = end == lower.size() ||
                          !is_word_char(static_cast<unsigned char>(lower[end]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace detail

// First hedging term found in the perception section, if any. Only the
// perception section is filtered; hedged planning language elsewhere is fine.
inline std::optional<std::string> hedging_match(
    const CoTSample& sample, const std::vector<std::string>& terms) {
  for (const auto& term : terms) {
    if (detail::contains_word(sample.cot.perception,
                              detail::ascii_lower(term))) {
      return term;
    }
  }
  return std::nullopt;
}

struct DiscardedSample {
  CoTSample sample;
  std::string term;
};

struct CurationReport {
  std::vector<CoTSample> kept;
  std::vector<DiscardedSample> discarded;
};

inline CurationReport curate(std::vector<CoTSample> samples,
                             const CurationConfig& cfg = {}) {
  const auto terms = hedging_terms(cfg);
  CurationReport report;
  for (auto& sample : samples) {
    if (auto term = hedging_match(sample, terms)) {
      report.discarded.push_back({std::move(sample), std::move(*term)});
    } else {
      report.kept.push_back(std::move(sample));
    }
  }
  return report;
}

// --- dataset I/O (JSON Lines) -----------------------------------------------
// {"instruction": ..., "history": [...], "current": n,
//  "cot": {"perception": ..., "target_env": ..., "env_action": ...},
//  "actions": ["MOVE_FORWARD", ...]}

inline nlohmann::json sample_to_json(const CoTSample& sample) {
  nlohmann::json j;
  j["instruction"] = sample.instruction;
  j["history"] = sample.history;
  j["current"] = sample.current;
  j["cot"] = {{"perception", sample.cot.perception},
              {"target_env", sample.cot.target_env},
              {"env_action", sample.cot.env_action}};
  j["actions"] = nlohmann::json::array();
  for (Action a : sample.ground_truth) {
    j["actions"].push_back(std::string(to_token(a)));
  }
  return j;
}

inline CoTSample sample_from_json(const nlohmann::json& j) {
  CoTSample sample;
  sample.instruction = j.at("instruction").get<std::string>();
  sample.history = j.at("history").get<std::vector<std::int64_t>>();
  sample.current = j.at("current").get<std::int64_t>();
  const auto& cot = j.at("cot");
  sample.cot.perception = cot.at("perception").get<std::string>();
  sample.cot.target_env = cot.at("target_env").get<std::string>();
  sample.cot.env_action = cot.at("env_action").get<std::string>();
  for (const auto& a : j.at("actions")) {
    sample.ground_truth.push_back(
        action_from_token_or_throw(a.get<std::string>()));
  }
  sample.validate();
  return sample;
}

inline void write_dataset(std::span<const CoTSample> samples,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const CoTSample& s : samples) out << sample_to_json(s).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

inline std::vector<CoTSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path.string());
  std::vector<CoTSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

// --- trajectory input (JSON Lines) ------------------------------------------
// {"instruction": ..., "target": ..., "frames": [0, 1, ...],
//  "actions": ["MOVE_FORWARD", ...]}

inline TrajectorySource trajectory_from_json(const nlohmann::json& j) {
  TrajectorySource traj;
  traj.instruction = j.at("instruction").get<std::string>();
  traj.target = j.at("target").get<std::string>();
  traj.frames = j.at("frames").get<std::vector<std::int64_t>>();
  for (const auto& a : j.at("actions")) {
    traj.actions.push_back(action_from_token_or_throw(a.get<std::string>()));
  }
  traj.validate();
  return traj;
}

inline std::vector<TrajectorySource> read_trajectories(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectories file: " + path.string());
  std::vector<TrajectorySource> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trajectory_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("trajectories line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return out;
}

}  // namespace samem::cot
