#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "samem/actions.hpp"
#include "samem/error.hpp"

namespace samem {

// The three reasoning sections, in their fixed order: what the agent sees,
// which visible elements relate to the target, and the step-by-step plan.
struct CoTBlock {
  std::string perception;
  std::string target_env;
  std::string env_action;

  bool empty() const {
    return perception.empty() && target_env.empty() && env_action.empty();
  }

  friend bool operator==(const CoTBlock&, const CoTBlock&) = default;
};

struct ActionPlan {
  std::vector<Action> actions;

  friend bool operator==(const ActionPlan&, const ActionPlan&) = default;
};

struct ParsedOutput {
  std::optional<CoTBlock> cot;
  ActionPlan plan;
  bool truncated = false;  // input listed more than kMaxPlanLength actions
};

// A plan never exceeds five actions and never continues past a STOP.
inline constexpr std::size_t kMaxPlanLength = 5;

namespace detail {

inline bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Lowercased copy with dashes (ASCII and en/em) and underscores mapped to a
// single space and whitespace runs collapsed. map[i] is the offset in `text`
// of the byte normalized[i] came from.
inline std::string normalize_for_headers(std::string_view text,
                                         std::vector<std::size_t>& map) {
  std::string out;
  out.reserve(text.size());
  map.clear();
  map.reserve(text.size());
  auto push = [&](char c, std::size_t at) {
    out.push_back(c);
    map.push_back(at);
  };
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    // UTF-8 en dash (e2 80 93) / em dash (e2 80 94) count as '-'.
    if (c == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x93 ||
         static_cast<unsigned char>(text[i + 2]) == 0x94)) {
      if (!out.empty() && out.back() != ' ') push(' ', i);
      i += 3;
      continue;
    }
    if (c == '-' || c == '_' || c == ' ' || c == '\t' || c == '\r' ||
        c == '\n' || c == '\f' || c == '\v') {
      if (!out.empty() && out.back() != ' ') push(' ', i);
      ++i;
      continue;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    push(static_cast<char>(c), i);
    ++i;
  }
  return out;
}

struct HeaderHit {
  std::size_t content_begin;  // offset in the original text
  std::size_t header_begin;
};

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

// Walks back over a numbering/bullet token ("2)", "3.", "###", "-") directly
// before a header so it is treated as part of the header, not of the previous
// section's content.
inline std::size_t backup_over_numbering(std::string_view text,
                                         std::size_t header_begin) {
  std::size_t j = header_begin;
  while (j > 0 && is_space_byte(static_cast<unsigned char>(text[j - 1]))) --j;
  std::size_t token_end = j;
  while (j > 0) {
    const unsigned char c = static_cast<unsigned char>(text[j - 1]);
    if (is_space_byte(c)) break;
    const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (letter) return header_begin;  // real content, keep it
    --j;
  }
  if (token_end == j || token_end - j > 8) return header_begin;
  return j;
}

// Finds `header` in the normalized text at or after from_norm. Returns the
// normalized end position and fills original-text offsets.
inline std::optional<std::size_t> find_header(
    const std::string& norm, const std::vector<std::size_t>& map,
    std::string_view original, std::string_view header, std::size_t from_norm,
    HeaderHit& hit) {
  const std::size_t pos = norm.find(header, from_norm);
  if (pos == std::string::npos) return std::nullopt;
  const std::size_t end_norm = pos + header.size();
  hit.header_begin = backup_over_numbering(original, map[pos]);
  // Content starts after the header, skipping one optional ':' and blanks.
  std::size_t o = end_norm < map.size() ? map[end_norm]
                                        : original.size();
  while (o < original.size() &&
         (original[o] == ' ' || original[o] == '\t')) {
    ++o;
  }
  if (o < original.size() && original[o] == ':') ++o;
  while (o < original.size() &&
         (original[o] == ' ' || original[o] == '\t' || original[o] == '\r' ||
          original[o] == '\n')) {
    ++o;
  }
  hit.content_begin = o;
  return end_norm;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
  while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
  return std::string(s.substr(b, e - b));
}

struct RawToken {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string word;  // punctuation-stripped
};

// Whitespace-separated tokens with surrounding punctuation stripped. Tokens
// that strip to nothing (pure punctuation, bullets, stray UTF-8) keep an
// empty word.
inline std::vector<RawToken> tokenize(std::string_view text) {
  std::vector<RawToken> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
        c == '\v') {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < text.size()) {
      unsigned char d = static_cast<unsigned char>(text[i]);
      if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '\f' ||
          d == '\v') {
        break;
      }
      ++i;
    }
    RawToken t;
    t.begin = begin;
    t.end = i;
    std::size_t wb = begin, we = i;
    while (wb < we && !is_word_byte(static_cast<unsigned char>(text[wb]))) ++wb;
    while (we > wb && !is_word_byte(static_cast<unsigned char>(text[we - 1]))) {
      --we;
    }
    t.word = std::string(text.substr(wb, we - wb));
    tokens.push_back(std::move(t));
  }
  return tokens;
}

inline bool is_numbering(const std::string& word) {
  if (word.empty()) return true;
  return std::all_of(word.begin(), word.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

// Renders the canonical plan text: one action token per line.
inline std::string render_plan(const ActionPlan& plan) {
  std::string out;
  for (Action a : plan.actions) {
    out += to_token(a);
    out += '\n';
  }
  return out;
}

// Canonical full-output rendering (labeled sections, then the plan); the
// golden-file fixtures use this grammar.
inline std::string render_output(const std::optional<CoTBlock>& cot,
                                 const ActionPlan& plan) {
  std::string out;
  if (cot) {
    out += "1) Environment Perception: " + cot->perception + "\n";
    out += "2) Target-Environment Relationship: " + cot->target_env + "\n";
    out += "3) Environment-Action Relationship: " + cot->env_action + "\n";
  }
  out += render_plan(plan);
  return out;
}

// Parses model output: an optional three-section reasoning block followed by
// a discrete action plan.
//
// Grammar (lenient on formatting, strict on vocabulary):
//  - Section headers are matched case-insensitively, tolerate numbering,
//    ASCII/Unicode dashes and an optional trailing colon. The block counts
//    as present only when all three appear in order.
//  - The plan is the trailing run of vocabulary tokens (one per line or
//    inline, numbered or bare, surrounding punctuation ignored).
//  - Actions after a STOP are dropped; more than five actions truncate to the
//    first five and set `truncated`.
// Throws ActionParseError when no actions can be recognized. Never crashes on
// arbitrary bytes.
inline ParsedOutput parse_output(
    std::string_view text,
    const ActionVocabulary& vocab = default_vocabulary()) {
  ParsedOutput result;

  std::vector<std::size_t> map;
  const std::string norm = detail::normalize_for_headers(text, map);

  detail::HeaderHit perception_hit, target_hit, action_hit;
  auto p1 = detail::find_header(norm, map, text, "environment perception", 0,
                                perception_hit);
  if (p1) {
    auto p2 = detail::find_header(norm, map, text,
                                  "target environment relationship", *p1,
                                  target_hit);
    if (p2) {
      auto p3 = detail::find_header(norm, map, text,
                                    "environment action relationship", *p2,
                                    action_hit);
      if (p3) {
        CoTBlock cot;
        cot.perception = detail::trim(text.substr(
            perception_hit.content_begin,
            target_hit.header_begin - perception_hit.content_begin));
        cot.target_env = detail::trim(
            text.substr(target_hit.content_begin,
                        action_hit.header_begin - target_hit.content_begin));
        cot.env_action = detail::trim(text.substr(action_hit.content_begin));
        result.cot = std::move(cot);
      }
    }
  }

  // Numbering immediately before the first section header ("1)" in
  // "1) Environment Perception") must not stop the trailing scan, so the
  // scan is bounded to the text after the last header when a block exists.
  const std::string_view plan_region =
      result.cot ? text.substr(action_hit.content_begin) : text;

  const auto tokens = detail::tokenize(plan_region);
  std::vector<Action> reversed;
  std::size_t run_begin = plan_region.size();
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (auto a = action_from_token(it->word, vocab)) {
      reversed.push_back(*a);
      run_begin = it->begin;
      continue;
    }
    if (detail::is_numbering(it->word)) {  // "1.", "2)", bullets
      run_begin = it->begin;
      continue;
    }
    break;
  }
  std::vector<Action> actions(reversed.rbegin(), reversed.rend());

  if (actions.empty()) throw ActionParseError("no actions");

  // The plan is not part of the reasoning text.
  if (result.cot) {
    result.cot->env_action =
        detail::trim(plan_region.substr(0, run_begin));
  }

  auto stop_it = std::find(actions.begin(), actions.end(), Action::kStop);
  if (stop_it != actions.end()) actions.erase(stop_it + 1, actions.end());

  if (actions.size() > kMaxPlanLength) {
    actions.resize(kMaxPlanLength);
    result.truncated = true;
  }

  result.plan.actions = std::move(actions);
  return result;
}

}  // namespace samem
