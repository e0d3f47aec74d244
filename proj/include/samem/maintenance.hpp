#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "samem/compression.hpp"
#include "samem/embedding.hpp"
#include "samem/error.hpp"

namespace samem {

// Weights of the fusion probability: adjacency similarity (w_adj) plus
// dissimilarity to the instruction (w_txt) and to the current frame (w_cur).
struct FusionWeights {
  double w_txt = 0.3;
  double w_adj = 0.4;
  double w_cur = 0.3;

  void validate() const {
    for (double w : {w_txt, w_adj, w_cur}) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw ConfigError("fusion weights must lie in [0, 1]");
      }
    }
  }
};

enum class MaintenanceOperation { kRemoval, kFusion };
enum class MaintenanceCriterion { kTemporal, kRelevance };

struct MaintenancePolicy {
  MaintenanceOperation operation = MaintenanceOperation::kFusion;
  MaintenanceCriterion criterion = MaintenanceCriterion::kRelevance;
  FusionWeights weights{};  // used only when criterion == kRelevance
  std::size_t budget_k = kDefaultTokenBudget;
};

// The memory buffer: frames plus, per frame, the ascending list of global
// step indices that contributed to it (a fused frame carries every source
// step of both parents). Concatenating all source lists in frame order must
// stay strictly ascending.
struct MemoryState {
  std::vector<TokenMatrix> frames;
  std::vector<std::vector<std::int64_t>> source_indices;
  std::size_t m_max = 0;

  std::size_t frame_count() const noexcept { return frames.size(); }

  std::size_t total_tokens() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.size();
    return n;
  }

  void validate() const {
    if (frames.size() != source_indices.size()) {
      throw ConfigError("memory: frames and source_indices disagree in length");
    }
    std::int64_t prev = -1;
    for (const auto& list : source_indices) {
      if (list.empty()) throw ConfigError("memory: empty source-index list");
      for (std::int64_t s : list) {
        if (s <= prev) {
          throw ConfigError("memory: source indices not strictly ascending");
        }
        prev = s;
      }
    }
  }
};

struct MaintenanceAction {
  enum class Kind { kRemoveFrame, kFusePair };
  Kind kind = Kind::kFusePair;
  std::size_t index = 0;  // frame removed, or left frame of the fused pair

  friend bool operator==(const MaintenanceAction&,
                         const MaintenanceAction&) = default;
};

inline std::string to_string(const MaintenanceAction& a) {
  return (a.kind == MaintenanceAction::Kind::kRemoveFrame ? "remove("
                                                          : "fuse(") +
         std::to_string(a.index) + ")";
}

namespace detail {

// Fusion probability of the adjacent pair (i, i+1) given precomputed frame
// means and pooled instruction/current vectors.
inline double fusion_probability(const TokenVector& a_mean,
                                 const TokenVector& b_mean,
                                 const TokenVector& instr_mean,
                                 const TokenVector& cur_mean,
                                 const FusionWeights& w) {
  double p = 0.0;
  if (w.w_adj > 0.0) p += w.w_adj * cosine(a_mean, b_mean);
  if (w.w_txt > 0.0) {
    p += w.w_txt *
         (1.0 - 0.5 * (cosine(a_mean, instr_mean) + cosine(b_mean, instr_mean)));
  }
  if (w.w_cur > 0.0) {
    p += w.w_cur *
         (1.0 - 0.5 * (cosine(a_mean, cur_mean) + cosine(b_mean, cur_mean)));
  }
  return p;
}

inline std::vector<TokenVector> frame_means(const MemoryState& mem) {
  std::vector<TokenVector> means;
  means.reserve(mem.frames.size());
  for (const auto& f : mem.frames) means.push_back(mean_pool(f));
  return means;
}

// Temporal gap before frame i+1: first source step of frame i+1 minus last
// source step of frame i, so fused frames participate with their full span.
inline std::vector<std::int64_t> temporal_gaps(const MemoryState& mem) {
  std::vector<std::int64_t> gaps;
  gaps.reserve(mem.frames.size() - 1);
  for (std::size_t i = 0; i + 1 < mem.frames.size(); ++i) {
    gaps.push_back(mem.source_indices[i + 1].front() -
                   mem.source_indices[i].back());
  }
  return gaps;
}

template <typename T>
std::size_t argmin_first(const std::vector<T>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

template <typename T>
std::size_t argmax_first(const std::vector<T>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace detail

// Fusion probabilities for every adjacent pair, in pair order.
inline std::vector<double> fusion_pair_scores(const MemoryState& mem,
                                              const TokenMatrix& instruction,
                                              const TokenMatrix& current,
                                              const FusionWeights& weights) {
  if (mem.frames.size() < 2) throw ConfigError("nothing to merge");
  weights.validate();
  const TokenVector instr_mean = mean_pool(instruction);
  const TokenVector cur_mean = mean_pool(current);
  const auto means = detail::frame_means(mem);
  std::vector<double> scores;
  scores.reserve(means.size() - 1);
  for (std::size_t i = 0; i + 1 < means.size(); ++i) {
    scores.push_back(detail::fusion_probability(means[i], means[i + 1],
                                                instr_mean, cur_mean, weights));
  }
  return scores;
}

// Index i of the adjacent pair (i, i+1) with the highest fusion probability;
// ties resolve to the smallest i.
inline std::size_t find_merge_pair(const MemoryState& mem,
                                   const TokenMatrix& instruction,
                                   const TokenMatrix& current,
                                   const FusionWeights& weights) {
  return detail::argmax_first(
      fusion_pair_scores(mem, instruction, current, weights));
}

// Fuse frames i and i+1 in place: their concatenation is average-pooled down
// to min(budget_k, combined size) tokens, and the source-index lists are
// concatenated. Memory length shrinks by exactly one.
inline void merge_pair(MemoryState& mem, std::size_t i, std::size_t budget_k) {
  if (budget_k == 0) throw ConfigError("budget_k must be >= 1");
  if (i + 1 >= mem.frames.size()) {
    throw ConfigError("merge_pair: index out of range");
  }
  const TokenMatrix& left = mem.frames[i];
  const TokenMatrix& right = mem.frames[i + 1];
  TokenMatrix merged(left.dim());
  for (std::size_t t = 0; t < left.size(); ++t) merged.push_token(left.token(t));
  for (std::size_t t = 0; t < right.size(); ++t) {
    merged.push_token(right.token(t));
  }
  const std::size_t k = std::min(budget_k, merged.size());
  mem.frames[i] = adaptive_avg_pool(merged, k);
  mem.frames.erase(mem.frames.begin() + static_cast<std::ptrdiff_t>(i) + 1);

  auto& src = mem.source_indices[i];
  const auto& src_next = mem.source_indices[i + 1];
  src.insert(src.end(), src_next.begin(), src_next.end());
  mem.source_indices.erase(mem.source_indices.begin() +
                           static_cast<std::ptrdiff_t>(i) + 1);
}

inline void remove_frame(MemoryState& mem, std::size_t j) {
  if (j >= mem.frames.size()) {
    throw ConfigError("remove_frame: index out of range");
  }
  mem.frames.erase(mem.frames.begin() + static_cast<std::ptrdiff_t>(j));
  mem.source_indices.erase(mem.source_indices.begin() +
                           static_cast<std::ptrdiff_t>(j));
}

// Relevance score for removing a single frame: mean of its dissimilarity to
// the instruction and to the current frame. The adjacency term of the fusion
// probability has no single-frame analogue, so the two remaining terms are
// renormalized to 0.5/0.5.
inline std::vector<double> removal_relevance_scores(
    const MemoryState& mem, const TokenMatrix& instruction,
    const TokenMatrix& current) {
  const TokenVector instr_mean = mean_pool(instruction);
  const TokenVector cur_mean = mean_pool(current);
  std::vector<double> scores;
  scores.reserve(mem.frames.size());
  for (const auto& f : mem.frames) {
    const TokenVector m = mean_pool(f);
    scores.push_back(0.5 * (1.0 - cosine(m, instr_mean)) +
                     0.5 * (1.0 - cosine(m, cur_mean)));
  }
  return scores;
}

// Pick the single maintenance action for an over-capacity memory under the
// operation x criterion policy matrix:
//   Removal+Temporal   remove the later frame of the tightest temporal gap
//   Removal+Relevance  remove the frame least relevant to instruction+current
//   Fusion+Temporal    fuse the adjacent pair with the tightest temporal gap
//   Fusion+Relevance   fuse the pair with the highest fusion probability
// Ties always resolve to the smallest index.
inline MaintenanceAction select_maintenance_target(
    const MemoryState& mem, const TokenMatrix& instruction,
    const TokenMatrix& current, const MaintenancePolicy& policy) {
  if (mem.frames.size() <= mem.m_max) {
    throw ConfigError("maintenance not required");
  }
  if (mem.frames.size() < 2) {
    throw ConfigError("nothing to merge");
  }
  using Kind = MaintenanceAction::Kind;
  if (policy.criterion == MaintenanceCriterion::kTemporal) {
    const auto gaps = detail::temporal_gaps(mem);
    const std::size_t idx_min = detail::argmin_first(gaps);
    if (policy.operation == MaintenanceOperation::kRemoval) {
      return {Kind::kRemoveFrame, idx_min + 1};
    }
    return {Kind::kFusePair, idx_min};
  }
  if (policy.operation == MaintenanceOperation::kRemoval) {
    const auto scores = removal_relevance_scores(mem, instruction, current);
    return {Kind::kRemoveFrame, detail::argmax_first(scores)};
  }
  return {Kind::kFusePair,
          find_merge_pair(mem, instruction, current, policy.weights)};
}

inline void apply_maintenance(MemoryState& mem, const MaintenanceAction& action,
                              std::size_t budget_k) {
  if (action.kind == MaintenanceAction::Kind::kRemoveFrame) {
    remove_frame(mem, action.index);
  } else {
    merge_pair(mem, action.index, budget_k);
  }
}

}  // namespace samem
