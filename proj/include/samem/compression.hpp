#pragma once

#include <cstddef>
#include <vector>

#include "samem/embedding.hpp"
#include "samem/error.hpp"

namespace samem {

// Per-frame token budget used throughout: compressed historical frames and
// merged frames hold at most this many tokens.
inline constexpr std::size_t kDefaultTokenBudget = 30;

enum class CompressionVariant {
  // Score = mean of instruction relevance and current-frame relevance.
  kInstructionPlusCurrent,
  // Score = instruction relevance alone.
  kInstructionOnly,
};

struct CompressionStrategy {
  CompressionVariant variant = CompressionVariant::kInstructionPlusCurrent;
  std::size_t budget_k = kDefaultTokenBudget;
};

// Relevance score for every token of `prev`. A token's instruction relevance
// is its cosine against the mean-pooled instruction; its current relevance is
// the cosine against the mean-pooled current frame.
inline std::vector<double> score_tokens(const TokenMatrix& prev,
                                        const TokenMatrix& instruction,
                                        const TokenMatrix& current,
                                        const CompressionStrategy& strategy) {
  if (prev.empty()) throw DimensionError("score_tokens: empty frame");
  if (prev.dim() != instruction.dim() || prev.dim() != current.dim()) {
    throw DimensionError("score_tokens: dimension mismatch across inputs");
  }
  const TokenVector instr_mean = mean_pool(instruction);
  const TokenVector cur_mean = mean_pool(current);
  std::vector<double> scores;
  scores.reserve(prev.size());
  for (std::size_t j = 0; j < prev.size(); ++j) {
    const double s_inst = cosine(prev.token(j), instr_mean);
    if (strategy.variant == CompressionVariant::kInstructionOnly) {
      scores.push_back(s_inst);
    } else {
      const double s_cur = cosine(prev.token(j), cur_mean);
      scores.push_back(0.5 * (s_inst + s_cur));
    }
  }
  return scores;
}

// Indices (ascending) of the tokens compress_frame keeps.
inline std::vector<std::size_t> compression_selection(
    const TokenMatrix& prev, const TokenMatrix& instruction,
    const TokenMatrix& current, const CompressionStrategy& strategy) {
  if (strategy.budget_k == 0) throw ConfigError("budget_k must be >= 1");
  return top_k_indices(score_tokens(prev, instruction, current, strategy),
                       strategy.budget_k);
}

// Keep the budget_k highest-scoring tokens of `prev` in their original
// order. Selection only: kept tokens are bit-identical to the inputs, and a
// frame already at or below budget passes through untouched.
inline TokenMatrix compress_frame(const TokenMatrix& prev,
                                  const TokenMatrix& instruction,
                                  const TokenMatrix& current,
                                  const CompressionStrategy& strategy) {
  if (strategy.budget_k == 0) throw ConfigError("budget_k must be >= 1");
  if (prev.empty()) throw DimensionError("compress_frame: empty frame");
  if (prev.size() <= strategy.budget_k) {
    // Still validate dimensions so misuse fails loudly.
    if (prev.dim() != instruction.dim() || prev.dim() != current.dim()) {
      throw DimensionError("compress_frame: dimension mismatch across inputs");
    }
    return prev;
  }
  const auto keep = compression_selection(prev, instruction, current, strategy);
  TokenMatrix out(prev.dim());
  for (std::size_t j : keep) out.push_token(prev.token(j));
  return out;
}

}  // namespace samem
