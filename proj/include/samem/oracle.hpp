#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "samem/compression.hpp"
#include "samem/maintenance.hpp"

// Brute-force reference implementations, deliberately written as direct
// nested-loop transcriptions of the scoring rules and kept independent of the
// library code paths they cross-check. replay() in oracle mode compares every
// compression and maintenance decision against these.
namespace samem::oracle {

inline double cosine_ref(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline TokenVector mean_ref(const TokenMatrix& m) {
  TokenVector out(m.dim(), 0.0);
  for (std::size_t t = 0; t < m.size(); ++t) {
    for (std::size_t d = 0; d < m.dim(); ++d) out[d] += m.token(t)[d];
  }
  for (double& v : out) v /= static_cast<double>(m.size());
  return out;
}

// Index set a compressing pass must keep: per-token relevance scores ranked
// highest-first with lowest-index tie-breaking, reported ascending.
inline std::vector<std::size_t> compress_selection_ref(
    const TokenMatrix& prev, const TokenMatrix& instruction,
    const TokenMatrix& current, const CompressionStrategy& strategy) {
  const TokenVector t_bar = mean_ref(instruction);
  const TokenVector c_bar = mean_ref(current);
  std::vector<double> scores(prev.size());
  for (std::size_t j = 0; j < prev.size(); ++j) {
    const double s_inst = cosine_ref(prev.token(j), t_bar);
    scores[j] = strategy.variant == CompressionVariant::kInstructionOnly
                    ? s_inst
                    : 0.5 * (s_inst + cosine_ref(prev.token(j), c_bar));
  }
  const std::size_t k = std::min(strategy.budget_k, prev.size());
  std::vector<bool> taken(prev.size(), false);
  for (std::size_t round = 0; round < k; ++round) {
    std::size_t best = prev.size();
    for (std::size_t j = 0; j < prev.size(); ++j) {
      if (taken[j]) continue;
      if (best == prev.size() || scores[j] > scores[best]) best = j;
    }
    taken[best] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < prev.size(); ++j) {
    if (taken[j]) out.push_back(j);
  }
  return out;
}

// Adjacent-pair scan of the fusion probability. Scores within `tol` of the
// running maximum count as ties and keep the earlier pair.
inline std::size_t merge_pair_ref(const MemoryState& mem,
                                  const TokenMatrix& instruction,
                                  const TokenMatrix& current,
                                  const FusionWeights& w, double tol = 0.0) {
  const TokenVector t_bar = mean_ref(instruction);
  const TokenVector c_bar = mean_ref(current);
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i + 1 < mem.frames.size(); ++i) {
    const TokenVector a = mean_ref(mem.frames[i]);
    const TokenVector b = mean_ref(mem.frames[i + 1]);
    double p = 0.0;
    if (w.w_adj > 0.0) p += w.w_adj * cosine_ref(a, b);
    if (w.w_txt > 0.0) {
      p += w.w_txt * (1.0 - (cosine_ref(a, t_bar) + cosine_ref(b, t_bar)) / 2.0);
    }
    if (w.w_cur > 0.0) {
      p += w.w_cur * (1.0 - (cosine_ref(a, c_bar) + cosine_ref(b, c_bar)) / 2.0);
    }
    if (i == 0 || p > best_score + tol) {
      best = i;
      best_score = p;
    }
  }
  return best;
}

// Gap scan over source indices; the removal target is the later frame of the
// tightest gap.
inline std::size_t temporal_removal_ref(const MemoryState& mem) {
  std::size_t idx_min = 0;
  std::int64_t min_gap = 0;
  for (std::size_t i = 0; i + 1 < mem.frames.size(); ++i) {
    const std::int64_t gap =
        mem.source_indices[i + 1].front() - mem.source_indices[i].back();
    if (i == 0 || gap < min_gap) {
      idx_min = i;
      min_gap = gap;
    }
  }
  return idx_min + 1;
}

inline std::size_t temporal_fusion_ref(const MemoryState& mem) {
  return temporal_removal_ref(mem) - 1;
}

inline std::size_t relevance_removal_ref(const MemoryState& mem,
                                         const TokenMatrix& instruction,
                                         const TokenMatrix& current) {
  const TokenVector t_bar = mean_ref(instruction);
  const TokenVector c_bar = mean_ref(current);
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t j = 0; j < mem.frames.size(); ++j) {
    const TokenVector m = mean_ref(mem.frames[j]);
    const double p = 0.5 * (1.0 - cosine_ref(m, t_bar)) +
                     0.5 * (1.0 - cosine_ref(m, c_bar));
    if (j == 0 || p > best_score) {
      best = j;
      best_score = p;
    }
  }
  return best;
}

inline MaintenanceAction select_ref(const MemoryState& mem,
                                    const TokenMatrix& instruction,
                                    const TokenMatrix& current,
                                    const MaintenancePolicy& policy) {
  using Kind = MaintenanceAction::Kind;
  if (policy.criterion == MaintenanceCriterion::kTemporal) {
    if (policy.operation == MaintenanceOperation::kRemoval) {
      return {Kind::kRemoveFrame, temporal_removal_ref(mem)};
    }
    return {Kind::kFusePair, temporal_fusion_ref(mem)};
  }
  if (policy.operation == MaintenanceOperation::kRemoval) {
    return {Kind::kRemoveFrame, relevance_removal_ref(mem, instruction, current)};
  }
  return {Kind::kFusePair,
          merge_pair_ref(mem, instruction, current, policy.weights)};
}

}  // namespace samem::oracle
