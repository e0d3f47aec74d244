#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "samem/compression.hpp"
#include "samem/error.hpp"
#include "samem/maintenance.hpp"

namespace samem {

// Single source of truth for every knob of one memory: capacity, the shared
// token budget K, the compression variant and the maintenance policy. Holding
// one budget_k here keeps compression and fusion consistent by construction.
struct SaMemConfig {
  std::size_t m_max = 8;
  std::size_t budget_k = kDefaultTokenBudget;
  CompressionVariant compression = CompressionVariant::kInstructionPlusCurrent;
  MaintenanceOperation operation = MaintenanceOperation::kFusion;
  MaintenanceCriterion criterion = MaintenanceCriterion::kRelevance;
  FusionWeights weights{};

  CompressionStrategy compression_strategy() const {
    return {compression, budget_k};
  }

  MaintenancePolicy maintenance_policy() const {
    return {operation, criterion, weights, budget_k};
  }

  void validate() const {
    if (m_max == 0) throw ConfigError("m_max must be >= 1");
    if (budget_k == 0) throw ConfigError("budget_k must be >= 1");
    weights.validate();
  }
};

// What one step did: the token-count manifest of the resulting memory plus
// the maintenance action taken, if any.
struct StepReport {
  std::int64_t step_index = 0;
  std::size_t frames_after = 0;
  std::vector<std::size_t> tokens_per_frame;
  std::optional<MaintenanceAction> maintenance;
  bool compression_applied = false;
};

// One memory step, in fixed order:
//   1. compress the previous current frame (now the newest historical frame)
//   2. if over capacity, apply exactly one maintenance action
//   3. append the incoming frame uncompressed, stamped with step_index
// The appended frame is never touched in the step that adds it.
inline StepReport step(MemoryState& mem, const TokenMatrix& current,
                       const TokenMatrix& instruction, const SaMemConfig& cfg,
                       std::int64_t step_index) {
  cfg.validate();
  if (current.empty()) throw DimensionError("step: empty current frame");
  if (instruction.empty()) throw DimensionError("step: empty instruction");
  if (!mem.frames.empty() && mem.frames.front().dim() != current.dim()) {
    throw DimensionError("step: current frame dimension does not match memory");
  }
  if (current.dim() != instruction.dim()) {
    throw DimensionError("step: instruction dimension does not match frames");
  }
  if (!mem.frames.empty() && cfg.m_max < mem.m_max) {
    throw ConfigError("step: m_max may not shrink on a live memory");
  }
  mem.m_max = cfg.m_max;

  StepReport report;
  report.step_index = step_index;

  if (!mem.frames.empty()) {
    TokenMatrix& last = mem.frames.back();
    const std::size_t before = last.size();
    last = compress_frame(last, instruction, current,
                          cfg.compression_strategy());
    report.compression_applied = last.size() < before;
  }

  if (mem.frames.size() > cfg.m_max) {
    const MaintenanceAction action = select_maintenance_target(
        mem, instruction, current, cfg.maintenance_policy());
    apply_maintenance(mem, action, cfg.budget_k);
    report.maintenance = action;
  }

  mem.frames.push_back(current);
  mem.source_indices.push_back({step_index});

  report.frames_after = mem.frames.size();
  report.tokens_per_frame.reserve(mem.frames.size());
  for (const auto& f : mem.frames) report.tokens_per_frame.push_back(f.size());
  return report;
}

// Stateful wrapper owning one memory and the global step counter that stamps
// source indices (0, 1, 2, ... one per observation).
class SaMem {
 public:
  explicit SaMem(SaMemConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.m_max = cfg_.m_max;
  }

  StepReport step(const TokenMatrix& current, const TokenMatrix& instruction) {
    return samem::step(state_, current, instruction, cfg_, next_step_++);
  }

  const MemoryState& state() const noexcept { return state_; }
  const SaMemConfig& config() const noexcept { return cfg_; }
  std::int64_t steps_taken() const noexcept { return next_step_; }

 private:
  MemoryState state_;
  SaMemConfig cfg_;
  std::int64_t next_step_ = 0;
};

}  // namespace samem
