#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "samem/replay.hpp"

namespace samem {

// One cell of the maintenance x compression grid, aggregated over a trace set
// (plain means over traces of the per-trace step means).
struct AblationCell {
  MaintenanceOperation operation;
  MaintenanceCriterion criterion;
  CompressionVariant compression;
  double mean_instruction_cosine = 0.0;
  double mean_current_cosine = 0.0;
  double mean_compression_ratio = 0.0;
};

struct AblationMatrix {
  std::vector<AblationCell> cells;  // 4 policies x 2 compression variants

  const AblationCell& cell(MaintenanceOperation op, MaintenanceCriterion crit,
                           CompressionVariant comp) const {
    for (const auto& c : cells) {
      if (c.operation == op && c.criterion == crit && c.compression == comp) {
        return c;
      }
    }
    throw ConfigError("ablation cell missing");
  }
};

inline const char* to_string(MaintenanceOperation op) {
  return op == MaintenanceOperation::kRemoval ? "removal" : "fusion";
}

inline const char* to_string(MaintenanceCriterion crit) {
  return crit == MaintenanceCriterion::kTemporal ? "temporal" : "relevance";
}

inline const char* to_string(CompressionVariant v) {
  return v == CompressionVariant::kInstructionPlusCurrent ? "inst+cur"
                                                          : "inst";
}

// Replays every trace under all four maintenance policies and both
// compression variants.
inline AblationMatrix run_ablation(const std::vector<EpisodeTrace>& traces,
                                   std::size_t m_max, std::size_t budget_k,
                                   const FusionWeights& weights = {}) {
  if (traces.empty()) throw ConfigError("ablation needs >= 1 trace");
  static constexpr MaintenanceOperation kOps[] = {
      MaintenanceOperation::kRemoval, MaintenanceOperation::kFusion};
  static constexpr MaintenanceCriterion kCrits[] = {
      MaintenanceCriterion::kTemporal, MaintenanceCriterion::kRelevance};
  static constexpr CompressionVariant kComps[] = {
      CompressionVariant::kInstructionPlusCurrent,
      CompressionVariant::kInstructionOnly};

  AblationMatrix matrix;
  for (auto op : kOps) {
    for (auto crit : kCrits) {
      for (auto comp : kComps) {
        SaMemConfig cfg;
        cfg.m_max = m_max;
        cfg.budget_k = budget_k;
        cfg.compression = comp;
        cfg.operation = op;
        cfg.criterion = crit;
        cfg.weights = weights;

        AblationCell cell{op, crit, comp};
        for (const auto& trace : traces) {
          const ReplayResult r = replay(trace, cfg);
          cell.mean_instruction_cosine += r.metrics.mean_instruction_cosine();
          cell.mean_current_cosine += r.metrics.mean_current_cosine();
          cell.mean_compression_ratio += r.metrics.compression_ratio;
        }
        const double n = static_cast<double>(traces.size());
        cell.mean_instruction_cosine /= n;
        cell.mean_current_cosine /= n;
        cell.mean_compression_ratio /= n;
        matrix.cells.push_back(cell);
      }
    }
  }
  return matrix;
}

// Fixed-width text table: one row per maintenance policy, one column group
// per compression variant.
inline std::string format_ablation_table(const AblationMatrix& m) {
  auto cell_text = [&](MaintenanceOperation op, MaintenanceCriterion crit,
                       CompressionVariant comp) {
    const AblationCell& c = m.cell(op, crit, comp);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%8.5f %8.5f %6.3f",
                  c.mean_instruction_cosine, c.mean_current_cosine,
                  c.mean_compression_ratio);
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t width) {
    s.resize(width, ' ');
    return s;
  };
  std::string out;
  out += pad("policy", 21) + " | " + pad("inst+cur", 24) + " | " +
         pad("inst", 24) + "\n";
  const std::string columns = "   instr      cur  ratio";
  out += pad("", 21) + " | " + columns + " | " + columns + "\n";
  out += std::string(21, '-') + "-+-" + std::string(24, '-') + "-+-" +
         std::string(24, '-') + "\n";
  for (auto op : {MaintenanceOperation::kRemoval, MaintenanceOperation::kFusion}) {
    for (auto crit :
         {MaintenanceCriterion::kTemporal, MaintenanceCriterion::kRelevance}) {
      char head[64];
      std::snprintf(head, sizeof(head), "%-8s + %-10s", to_string(op),
                    to_string(crit));
      out += std::string(head) + " | " +
             cell_text(op, crit, CompressionVariant::kInstructionPlusCurrent) +
             " | " +
             cell_text(op, crit, CompressionVariant::kInstructionOnly) + "\n";
    }
  }
  return out;
}

}  // namespace samem
