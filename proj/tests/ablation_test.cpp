#include "samem/ablation.hpp"

#include <set>
#include <string>

#include <gtest/gtest.h>

namespace samem {
namespace {

std::vector<EpisodeTrace> small_trace_set() {
  std::vector<EpisodeTrace> traces;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    traces.push_back(generate_synthetic(seed, 16, 8, 8, 0.3, 0.25));
  }
  return traces;
}

TEST(Ablation, ProducesFourByTwoMatrix) {
  const AblationMatrix m = run_ablation(small_trace_set(), 3, 4);
  EXPECT_EQ(m.cells.size(), 8u);
  std::set<std::tuple<int, int, int>> combos;
  for (const auto& c : m.cells) {
    combos.insert({static_cast<int>(c.operation), static_cast<int>(c.criterion),
                   static_cast<int>(c.compression)});
  }
  EXPECT_EQ(combos.size(), 8u);
}

TEST(Ablation, CellsHoldValidAggregates) {
  const AblationMatrix m = run_ablation(small_trace_set(), 3, 4);
  for (const auto& c : m.cells) {
    EXPECT_GE(c.mean_instruction_cosine, -1.0);
    EXPECT_LE(c.mean_instruction_cosine, 1.0);
    EXPECT_GT(c.mean_compression_ratio, 0.0);
    EXPECT_LE(c.mean_compression_ratio, 1.0);
  }
}

TEST(Ablation, TableListsEveryPolicyRow) {
  const std::string table = format_ablation_table(run_ablation(
      small_trace_set(), 3, 4));
  EXPECT_NE(table.find("removal  + temporal"), std::string::npos);
  EXPECT_NE(table.find("removal  + relevance"), std::string::npos);
  EXPECT_NE(table.find("fusion   + temporal"), std::string::npos);
  EXPECT_NE(table.find("fusion   + relevance"), std::string::npos);
  EXPECT_NE(table.find("inst+cur"), std::string::npos);
}

TEST(Ablation, EmptyTraceSetRejected) {
  EXPECT_THROW(run_ablation({}, 3, 4), ConfigError);
}

TEST(Ablation, CellLookupThrowsOnMissing) {
  AblationMatrix empty;
  EXPECT_THROW(empty.cell(MaintenanceOperation::kFusion,
                          MaintenanceCriterion::kRelevance,
                          CompressionVariant::kInstructionOnly),
               ConfigError);
}

}  // namespace
}  // namespace samem
