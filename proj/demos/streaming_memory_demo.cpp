// Minimal end-to-end walkthrough: stream a synthetic episode through the
// memory and watch capacity enforcement and retention at work.

#include <cstdio>

#include "samem/samem.hpp"

int main() {
  const samem::EpisodeTrace trace =
      samem::generate_synthetic(/*seed=*/7, /*n_frames=*/24,
                                /*tokens_per_frame=*/16, /*dim=*/32,
                                /*drift=*/0.35, /*planted_relevant_fraction=*/0.25);

  samem::SaMemConfig cfg;
  cfg.m_max = 4;
  cfg.budget_k = 8;

  samem::SaMem memory(cfg);
  std::printf("step  frames  tokens  maintenance\n");
  for (const auto& frame : trace.frames) {
    const samem::StepReport report = memory.step(frame, trace.instruction);
    std::size_t total = 0;
    for (std::size_t t : report.tokens_per_frame) total += t;
    std::printf("%4lld  %6zu  %6zu  %s\n",
                static_cast<long long>(report.step_index), report.frames_after,
                total,
                report.maintenance ? samem::to_string(*report.maintenance).c_str()
                                   : "-");
  }

  const samem::ReplayResult result = samem::replay(trace, cfg);
  std::printf("\nretained-to-instruction mean cosine: %.5f\n",
              result.metrics.mean_instruction_cosine());
  std::printf("compression ratio vs raw history:    %.4f\n",
              result.metrics.compression_ratio);
  return 0;
}
