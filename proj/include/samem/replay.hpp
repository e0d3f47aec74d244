#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "samem/error.hpp"
#include "samem/memory.hpp"
#include "samem/oracle.hpp"
#include "samem/trace.hpp"

namespace samem {

// How much target- and observation-relevant content survives in memory:
// per-step means over every retained token of its cosine against the pooled
// instruction and against the pooled current frame, plus the final token
// count and its ratio to the raw (uncompressed, unmaintained) history.
struct RetentionMetrics {
  std::vector<double> instruction_cosine;
  std::vector<double> current_cosine;
  std::size_t total_tokens = 0;
  double compression_ratio = 1.0;

  double mean_instruction_cosine() const {
    double s = 0.0;
    for (double v : instruction_cosine) s += v;
    return instruction_cosine.empty()
               ? 0.0
               : s / static_cast<double>(instruction_cosine.size());
  }

  double mean_current_cosine() const {
    double s = 0.0;
    for (double v : current_cosine) s += v;
    return current_cosine.empty()
               ? 0.0
               : s / static_cast<double>(current_cosine.size());
  }
};

struct ReplayResult {
  std::vector<StepReport> reports;
  RetentionMetrics metrics;
};

namespace detail {

inline double mean_token_cosine(const MemoryState& mem, const TokenVector& ref) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& frame : mem.frames) {
    for (std::size_t t = 0; t < frame.size(); ++t) {
      sum += cosine(frame.token(t), ref);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

inline std::string index_set_to_string(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "}";
  return os.str();
}

// Re-derives the decisions the upcoming step will make and compares them with
// the brute-force references. Runs on a scratch copy so the real step stays
// untouched.
inline void check_step_against_oracle(const MemoryState& mem,
                                      const TokenMatrix& current,
                                      const TokenMatrix& instruction,
                                      const SaMemConfig& cfg,
                                      std::size_t step_index) {
  MemoryState scratch = mem;
  if (!scratch.frames.empty()) {
    const TokenMatrix& last = scratch.frames.back();
    if (last.size() > cfg.budget_k) {
      const auto actual = compression_selection(last, instruction, current,
                                                cfg.compression_strategy());
      const auto expected = oracle::compress_selection_ref(
          last, instruction, current, cfg.compression_strategy());
      if (actual != expected) {
        throw OracleDivergence(
            "step " + std::to_string(step_index) +
            ": compress_frame kept " + index_set_to_string(actual) +
            ", oracle expects " + index_set_to_string(expected));
      }
    }
    scratch.frames.back() = compress_frame(last, instruction, current,
                                           cfg.compression_strategy());
  }
  if (scratch.frames.size() > cfg.m_max) {
    const auto actual = select_maintenance_target(scratch, instruction, current,
                                                  cfg.maintenance_policy());
    const auto expected = oracle::select_ref(scratch, instruction, current,
                                             cfg.maintenance_policy());
    if (actual != expected) {
      throw OracleDivergence("step " + std::to_string(step_index) +
                             ": maintenance chose " + to_string(actual) +
                             ", oracle expects " + to_string(expected));
    }
  }
}

}  // namespace detail

// Feed every trace frame through one memory in order. With oracle_mode, each
// compression and maintenance decision is first cross-checked against the
// brute-force references; any divergence raises OracleDivergence naming the
// step and both answers.
inline ReplayResult replay(const EpisodeTrace& trace, const SaMemConfig& cfg,
                           bool oracle_mode = false) {
  cfg.validate();
  ReplayResult out;
  SaMem mem(cfg);
  const TokenVector instr_mean = mean_pool(trace.instruction);
  std::size_t raw_tokens = 0;
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const TokenMatrix& current = trace.frames[i];
    raw_tokens += current.size();
    if (oracle_mode) {
      detail::check_step_against_oracle(mem.state(), current,
                                        trace.instruction, cfg, i);
    }
    out.reports.push_back(mem.step(current, trace.instruction));
    mem.state().validate();
    const TokenVector cur_mean = mean_pool(current);
    out.metrics.instruction_cosine.push_back(
        detail::mean_token_cosine(mem.state(), instr_mean));
    out.metrics.current_cosine.push_back(
        detail::mean_token_cosine(mem.state(), cur_mean));
  }
  out.metrics.total_tokens = mem.state().total_tokens();
  out.metrics.compression_ratio =
      raw_tokens == 0
          ? 1.0
          : static_cast<double>(out.metrics.total_tokens) /
                static_cast<double>(raw_tokens);
  return out;
}

}  // namespace samem
