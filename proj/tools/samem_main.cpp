// samem: command-line front end for the SA-Mem library.
//
// Subcommands: generate, replay, ablate, forge, eval. Every flag has a
// default shown in --help; a config file (INI, key=value) can pre-set any
// flag and explicit command-line flags win.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "samem/samem.hpp"
#include "samem/http_annotator.hpp"

namespace {

struct SamemFlags {
  std::size_t m_max = 8;
  std::size_t budget_k = samem::kDefaultTokenBudget;
  std::string op = "fuse";
  std::string criterion = "relevance";
  std::string compression = "inst+cur";
  double w_txt = 0.3;
  double w_adj = 0.4;
  double w_cur = 0.3;
};

void add_samem_flags(CLI::App* cmd, SamemFlags& flags) {
  cmd->add_option("--m-max", flags.m_max, "Maximum historical frames")
      ->capture_default_str();
  cmd->add_option("--k", flags.budget_k, "Per-frame token budget K")
      ->capture_default_str();
  cmd->add_option("--op", flags.op, "Maintenance operation")
      ->check(CLI::IsMember({"remove", "fuse"}))
      ->capture_default_str();
  cmd->add_option("--criterion", flags.criterion, "Maintenance criterion")
      ->check(CLI::IsMember({"temporal", "relevance"}))
      ->capture_default_str();
  cmd->add_option("--compression", flags.compression,
                  "Frame compression scoring")
      ->check(CLI::IsMember({"inst+cur", "inst"}))
      ->capture_default_str();
  cmd->add_option("--w-txt", flags.w_txt, "Instruction-dissimilarity weight")
      ->capture_default_str();
  cmd->add_option("--w-adj", flags.w_adj, "Adjacency-similarity weight")
      ->capture_default_str();
  cmd->add_option("--w-cur", flags.w_cur, "Current-dissimilarity weight")
      ->capture_default_str();
}

samem::SaMemConfig to_config(const SamemFlags& flags) {
  samem::SaMemConfig cfg;
  cfg.m_max = flags.m_max;
  cfg.budget_k = flags.budget_k;
  cfg.compression = flags.compression == "inst"
                        ? samem::CompressionVariant::kInstructionOnly
                        : samem::CompressionVariant::kInstructionPlusCurrent;
  cfg.operation = flags.op == "remove" ? samem::MaintenanceOperation::kRemoval
                                       : samem::MaintenanceOperation::kFusion;
  cfg.criterion = flags.criterion == "temporal"
                      ? samem::MaintenanceCriterion::kTemporal
                      : samem::MaintenanceCriterion::kRelevance;
  cfg.weights = {flags.w_txt, flags.w_adj, flags.w_cur};
  cfg.validate();
  return cfg;
}

nlohmann::json report_to_json(const samem::StepReport& report,
                              double instr_cos, double cur_cos) {
  nlohmann::json j;
  j["step"] = report.step_index;
  j["frames_after"] = report.frames_after;
  j["tokens_per_frame"] = report.tokens_per_frame;
  j["compression_applied"] = report.compression_applied;
  if (report.maintenance) {
    j["maintenance"] = {
        {"kind", report.maintenance->kind ==
                         samem::MaintenanceAction::Kind::kFusePair
                     ? "fuse"
                     : "remove"},
        {"index", report.maintenance->index}};
  } else {
    j["maintenance"] = nullptr;
  }
  j["instruction_cosine"] = instr_cos;
  j["current_cosine"] = cur_cos;
  return j;
}

int cmd_generate(std::uint64_t seed, std::size_t frames, std::size_t tokens,
                 std::size_t dim, double drift, double fraction,
                 const std::string& out) {
  const samem::EpisodeTrace trace =
      samem::generate_synthetic(seed, frames, tokens, dim, drift, fraction);
  samem::write_trace(trace, out);
  std::printf("wrote %s: %zu frames x %zu tokens, dim %zu, seed %llu\n",
              out.c_str(), frames, tokens, dim,
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_replay(const std::string& trace_path, const SamemFlags& flags,
               bool oracle, const std::string& metrics_out,
               const std::string& csv_out) {
  const samem::EpisodeTrace trace = samem::read_trace(trace_path);
  const samem::SaMemConfig cfg = to_config(flags);
  const samem::ReplayResult result = samem::replay(trace, cfg, oracle);

  if (!metrics_out.empty()) {
    std::ofstream out(metrics_out, std::ios::trunc);
    if (!out) throw samem::Error("cannot open " + metrics_out);
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
      out << report_to_json(result.reports[i],
                            result.metrics.instruction_cosine[i],
                            result.metrics.current_cosine[i])
                 .dump()
          << '\n';
    }
    nlohmann::json summary;
    summary["summary"] = {
        {"total_tokens", result.metrics.total_tokens},
        {"compression_ratio", result.metrics.compression_ratio},
        {"mean_instruction_cosine", result.metrics.mean_instruction_cosine()},
        {"mean_current_cosine", result.metrics.mean_current_cosine()}};
    out << summary.dump() << '\n';
  }
  if (!csv_out.empty()) {
    std::ofstream out(csv_out, std::ios::trunc);
    if (!out) throw samem::Error("cannot open " + csv_out);
    out << "step,frames,total_tokens,instruction_cosine,current_cosine\n";
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
      std::size_t total = 0;
      for (std::size_t t : result.reports[i].tokens_per_frame) total += t;
      out << result.reports[i].step_index << ','
          << result.reports[i].frames_after << ',' << total << ','
          << result.metrics.instruction_cosine[i] << ','
          << result.metrics.current_cosine[i] << '\n';
    }
  }

  std::printf("replayed %zu frames: final memory %zu frames / %zu tokens\n",
              trace.frames.size(),
              result.reports.empty() ? 0 : result.reports.back().frames_after,
              result.metrics.total_tokens);
  std::printf("mean instruction cosine %.6f, mean current cosine %.6f, "
              "compression ratio %.4f\n",
              result.metrics.mean_instruction_cosine(),
              result.metrics.mean_current_cosine(),
              result.metrics.compression_ratio);
  if (oracle) std::printf("oracle checks: all decisions matched\n");
  return 0;
}

int cmd_ablate(const std::vector<std::string>& trace_paths,
               const SamemFlags& flags, bool long_format,
               const std::string& json_out) {
  std::vector<samem::EpisodeTrace> traces;
  traces.reserve(trace_paths.size());
  for (const auto& path : trace_paths) {
    traces.push_back(samem::read_trace(path));
  }
  const samem::FusionWeights weights{flags.w_txt, flags.w_adj, flags.w_cur};
  const samem::AblationMatrix matrix =
      samem::run_ablation(traces, flags.m_max, flags.budget_k, weights);

  if (!json_out.empty()) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : matrix.cells) {
      cells.push_back({{"operation", samem::to_string(c.operation)},
                       {"criterion", samem::to_string(c.criterion)},
                       {"compression", samem::to_string(c.compression)},
                       {"mean_instruction_cosine", c.mean_instruction_cosine},
                       {"mean_current_cosine", c.mean_current_cosine},
                       {"mean_compression_ratio", c.mean_compression_ratio}});
    }
    std::ofstream out(json_out, std::ios::trunc);
    if (!out) throw samem::Error("cannot open " + json_out);
    out << cells.dump(2) << '\n';
  }

  if (long_format) {
    for (const auto& c : matrix.cells) {
      std::printf("%-8s %-10s %-9s instr=%.5f cur=%.5f ratio=%.3f\n",
                  samem::to_string(c.operation), samem::to_string(c.criterion),
                  samem::to_string(c.compression), c.mean_instruction_cosine,
                  c.mean_current_cosine, c.mean_compression_ratio);
    }
  } else {
    std::fputs(samem::format_ablation_table(matrix).c_str(), stdout);
  }
  return 0;
}

int cmd_forge(const std::string& trajectories_path, std::uint64_t seed,
              const std::string& annotator_kind,
              const samem::cot::HttpAnnotatorConfig& http_cfg,
              std::size_t concurrency, bool extended_hedging,
              const std::vector<std::string>& extra_terms,
              const std::string& out) {
  const auto trajectories = samem::cot::read_trajectories(trajectories_path);
  if (trajectories.empty()) {
    throw samem::Error("no trajectories in " + trajectories_path);
  }

  // One sub-seed per trajectory, all derived from --seed.
  samem::SplitMix64 seeder(seed);
  std::vector<samem::cot::CoTSample> samples;
  std::size_t skipped_short = 0;
  for (const auto& traj : trajectories) {
    const std::uint64_t sub_seed = seeder.next();
    try {
      samples.push_back(samem::cot::sample_keyframe(traj, sub_seed));
    } catch (const samem::ConfigError&) {
      ++skipped_short;
    }
  }

  samem::cot::AnnotationReport annotation;
  if (annotator_kind == "http") {
    const samem::cot::HttpAnnotator annotator(http_cfg);
    annotation = samem::cot::annotate_all(samples, annotator, concurrency);
  } else {
    annotation = samem::cot::annotate_all(samples, samem::cot::TemplateAnnotator{},
                                          concurrency);
  }
  for (const auto& failure : annotation.failures) {
    std::fprintf(stderr, "annotation failed for sample %zu: %s\n",
                 failure.index, failure.message.c_str());
  }
  // Unannotated samples cannot be curated or written.
  std::vector<samem::cot::CoTSample> annotated;
  for (auto& s : samples) {
    if (!s.cot.empty()) annotated.push_back(std::move(s));
  }

  samem::cot::CurationConfig curation_cfg;
  curation_cfg.extended_terms = extended_hedging;
  curation_cfg.extra_terms = extra_terms;
  const samem::cot::CurationReport report =
      samem::cot::curate(std::move(annotated), curation_cfg);

  samem::cot::write_dataset(report.kept, out);
  std::printf("trajectories: %zu (skipped %zu too short)\n",
              trajectories.size(), skipped_short);
  std::printf("annotated: %zu, failed: %zu\n", annotation.annotated,
              annotation.failures.size());
  std::printf("curation: kept %zu, discarded %zu\n", report.kept.size(),
              report.discarded.size());
  for (const auto& d : report.discarded) {
    std::printf("  discarded (term \"%s\"): %.60s\n", d.term.c_str(),
                d.sample.cot.perception.c_str());
  }
  std::printf("wrote %s\n", out.c_str());
  return annotation.failures.empty() ? 0 : 1;
}

int cmd_eval(const std::string& records_path,
             const samem::nav::ActionKinematics& kin, bool require_stop) {
  const auto records = samem::nav::read_episode_records(records_path);
  if (records.empty()) throw samem::Error("no episodes in " + records_path);
  std::vector<samem::nav::JudgedEpisode> judged;
  judged.reserve(records.size());
  for (const auto& rec : records) {
    judged.push_back(samem::nav::judge_episode(rec, kin, require_stop));
  }
  const samem::nav::NavMetrics metrics = samem::nav::compute_sr_spl(judged);
  std::printf("episodes: %zu\n", records.size());
  std::printf("SR:  %.4f\n", metrics.sr);
  std::printf("SPL: %.4f\n", metrics.spl);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      std::string("samem - similarity-aware memory toolkit\n") +
      "trace format version " + std::to_string(samem::kTraceFormatVersion) +
      ", dataset/records schema version " +
      std::to_string(samem::kDatasetFormatVersion) + "\n"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI file (flags win)");

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Write a deterministic synthetic episode trace");
  std::uint64_t seed = 0;
  std::size_t frames = 32, tokens = 24, dim = 32;
  double drift = 0.3, fraction = 0.25;
  std::string out_path;
  generate->add_option("--seed", seed, "PRNG seed")->capture_default_str();
  generate->add_option("--frames", frames, "Frame count")->capture_default_str();
  generate->add_option("--tokens", tokens, "Tokens per frame")
      ->capture_default_str();
  generate->add_option("--dim", dim, "Embedding dimension")
      ->capture_default_str();
  generate->add_option("--drift", drift, "Random-walk step scale in [0,1]")
      ->capture_default_str();
  generate
      ->add_option("--relevant-fraction", fraction,
                   "Fraction of tokens planted near the instruction")
      ->capture_default_str();
  generate->add_option("--out", out_path, "Output trace path")->required();

  // replay
  auto* replay_cmd = app.add_subcommand(
      "replay", "Replay a trace through the memory and report retention");
  std::string replay_trace;
  SamemFlags replay_flags;
  bool oracle = false;
  std::string metrics_out, csv_out;
  replay_cmd->add_option("trace", replay_trace, "Input trace file")->required();
  add_samem_flags(replay_cmd, replay_flags);
  replay_cmd->add_flag("--oracle", oracle,
                       "Cross-check every decision against brute force");
  replay_cmd->add_option("--metrics-out", metrics_out,
                         "Write per-step reports + summary as JSONL");
  replay_cmd->add_option("--csv", csv_out, "Write per-step metrics as CSV");

  // ablate
  auto* ablate = app.add_subcommand(
      "ablate",
      "Run the 4 maintenance policies x 2 compression strategies grid");
  std::vector<std::string> ablate_traces;
  SamemFlags ablate_flags;
  bool matrix_format = true;
  std::string ablate_json;
  ablate->add_option("traces", ablate_traces, "Input trace files")
      ->required()
      ->expected(-1);
  add_samem_flags(ablate, ablate_flags);
  ablate->add_flag("--matrix,!--long", matrix_format,
                   "Table layout (--long for one line per cell)");
  ablate->add_option("--json", ablate_json, "Also write cells as JSON");

  // forge
  auto* forge = app.add_subcommand(
      "forge", "Cut, annotate and curate training samples from trajectories");
  std::string trajectories_path, forge_out = "dataset.jsonl";
  std::uint64_t forge_seed = 0;
  std::string annotator_kind = "template";
  samem::cot::HttpAnnotatorConfig http_cfg;
  std::size_t concurrency = 4;
  bool extended_hedging = false;
  std::vector<std::string> extra_terms;
  forge->add_option("trajectories", trajectories_path,
                    "Trajectory JSONL file")
      ->required();
  forge->add_option("--seed", forge_seed, "Keyframe sampling seed")
      ->capture_default_str();
  forge->add_option("--annotator", annotator_kind, "Reasoning-block source")
      ->check(CLI::IsMember({"template", "http"}))
      ->capture_default_str();
  forge->add_option("--http-host", http_cfg.host, "Annotation service host")
      ->capture_default_str();
  forge->add_option("--http-port", http_cfg.port, "Annotation service port")
      ->capture_default_str();
  forge->add_option("--http-path", http_cfg.path, "Annotation service path")
      ->capture_default_str();
  forge->add_option("--retries", http_cfg.max_retries,
                    "Retries after a failed request")
      ->capture_default_str();
  forge->add_option("--timeout-ms", http_cfg.timeout_ms, "Request timeout")
      ->capture_default_str();
  forge->add_option("--concurrency", concurrency,
                    "Parallel annotation requests")
      ->capture_default_str();
  forge->add_flag("--extended-hedging", extended_hedging,
                  "Also filter suggest/suggests/possibly/perhaps");
  forge->add_option("--hedging-term", extra_terms,
                    "Extra hedging terms (repeatable)");
  forge->add_option("--out", forge_out, "Output dataset path")
      ->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Score episode records (SR / SPL)");
  std::string records_path;
  samem::nav::ActionKinematics kin;
  bool no_require_stop = false;
  bool geodesic_success = false;
  eval->add_option("records", records_path, "Episode records JSONL")
      ->required();
  eval->add_option("--step-size", kin.step_size, "Forward step in meters")
      ->capture_default_str();
  eval->add_option("--turn-angle", kin.turn_angle, "Turn angle in degrees")
      ->capture_default_str();
  eval->add_option("--success-dist", kin.success_distance,
                   "Success distance in meters")
      ->capture_default_str();
  eval->add_flag("--no-require-stop", no_require_stop,
                 "Judge success without an explicit STOP");
  eval->add_flag("--geodesic-success", geodesic_success,
                 "Reserved: geodesic success distance (not implemented)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      return cmd_generate(seed, frames, tokens, dim, drift, fraction, out_path);
    }
    if (*replay_cmd) {
      return cmd_replay(replay_trace, replay_flags, oracle, metrics_out,
                        csv_out);
    }
    if (*ablate) {
      return cmd_ablate(ablate_traces, ablate_flags, !matrix_format,
                        ablate_json);
    }
    if (*forge) {
      return cmd_forge(trajectories_path, forge_seed, annotator_kind, http_cfg,
                       concurrency, extended_hedging, extra_terms, forge_out);
    }
    if (*eval) {
      if (geodesic_success) {
        throw samem::ConfigError(
            "--geodesic-success is reserved and not implemented");
      }
      return cmd_eval(records_path, kin, !no_require_stop);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
