#include "samem/cot_forge.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "samem/http_annotator.hpp"
#include "samem/rng.hpp"

namespace samem::cot {
namespace {

TrajectorySource make_trajectory(std::size_t n_frames, std::size_t n_actions) {
  TrajectorySource traj;
  for (std::size_t i = 0; i < n_frames; ++i) {
    traj.frames.push_back(static_cast<std::int64_t>(i));
  }
  for (std::size_t i = 0; i < n_actions; ++i) {
    traj.actions.push_back(i + 1 == n_actions ? Action::kStop
                                              : Action::kMoveForward);
  }
  traj.instruction = "Find the freezer.";
  traj.target = "freezer";
  return traj;
}

TEST(SampleKeyframe, FiveActionWindowForcesIndexZero) {
  const TrajectorySource traj = make_trajectory(6, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CoTSample sample = sample_keyframe(traj, seed);
    EXPECT_EQ(sample.current, 0);
    EXPECT_TRUE(sample.history.empty());
    ASSERT_EQ(sample.ground_truth.size(), 5u);
  }
}

TEST(SampleKeyframe, TenFramesAllowIndicesZeroToFour) {
  const TrajectorySource traj = make_trajectory(10, 9);
  std::set<std::int64_t> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const CoTSample sample = sample_keyframe(traj, seed);
    EXPECT_GE(sample.current, 0);
    EXPECT_LE(sample.current, 4);
    seen.insert(sample.current);
    // Reproducible for the same seed.
    EXPECT_EQ(sample_keyframe(traj, seed).current, sample.current);
  }
  EXPECT_EQ(seen.size(), 5u);  // every valid index is reachable
}

TEST(SampleKeyframe, TooShortTrajectoryThrows) {
  const TrajectorySource traj = make_trajectory(5, 4);
  EXPECT_THROW(sample_keyframe(traj, 0), ConfigError);
}

TEST(SampleKeyframe, NeverSelectsWindowWithoutFiveActions) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_actions = 5 + rng.next_below(12);
    const bool trailing = rng.next_below(2) == 0;
    const TrajectorySource traj =
        make_trajectory(trailing ? n_actions : n_actions + 1, n_actions);
    const CoTSample sample = sample_keyframe(traj, rng.next());
    EXPECT_LE(static_cast<std::size_t>(sample.current) + 5,
              traj.actions.size());
    EXPECT_EQ(sample.history.size(), static_cast<std::size_t>(sample.current));
    for (std::size_t i = 0; i < sample.history.size(); ++i) {
      EXPECT_LT(sample.history[i], sample.current);
    }
    sample.validate();
  }
}

TEST(TemplateAnnotator, SectionsMentionTargetAndAreDeterministic) {
  const TrajectorySource traj = make_trajectory(10, 9);
  CoTSample skeleton = sample_keyframe(traj, 3);
  const TemplateAnnotator annotator;
  const CoTSample a = annotate(skeleton, annotator);
  const CoTSample b = annotate(skeleton, annotator);
  EXPECT_EQ(a, b);
  for (const std::string* section :
       {&a.cot.perception, &a.cot.target_env, &a.cot.env_action}) {
    EXPECT_FALSE(section->empty());
    EXPECT_NE(section->find("freezer"), std::string::npos);
  }
}

TEST(TemplateAnnotator, OutputSurvivesCuration) {
  const TrajectorySource traj = make_trajectory(12, 11);
  std::vector<CoTSample> samples;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    samples.push_back(sample_keyframe(traj, seed));
  }
  annotate_all(samples, TemplateAnnotator{});
  CurationConfig strict;
  strict.extended_terms = true;
  const CurationReport report = curate(samples, strict);
  EXPECT_EQ(report.kept.size(), samples.size());
  EXPECT_TRUE(report.discarded.empty());
}

TEST(AnnotateAll, ConcurrentAnnotationPreservesOrder) {
  const TrajectorySource traj = make_trajectory(16, 15);
  std::vector<CoTSample> sequential;
  std::vector<CoTSample> concurrent;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    sequential.push_back(sample_keyframe(traj, seed));
  }
  concurrent = sequential;
  const TemplateAnnotator annotator;
  const AnnotationReport a = annotate_all(sequential, annotator, 1);
  const AnnotationReport b = annotate_all(concurrent, annotator, 8);
  EXPECT_EQ(a.annotated, 32u);
  EXPECT_EQ(b.annotated, 32u);
  EXPECT_EQ(sequential, concurrent);
}

struct CaseRow {
  CoTSample sample;
  bool keep = true;
  bool keep_extended = true;
};

std::vector<CaseRow> load_curation_cases() {
  std::ifstream in(std::string(SAMEM_FIXTURE_DIR) + "/curation_cases.jsonl");
  EXPECT_TRUE(in.good());
  std::vector<CaseRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CaseRow row;
    row.sample.instruction = "Find the target.";
    row.sample.target = "target";
    row.sample.history = {0};
    row.sample.current = 1;
    row.sample.cot.perception = j.at("perception").get<std::string>();
    row.sample.cot.target_env =
        j.value("target_env", std::string("A neutral relation line."));
    row.sample.cot.env_action =
        j.value("env_action", std::string("Walk ahead and stop."));
    row.sample.ground_truth.assign(5, Action::kMoveForward);
    row.keep = j.at("keep").get<bool>();
    row.keep_extended = j.value("keep_extended", row.keep);
    rows.push_back(row);
  }
  return rows;
}

TEST(Curate, FixtureCorpusFullyAgrees) {
  const auto rows = load_curation_cases();
  ASSERT_EQ(rows.size(), 50u);
  std::vector<CoTSample> samples;
  for (const auto& row : rows) samples.push_back(row.sample);

  const CurationReport report = curate(samples);
  std::set<std::string> discarded_perceptions;
  for (const auto& d : report.discarded) {
    discarded_perceptions.insert(d.sample.cot.perception);
  }
  for (const auto& row : rows) {
    const bool discarded =
        discarded_perceptions.count(row.sample.cot.perception) > 0;
    EXPECT_EQ(discarded, !row.keep) << "perception: "
                                    << row.sample.cot.perception;
  }
  EXPECT_EQ(report.kept.size() + report.discarded.size(), rows.size());
}

TEST(Curate, ExtendedTermListWidensTheFilter) {
  const auto rows = load_curation_cases();
  std::vector<CoTSample> samples;
  for (const auto& row : rows) samples.push_back(row.sample);
  CurationConfig cfg;
  cfg.extended_terms = true;
  const CurationReport report = curate(samples, cfg);
  std::set<std::string> discarded;
  for (const auto& d : report.discarded) {
    discarded.insert(d.sample.cot.perception);
  }
  for (const auto& row : rows) {
    EXPECT_EQ(discarded.count(row.sample.cot.perception) > 0,
              !row.keep_extended)
        << row.sample.cot.perception;
  }
}

TEST(Curate, IsIdempotent) {
  const auto rows = load_curation_cases();
  std::vector<CoTSample> samples;
  for (const auto& row : rows) samples.push_back(row.sample);
  const CurationReport first = curate(samples);
  const CurationReport second = curate(first.kept);
  EXPECT_EQ(second.kept, first.kept);
  EXPECT_TRUE(second.discarded.empty());
}

TEST(Curate, ReportsTheMatchedTerm) {
  CoTSample s;
  s.cot.perception = "The room might contain a sofa.";
  s.cot.target_env = "x";
  s.cot.env_action = "y";
  s.ground_truth.assign(5, Action::kStop);
  const CurationReport report = curate({s});
  ASSERT_EQ(report.discarded.size(), 1u);
  EXPECT_EQ(report.discarded[0].term, "might");
}

TEST(Dataset, JsonlRoundTripPreservesEverySerializedField) {
  const TrajectorySource traj = make_trajectory(12, 11);
  std::vector<CoTSample> samples;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    samples.push_back(sample_keyframe(traj, seed));
  }
  annotate_all(samples, TemplateAnnotator{});
  const auto path =
      std::filesystem::temp_directory_path() / "samem_dataset.jsonl";
  write_dataset(samples, path);
  const auto back = read_dataset(path);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(back[i].instruction, samples[i].instruction);
    EXPECT_EQ(back[i].history, samples[i].history);
    EXPECT_EQ(back[i].current, samples[i].current);
    EXPECT_EQ(back[i].cot, samples[i].cot);
    EXPECT_EQ(back[i].ground_truth, samples[i].ground_truth);
  }
  // Line order is input order.
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  EXPECT_EQ(nlohmann::json::parse(first_line).at("current").get<std::int64_t>(),
            samples[0].current);
}

TEST(Trajectories, ReadValidatesActionsAndAlignment) {
  const auto path =
      std::filesystem::temp_directory_path() / "samem_trajectories.jsonl";
  {
    std::ofstream out(path);
    out << R"({"instruction": "Find the sink.", "target": "sink", "frames": [0,1,2,3,4,5], "actions": ["MOVE_FORWARD","TURN_LEFT","MOVE_FORWARD","MOVE_FORWARD","STOP"]})"
        << "\n";
  }
  const auto trajs = read_trajectories(path);
  ASSERT_EQ(trajs.size(), 1u);
  EXPECT_EQ(trajs[0].target, "sink");
  ASSERT_EQ(trajs[0].actions.size(), 5u);
  {
    std::ofstream out(path);
    out << R"({"instruction": "x", "target": "y", "frames": [0,1,2], "actions": ["STOP"]})"
        << "\n";
  }
  EXPECT_THROW(read_trajectories(path), ConfigError);
}

class AnnotationServer {
 public:
  AnnotationServer() {
    server_.Post("/annotate", [](const httplib::Request& req,
                                 httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply;
      const std::string target = body.at("target").get<std::string>();
      reply["perception"] = "A room on the way to the " + target + ".";
      reply["target_env"] = "The " + target + " relates to visible fixtures.";
      reply["env_action"] = "Approach the " + target + " and stop.";
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/malformed",
                 [](const httplib::Request&, httplib::Response& res) {
                   res.set_content("this is not json", "text/plain");
                 });
    server_.Post("/missing",
                 [](const httplib::Request&, httplib::Response& res) {
                   res.set_content(R"({"perception": "only one"})",
                                   "application/json");
                 });
    server_.Post("/flaky", [this](const httplib::Request&,
                                  httplib::Response& res) {
      if (flaky_calls_++ < 2) {
        res.status = 500;
        return;
      }
      res.set_content(
          R"({"perception": "p", "target_env": "t", "env_action": "e"})",
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~AnnotationServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_calls_{0};
};

CoTSample http_skeleton() {
  const TrajectorySource traj = make_trajectory(8, 7);
  return sample_keyframe(traj, 1);
}

TEST(HttpAnnotator, FillsSectionsFromServiceReply) {
  AnnotationServer server;
  HttpAnnotatorConfig cfg;
  cfg.port = server.port();
  const HttpAnnotator annotator(cfg);
  const CoTSample annotated = annotate(http_skeleton(), annotator);
  EXPECT_NE(annotated.cot.perception.find("freezer"), std::string::npos);
  EXPECT_FALSE(annotated.cot.env_action.empty());
}

TEST(HttpAnnotator, MalformedReplyIsAStructuredFailure) {
  AnnotationServer server;
  HttpAnnotatorConfig cfg;
  cfg.port = server.port();
  cfg.path = "/malformed";
  EXPECT_THROW(HttpAnnotator(cfg).annotate(http_skeleton()), AnnotationError);
  cfg.path = "/missing";
  EXPECT_THROW(HttpAnnotator(cfg).annotate(http_skeleton()), AnnotationError);
}

TEST(HttpAnnotator, RetriesThenSucceeds) {
  AnnotationServer server;
  HttpAnnotatorConfig cfg;
  cfg.port = server.port();
  cfg.path = "/flaky";
  cfg.max_retries = 3;
  const CoTBlock cot = HttpAnnotator(cfg).annotate(http_skeleton());
  EXPECT_EQ(cot.perception, "p");
}

TEST(HttpAnnotator, UnreachableServiceFailsAfterRetries) {
  HttpAnnotatorConfig cfg;
  cfg.port = 1;  // nothing listens here
  cfg.max_retries = 1;
  cfg.timeout_ms = 200;
  try {
    HttpAnnotator(cfg).annotate(http_skeleton());
    FAIL() << "expected AnnotationError";
  } catch (const AnnotationError& e) {
    EXPECT_NE(std::string(e.what()).find("2 attempts"), std::string::npos);
  }
}

TEST(HttpAnnotator, FailedSamplesAreMarkedUnannotated) {
  AnnotationServer server;
  HttpAnnotatorConfig cfg;
  cfg.port = server.port();
  cfg.path = "/malformed";
  std::vector<CoTSample> samples = {http_skeleton(), http_skeleton()};
  const AnnotationReport report =
      annotate_all(samples, HttpAnnotator(cfg), 2);
  EXPECT_EQ(report.annotated, 0u);
  ASSERT_EQ(report.failures.size(), 2u);
  for (const auto& sample : samples) {
    EXPECT_TRUE(sample.cot.empty());
  }
}

}  // namespace
}  // namespace samem::cot
