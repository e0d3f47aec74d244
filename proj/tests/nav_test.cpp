#include "samem/nav.hpp"

#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "samem/rng.hpp"

namespace samem::nav {
namespace {

constexpr double kTol = 1e-9;

TEST(ApplyAction, MoveForwardAlongHeadingZero) {
  const AgentPose pose = apply_action({0, 0, 0}, Action::kMoveForward, {});
  EXPECT_EQ(pose.x, 0.25);
  EXPECT_EQ(pose.y, 0.0);
  EXPECT_EQ(pose.heading, 0.0);
}

TEST(ApplyAction, TurnLeftAddsTurnAngle) {
  const AgentPose pose = apply_action({0, 0, 0}, Action::kTurnLeft, {});
  EXPECT_EQ(pose.heading, 30.0);
}

TEST(ApplyAction, StopIsIdentity) {
  const AgentPose pose = apply_action({1, 2, 90}, Action::kStop, {});
  EXPECT_EQ(pose, (AgentPose{1, 2, 90}));
}

TEST(ApplyAction, TwelveLeftTurnsCloseTheCircle) {
  AgentPose pose{0, 0, 0};
  for (int i = 0; i < 12; ++i) pose = apply_action(pose, Action::kTurnLeft, {});
  EXPECT_NEAR(pose.heading, 0.0, kTol);
}

TEST(ApplyAction, TurnsAreReversible) {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    AgentPose pose{rng.next_symmetric() * 5, rng.next_symmetric() * 5,
                   rng.next_unit() * 360.0};
    AgentPose back = apply_action(apply_action(pose, Action::kTurnLeft, {}),
                                  Action::kTurnRight, {});
    EXPECT_NEAR(back.heading, normalize_heading(pose.heading), 1e-9);
    EXPECT_EQ(back.x, pose.x);
    EXPECT_EQ(back.y, pose.y);
  }
}

TEST(ApplyAction, HeadingStaysNormalized) {
  AgentPose pose{0, 0, 350};
  pose = apply_action(pose, Action::kTurnLeft, {});
  EXPECT_EQ(pose.heading, 20.0);
  pose = apply_action({0, 0, 10}, Action::kTurnRight, {});
  EXPECT_EQ(pose.heading, 340.0);
}

TEST(JudgeEpisode, SuccessWithinOneMeter) {
  EpisodeRecord rec;
  rec.actions = {Action::kMoveForward, Action::kMoveForward, Action::kStop};
  rec.start = {0, 0, 0};
  rec.targets = {{1.0, 0.0}};
  rec.geodesic = 0.5;
  const JudgedEpisode judged = judge_episode(rec, {});
  EXPECT_TRUE(judged.success);  // stops at (0.5, 0), distance 0.5
  EXPECT_EQ(judged.path_length, 0.5);
}

TEST(JudgeEpisode, TruncatedEpisodeFailsEvenWhenClose) {
  EpisodeRecord rec;
  rec.actions = {Action::kMoveForward};  // no STOP: truncated
  rec.start = {0.9, 0, 90};
  rec.targets = {{0.9, 0.25}};
  rec.geodesic = 0.25;
  EXPECT_FALSE(judge_episode(rec, {}).success);
  EXPECT_TRUE(judge_episode(rec, {}, /*require_stop=*/false).success);
}

TEST(JudgeEpisode, NearestOfSeveralTargetsCounts) {
  EpisodeRecord rec;
  rec.actions = {Action::kStop};
  rec.start = {0, 0, 0};
  rec.targets = {{50.0, 50.0}, {0.4, 0.3}};
  rec.geodesic = 1.0;
  EXPECT_TRUE(judge_episode(rec, {}).success);
}

TEST(JudgeEpisode, ActionsAfterStopAreIgnored) {
  EpisodeRecord rec;
  rec.actions = {Action::kStop, Action::kMoveForward, Action::kMoveForward};
  rec.start = {0, 0, 0};
  rec.targets = {{0.0, 0.0}};
  rec.geodesic = 1.0;
  const JudgedEpisode judged = judge_episode(rec, {});
  EXPECT_TRUE(judged.success);
  EXPECT_EQ(judged.path_length, 0.0);
}

TEST(JudgeEpisode, PathLengthCountsForwardStepsOnly) {
  EpisodeRecord rec;
  rec.actions = {Action::kMoveForward, Action::kTurnLeft, Action::kTurnLeft,
                 Action::kMoveForward, Action::kTurnRight, Action::kStop};
  rec.start = {0, 0, 0};
  rec.targets = {{0, 0}};
  rec.geodesic = 0.5;
  EXPECT_EQ(judge_episode(rec, {}).path_length, 0.5);
}

TEST(ComputeSrSpl, HandCheckedHalf) {
  std::vector<JudgedEpisode> episodes = {{true, 10.0, 5.0}};
  const NavMetrics m = compute_sr_spl(episodes);
  EXPECT_EQ(m.sr, 1.0);
  EXPECT_EQ(m.spl, 0.5);
}

TEST(ComputeSrSpl, PathEqualToGeodesicScoresOne) {
  std::vector<JudgedEpisode> episodes = {{true, 5.0, 5.0}};
  EXPECT_EQ(compute_sr_spl(episodes).spl, 1.0);
}

TEST(ComputeSrSpl, AllFailuresScoreZero) {
  std::vector<JudgedEpisode> episodes = {{false, 3.0, 5.0},
                                         {false, 1.0, 2.0}};
  const NavMetrics m = compute_sr_spl(episodes);
  EXPECT_EQ(m.sr, 0.0);
  EXPECT_EQ(m.spl, 0.0);
}

TEST(ComputeSrSpl, ZeroPathSuccessSaturatesAtOne) {
  std::vector<JudgedEpisode> episodes = {{true, 0.0, 2.0}};
  EXPECT_EQ(compute_sr_spl(episodes).spl, 1.0);
}

TEST(ComputeSrSpl, SplNeverExceedsSr) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<JudgedEpisode> episodes;
    const std::size_t n = 1 + rng.next_below(20);
    for (std::size_t i = 0; i < n; ++i) {
      JudgedEpisode e;
      e.success = rng.next_below(2) == 0;
      e.geodesic = 0.1 + 10.0 * rng.next_unit();
      e.path_length = 10.0 * rng.next_unit();
      episodes.push_back(e);
    }
    const NavMetrics m = compute_sr_spl(episodes);
    EXPECT_LE(m.spl, m.sr + 1e-12);
  }
}

TEST(ComputeSrSpl, EmptyInputRejected) {
  EXPECT_THROW(compute_sr_spl({}), ConfigError);
}

TEST(RecordsIO, JsonlRoundTripIsExact) {
  std::vector<EpisodeRecord> records;
  EpisodeRecord a;
  a.actions = {Action::kMoveForward, Action::kTurnLeft, Action::kStop};
  a.start = {0.125, -2.5, 30.0};
  a.targets = {{1.0, 0.0}, {3.5, -1.25}};
  a.geodesic = 4.75;
  records.push_back(a);
  EpisodeRecord b;
  b.actions = {Action::kStop};
  b.start = {0.1, 0.2, 359.75};
  b.targets = {{0.0, 0.0}};
  b.geodesic = 0.3;
  records.push_back(b);

  const auto path = std::filesystem::temp_directory_path() / "samem_records.jsonl";
  write_episode_records(records, path);
  const auto back = read_episode_records(path);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back[i].actions, records[i].actions);
    EXPECT_EQ(back[i].start, records[i].start);
    EXPECT_EQ(back[i].targets, records[i].targets);
    EXPECT_EQ(back[i].geodesic, records[i].geodesic);
  }
}

TEST(RecordsIO, MalformedLineReportsLineNumber) {
  const auto path =
      std::filesystem::temp_directory_path() / "samem_bad_records.jsonl";
  std::ofstream out(path);
  out << R"({"actions": ["STOP"], "start": {"x":0,"y":0,"heading":0}, "targets": [[0,0]], "geodesic": 1.0})"
      << "\n";
  out << "{broken\n";
  out.close();
  try {
    read_episode_records(path);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(RecordsIO, UnknownActionRejected) {
  const auto path =
      std::filesystem::temp_directory_path() / "samem_bad_action.jsonl";
  std::ofstream out(path);
  out << R"({"actions": ["FLY"], "start": {"x":0,"y":0,"heading":0}, "targets": [[0,0]], "geodesic": 1.0})"
      << "\n";
  out.close();
  EXPECT_THROW(read_episode_records(path), Error);
}

}  // namespace
}  // namespace samem::nav
