#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "monce/error.hpp"
#include "monce/matcher.hpp"
#include "monce/synth.hpp"

namespace monce::synth {
namespace {

EntitySpec entity(std::string uid, int birth, int end, double x, double y = 10.0) {
  return EntitySpec{std::move(uid), birth, end, {}, x, y, 1.0, 0.0, 20.0, 20.0};
}

Scenario two_entities(int video = 30) {
  Scenario s;
  s.video_length = video;
  s.canvas_w = 400;
  s.canvas_h = 200;
  s.entities = {entity("a", 0, video - 1, 10), entity("b", 5, video - 1, 200)};
  s.entities[0].absences = {FrameSpan{10, 12}};
  return s;
}

TEST(Generate, NoDegradationsIsPerfect) {
  const auto [gt, pred] = generate(two_entities(), 7);
  EXPECT_EQ(gt, pred);
  EXPECT_EQ(gt.video_length(), 30);
  EXPECT_EQ(gt.frames_of("a").size(), 27u);
  EXPECT_EQ(gt.frames_of("b").front(), 5);
  EXPECT_EQ(gt.at_frame(3)[0].box, (BoundingBox{13, 10, 20, 20}));
}

TEST(Generate, DeterministicPerSeed) {
  Scenario s = two_entities();
  s.degradations = {Jitter{"*", 3.0}, Drop{"*", {0, 29}, 0.3}, Clutter{2, 8, 8}};
  EXPECT_EQ(generate(s, 11), generate(s, 11));
  EXPECT_NE(generate(s, 11).second, generate(s, 12).second);
  EXPECT_EQ(generate(s, 11).first, generate(s, 12).first);
}

TEST(Generate, SingleFrameSwap) {
  Scenario s = two_entities();
  s.degradations = {UidSwap{20, "a", "b", 1}};
  const auto [gt, pred] = generate(s, 0);
  const auto swapped = pred.at_frame(20);
  ASSERT_EQ(swapped.size(), 2u);
  EXPECT_EQ(swapped[0].uid, "a");
  EXPECT_EQ(swapped[0].box, gt.at_frame(20)[1].box);  // b's box under a's uid
  for (int f : {19, 21}) {
    EXPECT_TRUE(std::ranges::equal(pred.at_frame(f), gt.at_frame(f))) << "frame " << f;
  }
}

TEST(Generate, DropRemovesSpan) {
  Scenario s = two_entities();
  s.degradations = {Drop{"b", {7, 9}, 1.0}};
  const auto [gt, pred] = generate(s, 0);
  EXPECT_EQ(pred.size(), gt.size() - 3);
  const auto frames = pred.frames_of("b");
  EXPECT_EQ(std::count_if(frames.begin(), frames.end(), [](int f) { return f >= 7 && f <= 9; }), 0);
}

TEST(Generate, JitterStaysWithinOffset) {
  Scenario s = two_entities();
  s.degradations = {Jitter{"a", 2.0}};
  const auto [gt, pred] = generate(s, 5);
  bool moved = false;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& g = gt.entity_frames()[i];
    const auto& p = pred.entity_frames()[i];
    ASSERT_EQ(g.uid, p.uid);
    if (g.uid != "a") {
      EXPECT_EQ(g.box, p.box);
      continue;
    }
    EXPECT_LE(std::abs(g.box.x - p.box.x), 2.0);
    EXPECT_LE(std::abs(g.box.y - p.box.y), 2.0);
    moved = moved || !(g.box == p.box);
  }
  EXPECT_TRUE(moved);
}

TEST(Generate, ClutterNeverOverlapsGroundTruth) {
  Scenario s = two_entities();
  s.degradations = {Clutter{5, 8, 8}};
  const auto [gt, pred] = generate(s, 3);
  EXPECT_EQ(pred.size(), gt.size() + 5u * 30u);
  std::set<std::string> uids;
  for (int f = 0; f < 30; ++f) {
    for (const auto& p : pred.at_frame(f)) {
      if (p.uid.rfind("clutter-", 0) != 0) continue;
      EXPECT_TRUE(uids.insert(p.uid).second);
      for (const auto& g : gt.at_frame(f)) EXPECT_EQ(iou(g.box, p.box), 0.0);
    }
  }
  EXPECT_EQ(uids.size(), 150u);
}

TEST(Generate, StaleHoldAfterEachExit) {
  Scenario s = two_entities();
  s.entities[1].end = 20;
  s.degradations = {StaleHold{"*", 2}};
  const auto [gt, pred] = generate(s, 0);
  const auto a = pred.frames_of("a");
  EXPECT_TRUE(std::count(a.begin(), a.end(), 10) && std::count(a.begin(), a.end(), 11));
  EXPECT_FALSE(std::count(a.begin(), a.end(), 12));
  const auto b = pred.frames_of("b");
  EXPECT_EQ(b.back(), 22);
  EXPECT_EQ(pred.at_frame(22)[1].box, gt.at_frame(20)[1].box);
  EXPECT_EQ(pred.size(), gt.size() + 4);
}

TEST(Generate, UidResetOnPredictions) {
  Scenario s = two_entities(30);
  s.degradations = {UidReset{10, ResetTarget::Predictions}};
  const auto [gt, pred] = generate(s, 0);
  EXPECT_EQ(gt, generate(two_entities(30), 0).first);
  EXPECT_EQ(pred.uids(), (std::vector<std::string>{"a#0", "a#1", "a#2", "b#0", "b#1", "b#2"}));
  EXPECT_EQ(pred.frames_of("a#1").front(), 13);
  EXPECT_EQ(pred.frames_of("b#0").back(), 9);
}

TEST(Generate, UidResetOnGroundTruth) {
  Scenario s = two_entities(30);
  s.degradations = {UidReset{10, ResetTarget::GroundTruth}};
  const auto [gt, pred] = generate(s, 0);
  EXPECT_EQ(gt.uids().size(), 6u);
  EXPECT_EQ(pred.uids(), (std::vector<std::string>{"a", "b"}));
}

std::string config_key(const Scenario& s) {
  try {
    validate(s);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(Validate, RejectsInconsistentScenarios) {
  EXPECT_EQ(config_key(two_entities()), "");
  Scenario s = two_entities();
  s.entities[0].absences = {FrameSpan{25, 40}};
  EXPECT_EQ(config_key(s), "entity");
  s = two_entities();
  s.entities[1].x = 390;
  EXPECT_EQ(config_key(s), "entity");
  s = two_entities();
  s.degradations = {UidSwap{29, "a", "b", 2}};
  EXPECT_EQ(config_key(s), "uid_swap");
  s.degradations = {UidSwap{3, "a", "zz", 1}};
  EXPECT_EQ(config_key(s), "uid_swap");
  s.degradations = {Drop{"a", {5, 2}, 1.0}};
  EXPECT_EQ(config_key(s), "drop");
  s.degradations = {UidReset{0, ResetTarget::Predictions}};
  EXPECT_EQ(config_key(s), "uid_reset");
  s.degradations = {Clutter{1, 500, 5}};
  EXPECT_EQ(config_key(s), "clutter");
  s.degradations = {};
  s.entities.push_back(s.entities[0]);
  EXPECT_EQ(config_key(s), "entity");
  EXPECT_THROW(generate(s, 0), ConfigError);
}

TEST(ScenarioText, ParsesAllKinds) {
  const Scenario s = parse_scenario_text(
      "# two cars\n"
      "video_length = 40\n"
      "canvas = 400 200\n"
      "entity = uid=a birth=0 end=39 x=10 y=10 vx=1 w=20 h=20 absent=10-12,20-21\n"
      "entity = uid=b birth=5 end=39 x=200 y=10 w=20 h=20\n"
      "degradation = uid_swap frame=20 a=a b=b\n"
      "degradation = drop uid=b from=7 to=9 probability=0.5\n"
      "degradation = jitter uid=a offset=1.5\n"
      "degradation = clutter count=3\n"
      "degradation = stale_hold uid=* frames=4\n"
      "degradation = uid_reset period=15 target=gt\n");
  EXPECT_EQ(s.video_length, 40);
  EXPECT_EQ(s.canvas_w, 400);
  ASSERT_EQ(s.entities.size(), 2u);
  EXPECT_EQ(s.entities[0].absences, (std::vector<FrameSpan>{{10, 12}, {20, 21}}));
  EXPECT_EQ(s.entities[0].vx, 1.0);
  EXPECT_EQ(s.entities[1].vx, 0.0);
  ASSERT_EQ(s.degradations.size(), 6u);
  EXPECT_EQ(std::get<UidSwap>(s.degradations[0]).frames, 1);
  EXPECT_EQ(std::get<Drop>(s.degradations[1]).probability, 0.5);
  EXPECT_EQ(std::get<Jitter>(s.degradations[2]).offset, 1.5);
  EXPECT_EQ(std::get<Clutter>(s.degradations[3]).boxes_per_frame, 3);
  EXPECT_EQ(std::get<StaleHold>(s.degradations[4]).uid, "*");
  EXPECT_EQ(std::get<UidReset>(s.degradations[5]).target, ResetTarget::GroundTruth);
}

TEST(ScenarioText, Errors) {
  EXPECT_THROW(parse_scenario_text("entity = uid=a birth=0 end=3 x=0 y=0 w=1 h=1\n"), ConfigError);
  EXPECT_THROW(parse_scenario_text("video_length=5\nentity = uid=a birth=0 end=3 x=0 y=0 w=1\n"), ParseError);
  EXPECT_THROW(parse_scenario_text("video_length=5\nentity = uid=a birth=0 end=3 x=0 y=0 w=1 h=1 speed=2\n"),
               ParseError);
  EXPECT_THROW(parse_scenario_text("video_length=5\nentity = uid=a birth=0 end=3 x=0 y=0 w=1 h=1\n"
                                   "degradation = explode\n"),
               ParseError);
  EXPECT_THROW(parse_scenario_text("video_length=5\nweather=rain\n"), ConfigError);
}

TEST(RandomScenario, ValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scenario s = random_scenario(seed);
    ASSERT_NO_THROW(validate(s)) << "seed " << seed;
    ASSERT_NO_THROW(generate(s, seed)) << "seed " << seed;
    EXPECT_LE(s.entities.size(), 6u);
  }
  EXPECT_EQ(generate(random_scenario(9), 9), generate(random_scenario(9), 9));
}

}  // namespace
}  // namespace monce::synth
