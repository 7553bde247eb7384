#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "monce/model.hpp"

namespace monce::synth {

/// Interval of frames, both ends inclusive.
struct FrameSpan {
  int first = 0;
  int last = 0;

  friend bool operator==(const FrameSpan&, const FrameSpan&) = default;
};

/// Ground-truth entity moving linearly with a constant box size.
struct EntitySpec {
  std::string uid;
  int birth = 0;
  int end = 0;  // last frame the entity may be present, inclusive
  std::vector<FrameSpan> absences;
  double x = 0.0, y = 0.0;    // top-left at birth
  double vx = 0.0, vy = 0.0;  // pixels per frame
  double w = 10.0, h = 10.0;

  BoundingBox box_at(int frame) const noexcept;
  bool present_at(int frame) const noexcept;
};

/// Predicted UIDs of two entities are exchanged for `frames` frames.
struct UidSwap {
  int frame = 0;
  std::string uid_a, uid_b;
  int frames = 1;
};

/// Predictions of `uid` ("*" for all) inside the span are removed, each with `probability`.
struct Drop {
  std::string uid;
  FrameSpan span;
  double probability = 1.0;
};

/// Uniform random offset in [-offset, offset] on x and y of every predicted box of `uid`.
struct Jitter {
  std::string uid;
  double offset = 0.0;
};

/// Fresh-UID boxes per frame placed where they overlap no ground-truth box.
struct Clutter {
  int boxes_per_frame = 0;
  double w = 8.0, h = 8.0;
};

/// After every exit of `uid` ("*" for all), its last box keeps being predicted for `frames` frames.
struct StaleHold {
  std::string uid;
  int frames = 0;
};

enum class ResetTarget { Predictions, GroundTruth };

/// UID namespace restarts every `period` frames: uid becomes uid#k for segment k.
struct UidReset {
  int period = 0;
  ResetTarget target = ResetTarget::Predictions;
};

using Degradation = std::variant<UidSwap, Drop, Jitter, Clutter, StaleHold, UidReset>;

struct Scenario {
  int video_length = 0;
  double canvas_w = 1920.0, canvas_h = 1080.0;
  std::vector<EntitySpec> entities;
  std::vector<Degradation> degradations;  // applied in order
};

/// Throws ConfigError describing the first inconsistency.
void validate(const Scenario& scenario);

/// Ground truth from the entity definitions; predictions start as an exact
/// copy and then receive each degradation in order. Deterministic in `seed`.
std::pair<TrackSet, TrackSet> generate(const Scenario& scenario, std::uint64_t seed);

/// Key-value scenario description, see docs/scenario_format.md.
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario(const std::string& path);

struct RandomScenarioOptions {
  int max_entities = 6;
  int min_video_length = 10;
  int max_video_length = 60;
  double canvas = 160.0;  // square canvas; small enough that entities collide
  bool allow_clutter = true;
};

/// Random small scenario mixing all degradation kinds, for property tests.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options = {});

}  // namespace monce::synth
