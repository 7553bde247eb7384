#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace monce {

/// Axis-aligned rectangle in pixel coordinates, (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  /// Finite coordinates and strictly positive extent.
  bool valid() const noexcept;
  double area() const noexcept { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One observation of one entity (ground truth or predicted) in one frame.
struct EntityFrame {
  int frame = 0;
  std::string uid;
  BoundingBox box;
  std::optional<double> confidence;  // carried for annotation only

  friend bool operator==(const EntityFrame&, const EntityFrame&) = default;
};

/// A complete ground-truth or prediction stream for one video.
///
/// Entity-frames are kept sorted by (frame, uid), so construction order never
/// matters. The constructor rejects degenerate boxes, frames outside
/// [0, video_length) and duplicate (frame, uid) keys.
class TrackSet {
 public:
  TrackSet() = default;
  TrackSet(std::vector<EntityFrame> entity_frames, int video_length);

  int video_length() const noexcept { return video_length_; }
  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }

  std::span<const EntityFrame> entity_frames() const noexcept { return frames_; }
  /// Entity-frames at one frame index, ordered by uid. Empty outside the video.
  std::span<const EntityFrame> at_frame(int frame) const noexcept;

  /// Distinct UIDs in lexicographic order.
  std::vector<std::string> uids() const;
  /// Frames at which `uid` is observed, ascending. Empty for unknown UIDs.
  std::vector<int> frames_of(const std::string& uid) const;

  /// Same entity-frames over a longer (or equal) video.
  TrackSet with_video_length(int video_length) const;

  friend bool operator==(const TrackSet& a, const TrackSet& b) {
    return a.video_length_ == b.video_length_ && a.frames_ == b.frames_;
  }

 private:
  std::vector<EntityFrame> frames_;
  std::vector<std::size_t> frame_offsets_;  // video_length_ + 1 entries
  std::map<std::string, std::vector<int>> frames_by_uid_;
  int video_length_ = 0;
};

/// All frames from an entity's first appearance to the end of the video.
struct GroundTruthSequence {
  std::string gt_uid;
  int first_frame = 0;
  int length = 0;                  // video_length - first_frame
  std::vector<bool> presence_mask;  // indexed by offset from first_frame

  int frame_at(int offset) const noexcept { return first_frame + offset; }
  bool present_at_frame(int frame) const noexcept {
    const int offset = frame - first_frame;
    return offset >= 0 && offset < length && presence_mask[static_cast<std::size_t>(offset)];
  }
  int present_count() const noexcept;
};

/// Maximal run of frames inside a sequence where the entity is not present.
struct AbsenceRun {
  std::string gt_uid;
  int start_frame = 0;
  int length = 0;
  bool ends_at_video_end = false;

  friend bool operator==(const AbsenceRun&, const AbsenceRun&) = default;
};

enum class BandwidthRule { Silverman, Fixed };

struct EvalConfig {
  double iou_min = 0.0;  // matches need iou strictly above this
  int reid_threshold = 30;  // absences shorter than this are short-term
  double kde_density_fraction = 0.5;
  BandwidthRule kde_bandwidth_rule = BandwidthRule::Silverman;
  double kde_fixed_bandwidth = 1.0;  // frames, used with BandwidthRule::Fixed
  double localization_grid_step = 0.05;
  bool use_kde_range = true;
  bool pooled_averaging = false;  // frame-pooled recall/precision (diagnostic)
  std::vector<double> longevity_levels{0.5, 0.75, 0.9};
  std::optional<int> video_length;  // overrides the length inferred from the files

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

/// One sequence per distinct GT UID, ordered by (first_frame, uid).
/// Throws EvaluationError when `gt` holds no entity-frames.
std::vector<GroundTruthSequence> build_sequences(const TrackSet& gt);

/// Maximal absence runs of `seq`, ordered by start frame.
std::vector<AbsenceRun> absence_runs(const GroundTruthSequence& seq);

/// Absence runs of every sequence, concatenated in sequence order.
std::vector<AbsenceRun> absence_runs(std::span<const GroundTruthSequence> sequences);

}  // namespace monce
