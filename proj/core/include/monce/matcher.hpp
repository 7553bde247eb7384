#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monce/model.hpp"

namespace monce {

enum class UidCriterion { Original, Any };

std::string_view to_string(UidCriterion criterion) noexcept;

/// Totals closer than this are treated as equal when ordering matchings.
inline constexpr double kTotalIouTieTolerance = 1e-9;

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Write-once record of which predicted UID was associated with which GT UID.
struct AssociationState {
  std::map<std::string, std::string> pred_to_gt;
  std::map<std::string, std::string> gt_to_first_pred;

  friend bool operator==(const AssociationState&, const AssociationState&) = default;
};

bool eligible(const AssociationState& state, const std::string& gt_uid, const std::string& pred_uid,
              UidCriterion criterion);

struct MatchPair {
  std::string gt_uid;
  std::string pred_uid;
  double iou = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct FrameMatching {
  int frame = 0;
  std::vector<MatchPair> pairs;  // sorted by (gt_uid, pred_uid)

  std::size_t cardinality() const noexcept { return pairs.size(); }
  /// Sum of pair IOUs, accumulated in pair order.
  double total_iou() const noexcept;
  const MatchPair* find_gt(std::string_view gt_uid) const noexcept;
};

/// Maximum-cardinality matching between one frame's GT and predicted boxes.
///
/// Candidate pairs must be eligible under `criterion` and overlap with
/// iou > iou_min. Among maximum-cardinality matchings the one with the largest
/// total IOU wins; remaining ties go to the lexicographically smallest sorted
/// (gt_uid, pred_uid) pair list.
FrameMatching match_frame(std::span<const EntityFrame> gt_frames,
                          std::span<const EntityFrame> pred_frames, const AssociationState& state,
                          UidCriterion criterion, double iou_min);

/// Records first associations of `matching`. Throws InternalError if a pair
/// contradicts an existing entry, which means the matching was not eligible.
AssociationState advance_association(AssociationState state, const FrameMatching& matching);

enum class Outcome : std::uint8_t { TruePositive, FalseNegative, TrueNegative, FalsePositiveAttributed };

struct FrameOutcome {
  Outcome kind = Outcome::TrueNegative;
  double iou = 0.0;  // only meaningful for TruePositive

  friend bool operator==(const FrameOutcome&, const FrameOutcome&) = default;
};

/// Outcomes of one GT sequence, indexed by offset from its first frame.
struct SequenceOutcomes {
  std::string gt_uid;
  int first_frame = 0;
  std::vector<FrameOutcome> frames;

  int length() const noexcept { return static_cast<int>(frames.size()); }
};

struct OrphanPrediction {
  int frame = 0;
  std::string pred_uid;

  friend bool operator==(const OrphanPrediction&, const OrphanPrediction&) = default;
};

struct OutcomeTable {
  UidCriterion criterion = UidCriterion::Any;
  int video_length = 0;
  std::vector<SequenceOutcomes> sequences;  // same order as build_sequences
  std::vector<FrameMatching> matchings;     // one per frame
  std::vector<OrphanPrediction> orphan_predictions;
  AssociationState final_state;
};

/// Folds match_frame and advance_association over the video.
///
/// Absent-frame outcomes use the association state after that frame's update:
/// an absent GT is FalsePositiveAttributed when any predicted entity-frame at
/// that frame carries a UID associated with it. Unmatched predictions whose UID
/// has no association at their frame are recorded as orphans.
OutcomeTable classify(const TrackSet& gt, const TrackSet& pred, UidCriterion criterion,
                      const EvalConfig& cfg);

}  // namespace monce
