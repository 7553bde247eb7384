#pragma once

#include <functional>
#include <span>
#include <string>

#include "monce/matcher.hpp"
#include "monce/metrics.hpp"
#include "monce/model.hpp"

namespace monce::oracle {

/// Reference implementations by exhaustive enumeration and literal
/// re-evaluation of the metric definitions. They share types with the
/// production code but none of its algorithms, and are meant for tests.

using Eligibility = std::function<bool(const std::string& gt_uid, const std::string& pred_uid)>;

inline constexpr std::size_t kMaxBruteForceBoxes = 6;

/// Enumerates every matching and returns the lexicographic optimum on
/// (cardinality, total IOU, sorted uid pairs). Throws EvaluationError when
/// either side holds more than kMaxBruteForceBoxes boxes.
FrameMatching brute_force_match(std::span<const EntityFrame> gt_frames,
                                std::span<const EntityFrame> pred_frames, const Eligibility& eligible,
                                double iou_min);

struct BruteForceCurves {
  LengthCurve recall;
  LengthCurve precision;
  LongevityCurve longevity;
};

inline constexpr int kMaxBruteForceVideoLength = 200;
inline constexpr std::size_t kMaxBruteForceEntities = 10;

/// Recall, precision and longevity by re-trimming and re-averaging for every T.
/// Bounded to kMaxBruteForceVideoLength frames and kMaxBruteForceEntities GT UIDs.
BruteForceCurves brute_force_curves(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg,
                                    UidCriterion criterion);

}  // namespace monce::oracle
