#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monce/kde.hpp"
#include "monce/matcher.hpp"
#include "monce/model.hpp"

namespace monce {

struct LengthPoint {
  int length = 0;
  std::optional<double> value;  // empty when no sequence contributed at this length
  int support = 0;              // sequences with length >= this one

  friend bool operator==(const LengthPoint&, const LengthPoint&) = default;
};

/// Curve over sequence length T = 1, 2, ..., max length.
struct LengthCurve {
  std::vector<LengthPoint> points;

  const LengthPoint& at(int length) const { return points.at(static_cast<std::size_t>(length - 1)); }
  friend bool operator==(const LengthCurve&, const LengthCurve&) = default;
};

struct LongevityPoint {
  int length = 0;
  int successes = 0;
  int total = 0;
  double rate = 0.0;

  friend bool operator==(const LongevityPoint&, const LongevityPoint&) = default;
};

struct LongevityCurve {
  std::vector<LongevityPoint> points;

  const LongevityPoint& at(int length) const { return points.at(static_cast<std::size_t>(length - 1)); }
  friend bool operator==(const LongevityCurve&, const LongevityCurve&) = default;
};

struct LocalizationPoint {
  double threshold = 0.0;
  std::optional<double> rate;  // empty when no successful track exists

  friend bool operator==(const LocalizationPoint&, const LocalizationPoint&) = default;
};

struct AbsencePoint {
  int length = 0;
  double rate = 0.0;
  int support = 0;  // absence runs at least this long

  friend bool operator==(const AbsencePoint&, const AbsencePoint&) = default;
};

struct ReidRates {
  std::optional<double> short_rate;
  std::optional<double> long_rate;
  int short_count = 0;
  int long_count = 0;
  int threshold = 0;

  friend bool operator==(const ReidRates&, const ReidRates&) = default;
};

struct LongevityStat {
  double level = 0.0;
  int length = 0;

  friend bool operator==(const LongevityStat&, const LongevityStat&) = default;
};

// Curves. All take the OutcomeTable of a single criterion together with the
// sequences it was built from.

/// Mean over sequences of the mean overlap of their present frames in the
/// first T frames (FN counts as 0). With `pooled`, frames are pooled instead.
LengthCurve tracking_recall_curve(const OutcomeTable& outcomes,
                                  std::span<const GroundTruthSequence> sequences, bool pooled = false);

/// Average overlap of predicted entity-frames. A predicted track belongs to
/// the GT its UID was finally associated with; tracks never associated form
/// zero-overlap pseudo-sequences from their first frame to the video end.
LengthCurve tracking_precision_curve(const OutcomeTable& outcomes,
                                     std::span<const GroundTruthSequence> sequences,
                                     const TrackSet& pred, bool pooled = false);

double eao(const LengthCurve& curve, const KdeRange& range);
double eao_p(const LengthCurve& curve, const KdeRange& range);

LongevityCurve longevity_curve(const OutcomeTable& outcomes,
                               std::span<const GroundTruthSequence> sequences);

/// Largest T with rate >= p at every length up to T; 0 if rate(1) < p.
int longevity_statistic(const LongevityCurve& curve, double p);

std::vector<LocalizationPoint> localization_curve(const OutcomeTable& outcomes,
                                                  std::span<const GroundTruthSequence> sequences,
                                                  const EvalConfig& cfg);

std::vector<AbsencePoint> absence_prediction_curve(const OutcomeTable& outcomes,
                                                   std::span<const AbsenceRun> runs);

ReidRates reid_rates(const OutcomeTable& outcomes, std::span<const AbsenceRun> runs,
                     const EvalConfig& cfg);

/// Everything about one UID criterion.
struct CriterionReport {
  UidCriterion criterion = UidCriterion::Any;
  double eao = 0.0;
  double eao_p = 0.0;
  LengthCurve recall;
  LengthCurve precision;
  LongevityCurve longevity;
  std::vector<LongevityStat> longevity_stats;
  std::vector<LocalizationPoint> localization;
  std::vector<AbsencePoint> absence;
  ReidRates reid;
  int orphan_predictions = 0;

  friend bool operator==(const CriterionReport&, const CriterionReport&) = default;
};

struct ReportMetadata {
  int video_length = 0;
  int gt_sequences = 0;
  int gt_entity_frames = 0;
  int pred_entity_frames = 0;
  int absence_runs = 0;
  std::string range_rule;  // how the averaging range was chosen

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

inline constexpr int kReportSchemaVersion = 1;

/// Dashboard payload. Summary scores come from the headline criterion (any
/// UID whenever it was evaluated).
struct MetricReport {
  int schema_version = kReportSchemaVersion;
  UidCriterion headline = UidCriterion::Any;
  double eao = 0.0;
  double eao_p = 0.0;
  KdeRange kde_range;
  std::vector<LongevityStat> longevity_stats;
  ReidRates reid;
  std::vector<CriterionReport> criteria;  // any UID before original UID
  EvalConfig config;
  ReportMetadata metadata;

  const CriterionReport* find(UidCriterion criterion) const noexcept;
  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Aligns both streams on one video length: the config override when given,
/// otherwise the longer of the two.
std::pair<TrackSet, TrackSet> align_video_length(const TrackSet& gt, const TrackSet& pred,
                                                 const EvalConfig& cfg);

/// Runs classification and every metric for the requested criteria.
MetricReport assemble_report(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg,
                             std::span<const UidCriterion> criteria);
MetricReport assemble_report(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg);

}  // namespace monce
