#include "monce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <unordered_map>

#include "monce/error.hpp"

namespace monce {
namespace {

void check_alignment(const OutcomeTable& outcomes, std::span<const GroundTruthSequence> sequences) {
  if (outcomes.sequences.size() != sequences.size()) {
    throw InternalError("outcome table and sequences disagree in size");
  }
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (outcomes.sequences[s].gt_uid != sequences[s].gt_uid ||
        outcomes.sequences[s].length() != sequences[s].length) {
      throw InternalError("outcome table and sequences disagree on " + sequences[s].gt_uid);
    }
  }
}

int max_length(std::span<const GroundTruthSequence> sequences) {
  int out = 0;
  for (const auto& seq : sequences) out = std::max(out, seq.length);
  return out;
}

// Running sums over a window [0, T) of one sequence.
struct WindowSums {
  int length = 0;
  std::vector<double> overlap;  // length + 1 prefix sums
  std::vector<int> count;       // length + 1 prefix counts
};

WindowSums prefix(const std::vector<double>& overlap_at, const std::vector<int>& count_at) {
  WindowSums w;
  w.length = static_cast<int>(overlap_at.size());
  w.overlap.assign(overlap_at.size() + 1, 0.0);
  w.count.assign(count_at.size() + 1, 0);
  for (std::size_t k = 0; k < overlap_at.size(); ++k) {
    w.overlap[k + 1] = w.overlap[k] + overlap_at[k];
    w.count[k + 1] = w.count[k] + count_at[k];
  }
  return w;
}

// Zero-overlap tracks that extend the precision curve.
struct OrphanTracks {
  std::vector<int> starting_at_least;  // [T] = tracks of length >= T
  std::vector<long> frames_in_window;  // [T] = their entity-frames inside the first T frames
};

LengthCurve average_curve(const std::vector<WindowSums>& sums, int max_len, const OrphanTracks* orphans,
                          bool pooled) {
  LengthCurve curve;
  curve.points.reserve(static_cast<std::size_t>(max_len));
  for (int t = 1; t <= max_len; ++t) {
    int support = 0, contributors = 0;
    double mean_sum = 0.0, pooled_overlap = 0.0;
    long pooled_count = 0;
    for (const auto& w : sums) {
      if (w.length < t) continue;
      ++support;
      const int n = w.count[static_cast<std::size_t>(t)];
      if (n == 0) continue;
      ++contributors;
      const double o = w.overlap[static_cast<std::size_t>(t)];
      mean_sum += o / n;
      pooled_overlap += o;
      pooled_count += n;
    }
    if (orphans != nullptr) {
      const int extra = orphans->starting_at_least[static_cast<std::size_t>(t)];
      support += extra;
      contributors += extra;
      pooled_count += orphans->frames_in_window[static_cast<std::size_t>(t)];
    }
    LengthPoint point{t, std::nullopt, support};
    if (pooled) {
      if (pooled_count > 0) point.value = pooled_overlap / static_cast<double>(pooled_count);
    } else if (contributors > 0) {
      point.value = mean_sum / contributors;
    }
    curve.points.push_back(point);
  }
  return curve;
}

double range_mean(const LengthCurve& curve, const KdeRange& range, const char* what) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : curve.points) {
    if (p.length < range.t_lo || p.length > range.t_hi) continue;
    if (p.support == 0 || !p.value) continue;
    sum += *p.value;
    ++n;
  }
  if (n == 0) {
    throw EvaluationError(std::string(what) + ": no curve points in length range [" +
                          std::to_string(range.t_lo) + ", " + std::to_string(range.t_hi) + "]");
  }
  return sum / n;
}

// Offset of the first FN or attributed FP, or the sequence length if none.
int first_failure(const SequenceOutcomes& seq) {
  for (int k = 0; k < seq.length(); ++k) {
    const Outcome kind = seq.frames[static_cast<std::size_t>(k)].kind;
    if (kind == Outcome::FalseNegative || kind == Outcome::FalsePositiveAttributed) return k;
  }
  return seq.length();
}

std::unordered_map<std::string, const SequenceOutcomes*> index_by_uid(const OutcomeTable& outcomes) {
  std::unordered_map<std::string, const SequenceOutcomes*> out;
  for (const auto& seq : outcomes.sequences) out.emplace(seq.gt_uid, &seq);
  return out;
}

std::vector<double> threshold_grid(double step) {
  const auto n = static_cast<int>(std::floor(1.0 / step + 1e-9));
  std::vector<double> grid;
  for (int k = 0; k <= n; ++k) grid.push_back(std::round(k * step * 1e12) / 1e12);
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

}  // namespace

LengthCurve tracking_recall_curve(const OutcomeTable& outcomes,
                                  std::span<const GroundTruthSequence> sequences, bool pooled) {
  check_alignment(outcomes, sequences);
  std::vector<WindowSums> sums;
  sums.reserve(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto n = static_cast<std::size_t>(sequences[s].length);
    std::vector<double> overlap(n, 0.0);
    std::vector<int> count(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      if (!sequences[s].presence_mask[k]) continue;
      count[k] = 1;
      const FrameOutcome& o = outcomes.sequences[s].frames[k];
      if (o.kind == Outcome::TruePositive) overlap[k] = o.iou;
    }
    sums.push_back(prefix(overlap, count));
  }
  return average_curve(sums, max_length(sequences), nullptr, pooled);
}

LengthCurve tracking_precision_curve(const OutcomeTable& outcomes,
                                     std::span<const GroundTruthSequence> sequences,
                                     const TrackSet& pred, bool pooled) {
  check_alignment(outcomes, sequences);
  std::unordered_map<std::string, std::size_t> seq_index;
  for (std::size_t s = 0; s < sequences.size(); ++s) seq_index.emplace(sequences[s].gt_uid, s);

  std::vector<std::vector<double>> overlap(sequences.size());
  std::vector<std::vector<int>> count(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    overlap[s].assign(static_cast<std::size_t>(sequences[s].length), 0.0);
    count[s].assign(static_cast<std::size_t>(sequences[s].length), 0);
  }

  const int video_length = outcomes.video_length;
  OrphanTracks orphans;
  orphans.starting_at_least.assign(static_cast<std::size_t>(video_length) + 2, 0);
  std::vector<long> frame_delta(static_cast<std::size_t>(video_length) + 2, 0);

  for (const std::string& uid : pred.uids()) {
    const std::vector<int> frames = pred.frames_of(uid);
    const auto assoc = outcomes.final_state.pred_to_gt.find(uid);
    if (assoc == outcomes.final_state.pred_to_gt.end()) {
      const int len = video_length - frames.front();
      orphans.starting_at_least[static_cast<std::size_t>(len)] += 1;
      // An entity-frame at offset o lies inside every window with T > o.
      for (int f : frames) {
        frame_delta[static_cast<std::size_t>(f - frames.front() + 1)] += 1;
        frame_delta[static_cast<std::size_t>(len + 1)] -= 1;
      }
      continue;
    }
    const std::size_t s = seq_index.at(assoc->second);
    const GroundTruthSequence& seq = sequences[s];
    for (int f : frames) {
      const int offset = f - seq.first_frame;
      if (offset < 0) continue;  // emitted before the entity first appeared
      const auto k = static_cast<std::size_t>(offset);
      count[s][k] += 1;
      const MatchPair* pair = outcomes.matchings[static_cast<std::size_t>(f)].find_gt(seq.gt_uid);
      if (pair != nullptr && pair->pred_uid == uid) overlap[s][k] += pair->iou;
    }
  }

  // Suffix counts of orphan lengths, prefix sums of in-window orphan frames.
  for (int t = video_length; t >= 1; --t) {
    orphans.starting_at_least[static_cast<std::size_t>(t)] +=
        orphans.starting_at_least[static_cast<std::size_t>(t) + 1];
  }
  orphans.frames_in_window.assign(static_cast<std::size_t>(video_length) + 2, 0);
  long running = 0;
  for (int t = 1; t <= video_length; ++t) {
    running += frame_delta[static_cast<std::size_t>(t)];
    orphans.frames_in_window[static_cast<std::size_t>(t)] = running;
  }

  std::vector<WindowSums> sums;
  sums.reserve(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) sums.push_back(prefix(overlap[s], count[s]));
  int max_len = max_length(sequences);
  for (int t = video_length; t > max_len; --t) {
    if (orphans.starting_at_least[static_cast<std::size_t>(t)] > 0) {
      max_len = t;
      break;
    }
  }
  return average_curve(sums, max_len, &orphans, pooled);
}

double eao(const LengthCurve& curve, const KdeRange& range) { return range_mean(curve, range, "eao"); }

double eao_p(const LengthCurve& curve, const KdeRange& range) {
  return range_mean(curve, range, "eao_p");
}

LongevityCurve longevity_curve(const OutcomeTable& outcomes,
                               std::span<const GroundTruthSequence> sequences) {
  check_alignment(outcomes, sequences);
  std::vector<int> failure;
  failure.reserve(outcomes.sequences.size());
  for (const auto& seq : outcomes.sequences) failure.push_back(first_failure(seq));

  LongevityCurve curve;
  const int max_len = max_length(sequences);
  for (int t = 1; t <= max_len; ++t) {
    LongevityPoint point{t, 0, 0, 0.0};
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      if (sequences[s].length < t) continue;
      ++point.total;
      if (failure[s] >= t) ++point.successes;
    }
    point.rate = static_cast<double>(point.successes) / point.total;
    curve.points.push_back(point);
  }
  return curve;
}

int longevity_statistic(const LongevityCurve& curve, double p) {
  int reached = 0;
  for (const auto& point : curve.points) {
    if (point.rate < p) break;
    reached = point.length;
  }
  return reached;
}

std::vector<LocalizationPoint> localization_curve(const OutcomeTable& outcomes,
                                                  std::span<const GroundTruthSequence> sequences,
                                                  const EvalConfig& cfg) {
  check_alignment(outcomes, sequences);
  std::vector<double> ious;
  for (const auto& seq : outcomes.sequences) {
    if (first_failure(seq) != seq.length()) continue;
    for (const auto& o : seq.frames) {
      if (o.kind == Outcome::TruePositive) ious.push_back(o.iou);
    }
  }

  std::vector<LocalizationPoint> curve;
  for (double theta : threshold_grid(cfg.localization_grid_step)) {
    LocalizationPoint point{theta, std::nullopt};
    if (!ious.empty()) {
      const auto hits = std::count_if(ious.begin(), ious.end(), [theta](double v) {
        return theta == 0.0 ? v > 0.0 : v >= theta;
      });
      point.rate = static_cast<double>(hits) / static_cast<double>(ious.size());
    }
    curve.push_back(point);
  }
  return curve;
}

std::vector<AbsencePoint> absence_prediction_curve(const OutcomeTable& outcomes,
                                                   std::span<const AbsenceRun> runs) {
  const auto by_uid = index_by_uid(outcomes);
  int max_len = 0;
  std::vector<std::vector<int>> tn_prefix;  // per run, prefix counts of TN frames
  tn_prefix.reserve(runs.size());
  for (const auto& run : runs) {
    const SequenceOutcomes* seq = by_uid.at(run.gt_uid);
    std::vector<int> pre(static_cast<std::size_t>(run.length) + 1, 0);
    for (int k = 0; k < run.length; ++k) {
      const auto& o = seq->frames[static_cast<std::size_t>(run.start_frame - seq->first_frame + k)];
      pre[static_cast<std::size_t>(k) + 1] = pre[static_cast<std::size_t>(k)] + (o.kind == Outcome::TrueNegative);
    }
    tn_prefix.push_back(std::move(pre));
    max_len = std::max(max_len, run.length);
  }

  std::vector<AbsencePoint> curve;
  for (int t = 1; t <= max_len; ++t) {
    long tn = 0, pooled = 0;
    int support = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (runs[r].length < t) continue;
      ++support;
      pooled += t;
      tn += tn_prefix[r][static_cast<std::size_t>(t)];
    }
    curve.push_back(AbsencePoint{t, static_cast<double>(tn) / static_cast<double>(pooled), support});
  }
  return curve;
}

ReidRates reid_rates(const OutcomeTable& outcomes, std::span<const AbsenceRun> runs,
                     const EvalConfig& cfg) {
  const auto by_uid = index_by_uid(outcomes);
  ReidRates out;
  out.threshold = cfg.reid_threshold;
  int short_hits = 0, long_hits = 0;
  for (const auto& run : runs) {
    if (run.ends_at_video_end) continue;
    const SequenceOutcomes* seq = by_uid.at(run.gt_uid);
    const int back = run.start_frame + run.length - seq->first_frame;
    const bool hit = seq->frames[static_cast<std::size_t>(back)].kind == Outcome::TruePositive;
    if (run.length < cfg.reid_threshold) {
      ++out.short_count;
      short_hits += hit;
    } else {
      ++out.long_count;
      long_hits += hit;
    }
  }
  if (out.short_count > 0) out.short_rate = static_cast<double>(short_hits) / out.short_count;
  if (out.long_count > 0) out.long_rate = static_cast<double>(long_hits) / out.long_count;
  return out;
}

const CriterionReport* MetricReport::find(UidCriterion criterion) const noexcept {
  for (const auto& c : criteria) {
    if (c.criterion == criterion) return &c;
  }
  return nullptr;
}

std::pair<TrackSet, TrackSet> align_video_length(const TrackSet& gt, const TrackSet& pred,
                                                 const EvalConfig& cfg) {
  const int length = cfg.video_length.value_or(std::max(gt.video_length(), pred.video_length()));
  return {gt.with_video_length(length), pred.with_video_length(length)};
}

namespace {

CriterionReport evaluate_criterion(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg,
                                   UidCriterion criterion,
                                   std::span<const GroundTruthSequence> sequences,
                                   std::span<const AbsenceRun> runs, const KdeRange& range) {
  const OutcomeTable table = classify(gt, pred, criterion, cfg);
  CriterionReport out;
  out.criterion = criterion;
  out.recall = tracking_recall_curve(table, sequences, cfg.pooled_averaging);
  out.precision = tracking_precision_curve(table, sequences, pred, cfg.pooled_averaging);
  out.eao = eao(out.recall, range);
  out.eao_p = eao_p(out.precision, range);
  out.longevity = longevity_curve(table, sequences);
  for (double level : cfg.longevity_levels) {
    out.longevity_stats.push_back(LongevityStat{level, longevity_statistic(out.longevity, level)});
  }
  out.localization = localization_curve(table, sequences, cfg);
  out.absence = absence_prediction_curve(table, runs);
  out.reid = reid_rates(table, runs, cfg);
  out.orphan_predictions = static_cast<int>(table.orphan_predictions.size());
  return out;
}

std::string describe_range_rule(const EvalConfig& cfg) {
  if (!cfg.use_kde_range) return "full observed range of ground-truth sequence lengths";
  std::ostringstream os;
  os << "mode-anchored gaussian kde over ground-truth sequence lengths, density >= "
     << cfg.kde_density_fraction << " x peak, bandwidth "
     << (cfg.kde_bandwidth_rule == BandwidthRule::Silverman ? "silverman (floored at 1 frame)"
                                                             : "fixed");
  return os.str();
}

}  // namespace

MetricReport assemble_report(const TrackSet& gt_in, const TrackSet& pred_in, const EvalConfig& cfg,
                             std::span<const UidCriterion> criteria) {
  cfg.validate();
  if (criteria.empty()) throw EvaluationError("no uid criterion requested");
  const auto aligned = align_video_length(gt_in, pred_in, cfg);
  const TrackSet& gt = aligned.first;
  const TrackSet& pred = aligned.second;

  const std::vector<GroundTruthSequence> sequences = build_sequences(gt);
  const std::vector<AbsenceRun> runs = absence_runs(sequences);
  std::vector<int> lengths;
  for (const auto& seq : sequences) lengths.push_back(seq.length);

  MetricReport report;
  report.config = cfg;
  report.kde_range = kde_range(lengths, cfg);

  std::vector<UidCriterion> ordered(criteria.begin(), criteria.end());
  std::sort(ordered.begin(), ordered.end(), [](UidCriterion a, UidCriterion b) {
    return a == UidCriterion::Any && b != UidCriterion::Any;
  });
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  // Criteria are independent folds; results are collected in a fixed order.
  std::vector<std::future<CriterionReport>> jobs;
  for (UidCriterion criterion : ordered) {
    jobs.push_back(std::async(std::launch::async, [&, criterion] {
      return evaluate_criterion(gt, pred, cfg, criterion, sequences, runs, report.kde_range);
    }));
  }
  for (auto& job : jobs) report.criteria.push_back(job.get());

  const CriterionReport& head = report.criteria.front();
  report.headline = head.criterion;
  report.eao = head.eao;
  report.eao_p = head.eao_p;
  report.longevity_stats = head.longevity_stats;
  report.reid = head.reid;

  report.metadata.video_length = gt.video_length();
  report.metadata.gt_sequences = static_cast<int>(sequences.size());
  report.metadata.gt_entity_frames = static_cast<int>(gt.size());
  report.metadata.pred_entity_frames = static_cast<int>(pred.size());
  report.metadata.absence_runs = static_cast<int>(runs.size());
  report.metadata.range_rule = describe_range_rule(cfg);
  return report;
}

MetricReport assemble_report(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg) {
  constexpr UidCriterion both[] = {UidCriterion::Any, UidCriterion::Original};
  return assemble_report(gt, pred, cfg, both);
}

}  // namespace monce
