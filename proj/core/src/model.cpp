#include "monce/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "monce/error.hpp"

namespace monce {

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

TrackSet::TrackSet(std::vector<EntityFrame> entity_frames, int video_length)
    : frames_(std::move(entity_frames)), video_length_(video_length) {
  if (video_length_ < 0) throw EvaluationError("negative video length");
  std::sort(frames_.begin(), frames_.end(), [](const EntityFrame& a, const EntityFrame& b) {
    return std::tie(a.frame, a.uid) < std::tie(b.frame, b.uid);
  });

  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const EntityFrame& ef = frames_[i];
    if (ef.frame < 0 || ef.frame >= video_length_) {
      throw EvaluationError("entity-frame (" + std::to_string(ef.frame) + ", " + ef.uid +
                            ") outside video of length " + std::to_string(video_length_));
    }
    if (!ef.box.valid()) {
      throw EvaluationError("degenerate box for (" + std::to_string(ef.frame) + ", " + ef.uid + ")");
    }
    if (i > 0 && frames_[i - 1].frame == ef.frame && frames_[i - 1].uid == ef.uid) {
      throw EvaluationError("duplicate entity-frame (" + std::to_string(ef.frame) + ", " + ef.uid +
                            ")");
    }
    frames_by_uid_[ef.uid].push_back(ef.frame);
  }

  frame_offsets_.assign(static_cast<std::size_t>(video_length_) + 1, 0);
  std::size_t cursor = 0;
  for (int f = 0; f <= video_length_; ++f) {
    while (cursor < frames_.size() && frames_[cursor].frame < f) ++cursor;
    frame_offsets_[static_cast<std::size_t>(f)] = cursor;
  }
}

std::span<const EntityFrame> TrackSet::at_frame(int frame) const noexcept {
  if (frame < 0 || frame >= video_length_) return {};
  const auto lo = frame_offsets_[static_cast<std::size_t>(frame)];
  const auto hi = frame_offsets_[static_cast<std::size_t>(frame) + 1];
  return std::span<const EntityFrame>(frames_).subspan(lo, hi - lo);
}

std::vector<std::string> TrackSet::uids() const {
  std::vector<std::string> out;
  out.reserve(frames_by_uid_.size());
  for (const auto& [uid, _] : frames_by_uid_) out.push_back(uid);
  return out;
}

std::vector<int> TrackSet::frames_of(const std::string& uid) const {
  const auto it = frames_by_uid_.find(uid);
  return it == frames_by_uid_.end() ? std::vector<int>{} : it->second;
}

TrackSet TrackSet::with_video_length(int video_length) const {
  return TrackSet(frames_, video_length);
}

int GroundTruthSequence::present_count() const noexcept {
  return static_cast<int>(std::count(presence_mask.begin(), presence_mask.end(), true));
}

void EvalConfig::validate() const {
  if (!(iou_min >= 0.0 && iou_min < 1.0)) throw ConfigError("iou_min", "must lie in [0, 1)");
  if (reid_threshold < 1) throw ConfigError("reid_threshold", "must be at least 1 frame");
  if (!(kde_density_fraction > 0.0 && kde_density_fraction <= 1.0)) {
    throw ConfigError("kde_density_fraction", "must lie in (0, 1]");
  }
  if (!(std::isfinite(kde_fixed_bandwidth) && kde_fixed_bandwidth > 0.0)) {
    throw ConfigError("kde_bandwidth", "must be a positive number of frames");
  }
  if (!(localization_grid_step > 0.0 && localization_grid_step <= 1.0)) {
    throw ConfigError("localization_grid_step", "must lie in (0, 1]");
  }
  if (longevity_levels.empty()) throw ConfigError("longevity_levels", "must not be empty");
  for (double p : longevity_levels) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("longevity_levels", "levels must lie in (0, 1]");
  }
  if (video_length && *video_length < 1) throw ConfigError("video_length", "must be positive");
}

std::vector<GroundTruthSequence> build_sequences(const TrackSet& gt) {
  if (gt.empty()) throw EvaluationError("no ground truth entities");

  std::vector<GroundTruthSequence> out;
  for (const std::string& uid : gt.uids()) {
    const std::vector<int> frames = gt.frames_of(uid);
    GroundTruthSequence seq;
    seq.gt_uid = uid;
    seq.first_frame = frames.front();
    seq.length = gt.video_length() - seq.first_frame;
    seq.presence_mask.assign(static_cast<std::size_t>(seq.length), false);
    for (int f : frames) seq.presence_mask[static_cast<std::size_t>(f - seq.first_frame)] = true;
    out.push_back(std::move(seq));
  }
  std::sort(out.begin(), out.end(), [](const GroundTruthSequence& a, const GroundTruthSequence& b) {
    return std::tie(a.first_frame, a.gt_uid) < std::tie(b.first_frame, b.gt_uid);
  });
  return out;
}

std::vector<AbsenceRun> absence_runs(const GroundTruthSequence& seq) {
  std::vector<AbsenceRun> runs;
  int offset = 0;
  while (offset < seq.length) {
    if (seq.presence_mask[static_cast<std::size_t>(offset)]) {
      ++offset;
      continue;
    }
    const int start = offset;
    while (offset < seq.length && !seq.presence_mask[static_cast<std::size_t>(offset)]) ++offset;
    runs.push_back(AbsenceRun{seq.gt_uid, seq.first_frame + start, offset - start,
                              offset == seq.length});
  }
  return runs;
}

std::vector<AbsenceRun> absence_runs(std::span<const GroundTruthSequence> sequences) {
  std::vector<AbsenceRun> out;
  for (const auto& seq : sequences) {
    auto runs = absence_runs(seq);
    out.insert(out.end(), std::make_move_iterator(runs.begin()), std::make_move_iterator(runs.end()));
  }
  return out;
}

}  // namespace monce
