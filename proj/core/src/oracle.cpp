#include "monce/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "monce/error.hpp"

namespace monce::oracle {
namespace {

double overlap_1d(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

double reference_iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = overlap_1d(a.x, a.x + a.w, b.x, b.x + b.w) * overlap_1d(a.y, a.y + a.h, b.y, b.y + b.h);
  if (inter == 0.0) return 0.0;
  const double r = inter / (a.w * a.h + b.w * b.h - inter);
  return r > 1.0 ? 1.0 : r;
}

// Exhaustive search over all matchings of one frame, GTs taken in uid order.
class Enumerator {
 public:
  Enumerator(std::span<const EntityFrame> gt_frames, std::span<const EntityFrame> pred_frames,
             const Eligibility& eligible, double iou_min) {
    for (const auto& ef : gt_frames) gts_.push_back(&ef);
    for (const auto& ef : pred_frames) preds_.push_back(&ef);
    const auto by_uid = [](const EntityFrame* a, const EntityFrame* b) { return a->uid < b->uid; };
    std::sort(gts_.begin(), gts_.end(), by_uid);
    std::sort(preds_.begin(), preds_.end(), by_uid);
    feasible_.assign(gts_.size(), std::vector<char>(preds_.size(), false));
    iou_.assign(gts_.size(), std::vector<double>(preds_.size(), 0.0));
    for (std::size_t g = 0; g < gts_.size(); ++g) {
      for (std::size_t p = 0; p < preds_.size(); ++p) {
        iou_[g][p] = reference_iou(gts_[g]->box, preds_[p]->box);
        feasible_[g][p] = iou_[g][p] > iou_min && eligible(gts_[g]->uid, preds_[p]->uid);
      }
    }
    used_.assign(preds_.size(), false);
  }

  FrameMatching best() {
    // Pass 1: the best (cardinality, total); pass 2: the smallest pair list near it.
    pass_ = 1;
    recurse(0);
    pass_ = 2;
    recurse(0);

    FrameMatching out;
    if (!gts_.empty()) out.frame = gts_.front()->frame;
    for (const auto& [g, p] : best_pairs_) out.pairs.push_back(MatchPair{gts_[g]->uid, preds_[p]->uid, iou_[g][p]});
    return out;
  }

 private:
  double total(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const {
    double sum = 0.0;
    for (const auto& [g, p] : pairs) sum += iou_[g][p];
    return sum;
  }

  void visit_leaf() {
    const double t = total(current_);
    if (pass_ == 1) {
      if (current_.size() > best_card_ || (current_.size() == best_card_ && t > best_total_)) {
        best_card_ = current_.size();
        best_total_ = t;
      }
      return;
    }
    if (current_.size() != best_card_ || t < best_total_ - kTotalIouTieTolerance) return;
    if (!have_best_ || current_ < best_pairs_) {
      best_pairs_ = current_;
      have_best_ = true;
    }
  }

  void recurse(std::size_t g) {
    if (g == gts_.size()) {
      visit_leaf();
      return;
    }
    recurse(g + 1);  // g stays unmatched
    for (std::size_t p = 0; p < preds_.size(); ++p) {
      if (used_[p] || !feasible_[g][p]) continue;
      used_[p] = true;
      current_.emplace_back(g, p);
      recurse(g + 1);
      current_.pop_back();
      used_[p] = false;
    }
  }

  std::vector<const EntityFrame*> gts_, preds_;
  std::vector<std::vector<char>> feasible_;
  std::vector<std::vector<double>> iou_;
  std::vector<char> used_;
  std::vector<std::pair<std::size_t, std::size_t>> current_, best_pairs_;
  int pass_ = 1;
  std::size_t best_card_ = 0;
  double best_total_ = 0.0;
  bool have_best_ = false;
};

}  // namespace

FrameMatching brute_force_match(std::span<const EntityFrame> gt_frames,
                                std::span<const EntityFrame> pred_frames, const Eligibility& eligible,
                                double iou_min) {
  if (gt_frames.size() > kMaxBruteForceBoxes || pred_frames.size() > kMaxBruteForceBoxes) {
    throw EvaluationError("brute_force_match: at most " + std::to_string(kMaxBruteForceBoxes) +
                          " boxes per side");
  }
  return Enumerator(gt_frames, pred_frames, eligible, iou_min).best();
}

BruteForceCurves brute_force_curves(const TrackSet& gt, const TrackSet& pred, const EvalConfig& cfg,
                                    UidCriterion criterion) {
  const int video = gt.video_length();
  if (pred.video_length() != video) throw EvaluationError("brute_force_curves: video lengths differ");
  if (video > kMaxBruteForceVideoLength || gt.uids().size() > kMaxBruteForceEntities) {
    throw EvaluationError("brute_force_curves: scenario exceeds the oracle's size bound");
  }

  // Association fold, keeping the per-frame state.
  std::map<std::string, std::string> pred_to_gt, gt_first;
  std::vector<std::map<std::string, std::string>> assoc_at(static_cast<std::size_t>(video));
  std::vector<std::map<std::string, std::pair<std::string, double>>> matched(static_cast<std::size_t>(video));
  for (int f = 0; f < video; ++f) {
    const Eligibility ok = [&](const std::string& g, const std::string& p) {
      if (pred_to_gt.contains(p) && pred_to_gt.at(p) != g) return false;
      if (criterion == UidCriterion::Original && gt_first.contains(g) && gt_first.at(g) != p) return false;
      return true;
    };
    const FrameMatching m = Enumerator(gt.at_frame(f), pred.at_frame(f), ok, cfg.iou_min).best();
    for (const auto& pair : m.pairs) {
      pred_to_gt.try_emplace(pair.pred_uid, pair.gt_uid);
      gt_first.try_emplace(pair.gt_uid, pair.pred_uid);
      matched[static_cast<std::size_t>(f)][pair.gt_uid] = {pair.pred_uid, pair.iou};
    }
    assoc_at[static_cast<std::size_t>(f)] = pred_to_gt;
  }

  struct Seq {
    std::string uid;
    int first = 0;
    int length = 0;
    std::set<int> present;
  };
  std::vector<Seq> seqs;
  int max_gt = 0;
  for (const std::string& uid : gt.uids()) {
    const auto frames = gt.frames_of(uid);
    Seq s{uid, frames.front(), video - frames.front(), std::set<int>(frames.begin(), frames.end())};
    max_gt = std::max(max_gt, s.length);
    seqs.push_back(std::move(s));
  }

  std::vector<int> orphan_lengths;
  std::vector<std::vector<int>> orphan_frames;
  for (const std::string& uid : pred.uids()) {
    if (pred_to_gt.contains(uid)) continue;
    const auto frames = pred.frames_of(uid);
    orphan_lengths.push_back(video - frames.front());
    orphan_frames.push_back(frames);
  }
  int max_precision = max_gt;
  for (int len : orphan_lengths) max_precision = std::max(max_precision, len);

  auto matched_iou = [&](int f, const std::string& g, const std::string& p) {
    const auto& frame = matched[static_cast<std::size_t>(f)];
    const auto it = frame.find(g);
    return it != frame.end() && it->second.first == p ? it->second.second : 0.0;
  };
  auto finish = [&](double mean_sum, int contributors, double pooled_sum, long pooled_n) -> std::optional<double> {
    if (cfg.pooled_averaging) return pooled_n > 0 ? std::optional(pooled_sum / static_cast<double>(pooled_n)) : std::nullopt;
    return contributors > 0 ? std::optional(mean_sum / contributors) : std::nullopt;
  };

  BruteForceCurves out;
  for (int t = 1; t <= max_gt; ++t) {
    double mean_sum = 0.0, pooled_sum = 0.0;
    int contributors = 0, support = 0;
    long pooled_n = 0;
    for (const Seq& s : seqs) {
      if (s.length < t) continue;
      ++support;
      double sum = 0.0;
      int n = 0;
      for (int f = s.first; f < s.first + t; ++f) {
        if (!s.present.contains(f)) continue;
        ++n;
        const auto& frame = matched[static_cast<std::size_t>(f)];
        if (const auto it = frame.find(s.uid); it != frame.end()) sum += it->second.second;
      }
      if (n == 0) continue;
      ++contributors;
      mean_sum += sum / n;
      pooled_sum += sum;
      pooled_n += n;
    }
    out.recall.points.push_back(LengthPoint{t, finish(mean_sum, contributors, pooled_sum, pooled_n), support});

    LongevityPoint lp{t, 0, 0, 0.0};
    for (const Seq& s : seqs) {
      if (s.length < t) continue;
      ++lp.total;
      bool ok = true;
      for (int f = s.first; f < s.first + t && ok; ++f) {
        if (s.present.contains(f)) {
          ok = matched[static_cast<std::size_t>(f)].contains(s.uid);
        } else {
          for (const auto& ef : pred.at_frame(f)) {
            const auto& assoc = assoc_at[static_cast<std::size_t>(f)];
            if (const auto it = assoc.find(ef.uid); it != assoc.end() && it->second == s.uid) ok = false;
          }
        }
      }
      lp.successes += ok;
    }
    lp.rate = static_cast<double>(lp.successes) / lp.total;
    out.longevity.points.push_back(lp);
  }

  for (int t = 1; t <= max_precision; ++t) {
    double mean_sum = 0.0, pooled_sum = 0.0;
    int contributors = 0, support = 0;
    long pooled_n = 0;
    for (const Seq& s : seqs) {
      if (s.length < t) continue;
      ++support;
      double sum = 0.0;
      int n = 0;
      for (int f = s.first; f < s.first + t; ++f) {
        for (const auto& ef : pred.at_frame(f)) {
          const auto it = pred_to_gt.find(ef.uid);
          if (it == pred_to_gt.end() || it->second != s.uid) continue;
          ++n;
          sum += matched_iou(f, s.uid, ef.uid);
        }
      }
      if (n == 0) continue;
      ++contributors;
      mean_sum += sum / n;
      pooled_sum += sum;
      pooled_n += n;
    }
    for (std::size_t o = 0; o < orphan_lengths.size(); ++o) {
      if (orphan_lengths[o] < t) continue;
      ++support;
      ++contributors;
      for (int f : orphan_frames[o]) pooled_n += f < orphan_frames[o].front() + t;
    }
    out.precision.points.push_back(LengthPoint{t, finish(mean_sum, contributors, pooled_sum, pooled_n), support});
  }
  return out;
}

}  // namespace monce::oracle
