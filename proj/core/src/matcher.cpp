#include "monce/matcher.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "monce/assignment.hpp"
#include "monce/error.hpp"

namespace monce {

std::string_view to_string(UidCriterion criterion) noexcept {
  return criterion == UidCriterion::Any ? "any_uid" : "original_uid";
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  // Edge arithmetic can lose the last bit on identical boxes.
  if (a == b) return a.area() > 0.0 ? 1.0 : 0.0;
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

bool eligible(const AssociationState& state, const std::string& gt_uid, const std::string& pred_uid,
              UidCriterion criterion) {
  if (const auto it = state.pred_to_gt.find(pred_uid);
      it != state.pred_to_gt.end() && it->second != gt_uid) {
    return false;
  }
  if (criterion == UidCriterion::Original) {
    if (const auto it = state.gt_to_first_pred.find(gt_uid);
        it != state.gt_to_first_pred.end() && it->second != pred_uid) {
      return false;
    }
  }
  return true;
}

double FrameMatching::total_iou() const noexcept {
  double total = 0.0;
  for (const auto& pair : pairs) total += pair.iou;
  return total;
}

const MatchPair* FrameMatching::find_gt(std::string_view gt_uid) const noexcept {
  const auto it = std::lower_bound(pairs.begin(), pairs.end(), gt_uid,
                                   [](const MatchPair& p, std::string_view uid) { return p.gt_uid < uid; });
  return it != pairs.end() && it->gt_uid == gt_uid ? &*it : nullptr;
}

namespace {

struct Candidate {
  std::size_t gt = 0;    // index into the uid-sorted GT list
  std::size_t pred = 0;  // index into the uid-sorted prediction list
  double iou = 0.0;
};

// Rounding allowance on reduced costs before a candidate is ruled out.
constexpr double kSlackMargin = 1e-7;

// Candidates of one connected component, sorted lexicographically by (gt, pred).
class ComponentSolver {
 public:
  explicit ComponentSolver(std::vector<Candidate> candidates) : cands_(std::move(candidates)) {}

  // Candidate indices of the lexicographic optimum, ascending.
  std::vector<std::size_t> solve() const {
    if (cands_.size() == 1) return {0};

    std::vector<char> allowed(cands_.size(), true);
    std::vector<double> slack;
    std::vector<std::size_t> current = max_matching(allowed, &slack);
    const std::size_t best_card = current.size();
    const double best_total = total(current);

    std::vector<std::size_t> chosen;
    std::set<std::size_t> used_gt, used_pred;
    std::size_t start = 0;
    while (chosen.size() < best_card) {
      bool extended = false;
      for (std::size_t k = start; k < cands_.size() && !extended; ++k) {
        const Candidate& e = cands_[k];
        if (used_gt.contains(e.gt) || used_pred.contains(e.pred)) continue;
        // No optimum within tolerance can use k.
        if (slack[k] > kTotalIouTieTolerance + kSlackMargin) continue;

        // The current optimum extends every prefix of itself.
        bool accept = std::binary_search(current.begin(), current.end(), k);
        if (!accept) {
          for (std::size_t j = 0; j < cands_.size(); ++j) {
            const Candidate& c = cands_[j];
            allowed[j] = j > k && c.gt != e.gt && c.pred != e.pred && !used_gt.contains(c.gt) &&
                         !used_pred.contains(c.pred);
          }
          std::vector<std::size_t> trial = max_matching(allowed);
          trial.insert(trial.end(), chosen.begin(), chosen.end());
          trial.push_back(k);
          std::sort(trial.begin(), trial.end());
          if (trial.size() == best_card && total(trial) >= best_total - kTotalIouTieTolerance) {
            current = std::move(trial);
            accept = true;
          }
        }
        if (accept) {
          chosen.push_back(k);
          used_gt.insert(e.gt);
          used_pred.insert(e.pred);
          start = k + 1;
          extended = true;
        }
      }
      if (!extended) throw InternalError("match_frame: lexicographic refinement lost the optimum");
    }
    return chosen;
  }

 private:
  double total(const std::vector<std::size_t>& picks) const {
    double sum = 0.0;
    for (std::size_t k : picks) sum += cands_[k].iou;
    return sum;
  }

  // Maximum (cardinality, total IOU) over the allowed candidates. `slack`
  // receives each candidate's reduced cost under the optimal duals.
  std::vector<std::size_t> max_matching(const std::vector<char>& allowed,
                                        std::vector<double>* slack = nullptr) const {
    std::vector<std::size_t> rows, cols;
    for (std::size_t k = 0; k < cands_.size(); ++k) {
      if (!allowed[k]) continue;
      rows.push_back(cands_[k].gt);
      cols.push_back(cands_[k].pred);
    }
    if (rows.empty()) return {};
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    const std::size_t n = rows.size(), m = cols.size();
    // One matched pair outweighs any achievable IOU total.
    const double bonus = static_cast<double>(std::min(n, m)) + 1.0;
    std::vector<double> cost(n * m, 0.0);
    std::vector<long> cand_at(n * m, -1);
    for (std::size_t k = 0; k < cands_.size(); ++k) {
      if (!allowed[k]) continue;
      const auto r = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), cands_[k].gt) - rows.begin());
      const auto c = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), cands_[k].pred) - cols.begin());
      cost[r * m + c] = -(bonus + cands_[k].iou);
      cand_at[r * m + c] = static_cast<long>(k);
    }

    const AssignmentSolution sol = solve_assignment(cost, n, m);
    const std::vector<int>& assignment = sol.row_to_col;
    if (slack) {
      slack->assign(cands_.size(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          const long k = cand_at[r * m + c];
          if (k >= 0) (*slack)[static_cast<std::size_t>(k)] = cost[r * m + c] - sol.row_dual[r] - sol.col_dual[c];
        }
      }
    }
    std::vector<std::size_t> picks;
    for (std::size_t r = 0; r < n; ++r) {
      if (assignment[r] < 0) continue;
      const long k = cand_at[r * m + static_cast<std::size_t>(assignment[r])];
      if (k >= 0) picks.push_back(static_cast<std::size_t>(k));
    }
    std::sort(picks.begin(), picks.end());
    return picks;
  }

  std::vector<Candidate> cands_;
};

std::vector<const EntityFrame*> sorted_by_uid(std::span<const EntityFrame> frames) {
  std::vector<const EntityFrame*> out;
  out.reserve(frames.size());
  for (const auto& ef : frames) out.push_back(&ef);
  std::sort(out.begin(), out.end(), [](const EntityFrame* a, const EntityFrame* b) { return a->uid < b->uid; });
  return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

FrameMatching match_frame(std::span<const EntityFrame> gt_frames,
                          std::span<const EntityFrame> pred_frames, const AssociationState& state,
                          UidCriterion criterion, double iou_min) {
  FrameMatching result;
  if (!gt_frames.empty()) result.frame = gt_frames.front().frame;
  else if (!pred_frames.empty()) result.frame = pred_frames.front().frame;
  if (gt_frames.empty() || pred_frames.empty()) return result;

  const auto gts = sorted_by_uid(gt_frames);
  const auto preds = sorted_by_uid(pred_frames);

  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < preds.size(); ++p) {
      const double overlap = iou(gts[g]->box, preds[p]->box);
      if (overlap <= iou_min) continue;
      if (!eligible(state, gts[g]->uid, preds[p]->uid, criterion)) continue;
      candidates.push_back(Candidate{g, p, overlap});
    }
  }
  if (candidates.empty()) return result;

  // Components of the candidate graph are independent subproblems. Nodes are
  // GT indices followed by prediction indices.
  std::vector<std::size_t> parent(gts.size() + preds.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (const auto& c : candidates) {
    parent[find_root(parent, c.gt)] = find_root(parent, gts.size() + c.pred);
  }
  std::map<std::size_t, std::vector<Candidate>> components;
  for (const auto& c : candidates) components[find_root(parent, c.gt)].push_back(c);

  for (auto& [root, members] : components) {
    const ComponentSolver solver(members);
    for (std::size_t k : solver.solve()) {
      const Candidate& c = members[k];
      result.pairs.push_back(MatchPair{gts[c.gt]->uid, preds[c.pred]->uid, c.iou});
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end(), [](const MatchPair& a, const MatchPair& b) {
    return std::tie(a.gt_uid, a.pred_uid) < std::tie(b.gt_uid, b.pred_uid);
  });
  return result;
}

AssociationState advance_association(AssociationState state, const FrameMatching& matching) {
  for (const auto& pair : matching.pairs) {
    const auto [pit, p_new] = state.pred_to_gt.try_emplace(pair.pred_uid, pair.gt_uid);
    if (!p_new && pit->second != pair.gt_uid) {
      throw InternalError("association conflict: predicted uid " + pair.pred_uid + " already bound to " +
                          pit->second + ", matched to " + pair.gt_uid);
    }
    state.gt_to_first_pred.try_emplace(pair.gt_uid, pair.pred_uid);
  }
  return state;
}

OutcomeTable classify(const TrackSet& gt, const TrackSet& pred, UidCriterion criterion,
                      const EvalConfig& cfg) {
  if (gt.video_length() != pred.video_length()) {
    throw EvaluationError("ground truth and predictions disagree on video length (" +
                          std::to_string(gt.video_length()) + " vs " +
                          std::to_string(pred.video_length()) + ")");
  }

  OutcomeTable table;
  table.criterion = criterion;
  table.video_length = gt.video_length();

  const std::vector<GroundTruthSequence> sequences = build_sequences(gt);
  for (const auto& seq : sequences) {
    table.sequences.push_back(SequenceOutcomes{seq.gt_uid, seq.first_frame,
                                               std::vector<FrameOutcome>(static_cast<std::size_t>(seq.length))});
  }

  AssociationState state;
  table.matchings.reserve(static_cast<std::size_t>(table.video_length));
  for (int f = 0; f < table.video_length; ++f) {
    const auto gt_frames = gt.at_frame(f);
    const auto pred_frames = pred.at_frame(f);
    FrameMatching matching = match_frame(gt_frames, pred_frames, state, criterion, cfg.iou_min);
    matching.frame = f;
    state = advance_association(std::move(state), matching);

    std::set<std::string> matched_preds;
    for (const auto& pair : matching.pairs) matched_preds.insert(pair.pred_uid);

    std::set<std::string> attributed_gts;
    for (const auto& ef : pred_frames) {
      const auto it = state.pred_to_gt.find(ef.uid);
      if (it != state.pred_to_gt.end()) {
        if (!matched_preds.contains(ef.uid)) attributed_gts.insert(it->second);
      } else {
        table.orphan_predictions.push_back(OrphanPrediction{f, ef.uid});
      }
    }

    for (std::size_t s = 0; s < sequences.size(); ++s) {
      const GroundTruthSequence& seq = sequences[s];
      if (f < seq.first_frame) continue;
      FrameOutcome& out = table.sequences[s].frames[static_cast<std::size_t>(f - seq.first_frame)];
      if (seq.present_at_frame(f)) {
        if (const MatchPair* pair = matching.find_gt(seq.gt_uid)) out = {Outcome::TruePositive, pair->iou};
        else out = {Outcome::FalseNegative, 0.0};
      } else {
        out = {attributed_gts.contains(seq.gt_uid) ? Outcome::FalsePositiveAttributed : Outcome::TrueNegative, 0.0};
      }
    }
    table.matchings.push_back(std::move(matching));
  }
  table.final_state = std::move(state);
  return table;
}

}  // namespace monce
