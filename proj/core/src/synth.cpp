#include "monce/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "monce/error.hpp"
#include "monce/io.hpp"

namespace monce::synth {

BoundingBox EntitySpec::box_at(int frame) const noexcept {
  const double dt = frame - birth;
  return BoundingBox{x + vx * dt, y + vy * dt, w, h};
}

bool EntitySpec::present_at(int frame) const noexcept {
  if (frame < birth || frame > end) return false;
  return std::none_of(absences.begin(), absences.end(),
                      [frame](const FrameSpan& a) { return frame >= a.first && frame <= a.last; });
}

namespace {

// Platform-independent draws on top of the standard engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct Row {
  EntityFrame ef;
  int entity = -1;  // -1 for clutter
};

bool matches(const std::string& selector, const EntitySpec& e) { return selector == "*" || selector == e.uid; }

bool overlaps(const BoundingBox& a, const BoundingBox& b) {
  return std::min(a.x + a.w, b.x + b.w) > std::max(a.x, b.x) && std::min(a.y + a.h, b.y + b.h) > std::max(a.y, b.y);
}

class Generator {
 public:
  Generator(const Scenario& s, std::uint64_t seed) : s_(s), rng_(seed) {
    for (std::size_t i = 0; i < s_.entities.size(); ++i) index_[s_.entities[i].uid] = static_cast<int>(i);
    for (std::size_t i = 0; i < s_.entities.size(); ++i) {
      const EntitySpec& e = s_.entities[i];
      for (int f = e.birth; f <= e.end; ++f) {
        if (e.present_at(f)) gt_.push_back(Row{EntityFrame{f, e.uid, e.box_at(f), std::nullopt}, static_cast<int>(i)});
      }
    }
    pred_ = gt_;
  }

  std::pair<TrackSet, TrackSet> run() {
    for (const Degradation& d : s_.degradations) std::visit([this](const auto& x) { apply(x); }, d);
    try {
      return {TrackSet(strip(gt_), s_.video_length), TrackSet(strip(pred_), s_.video_length)};
    } catch (const EvaluationError& e) {
      throw ConfigError("degradation", std::string("degradations produced an invalid stream: ") + e.what());
    }
  }

 private:
  static std::vector<EntityFrame> strip(const std::vector<Row>& rows) {
    std::vector<EntityFrame> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.ef);
    return out;
  }

  void apply(const UidSwap& d) {
    const int a = index_.at(d.uid_a), b = index_.at(d.uid_b);
    for (int f = d.frame; f < d.frame + d.frames; ++f) {
      Row* ra = find(a, f);
      Row* rb = find(b, f);
      if (ra && rb) std::swap(ra->ef.uid, rb->ef.uid);
      else if (ra) ra->ef.uid = d.uid_b;
      else if (rb) rb->ef.uid = d.uid_a;
    }
  }

  void apply(const Drop& d) {
    std::erase_if(pred_, [&](const Row& r) {
      if (r.entity < 0 || !matches(d.uid, s_.entities[static_cast<std::size_t>(r.entity)])) return false;
      if (r.ef.frame < d.span.first || r.ef.frame > d.span.last) return false;
      return d.probability >= 1.0 || rng_.chance(d.probability);
    });
  }

  void apply(const Jitter& d) {
    for (Row& r : pred_) {
      if (r.entity < 0 || !matches(d.uid, s_.entities[static_cast<std::size_t>(r.entity)])) continue;
      r.ef.box.x += rng_.uniform(-d.offset, d.offset);
      r.ef.box.y += rng_.uniform(-d.offset, d.offset);
    }
  }

  void apply(const Clutter& d) {
    std::map<int, std::vector<BoundingBox>> gt_boxes;
    for (const Row& r : gt_) gt_boxes[r.ef.frame].push_back(r.ef.box);
    for (int f = 0; f < s_.video_length; ++f) {
      const auto& occupied = gt_boxes[f];
      for (int k = 0; k < d.boxes_per_frame; ++k) {
        BoundingBox box;
        int attempts = 0;
        do {
          if (++attempts > 10000) throw ConfigError("clutter", "no room for clutter boxes away from ground truth");
          box = BoundingBox{rng_.uniform(0.0, s_.canvas_w - d.w), rng_.uniform(0.0, s_.canvas_h - d.h), d.w, d.h};
        } while (std::any_of(occupied.begin(), occupied.end(), [&](const BoundingBox& g) { return overlaps(g, box); }));
        pred_.push_back(Row{EntityFrame{f, "clutter-" + std::to_string(clutter_count_++), box, std::nullopt}, -1});
      }
    }
  }

  void apply(const StaleHold& d) {
    std::set<std::pair<int, std::string>> taken;
    for (const Row& r : pred_) taken.emplace(r.ef.frame, r.ef.uid);
    std::vector<Row> extra;
    for (std::size_t i = 0; i < s_.entities.size(); ++i) {
      const EntitySpec& e = s_.entities[i];
      if (!matches(d.uid, e)) continue;
      for (int f = e.birth; f + 1 < s_.video_length; ++f) {
        if (!e.present_at(f) || e.present_at(f + 1)) continue;
        const Row* last = find(static_cast<int>(i), f);
        const std::string uid = last ? last->ef.uid : e.uid;
        const BoundingBox box = last ? last->ef.box : e.box_at(f);
        for (int g = f + 1; g <= f + d.frames && g < s_.video_length && !e.present_at(g); ++g) {
          if (!taken.emplace(g, uid).second) continue;  // uid already in use at g after a swap
          extra.push_back(Row{EntityFrame{g, uid, box, std::nullopt}, static_cast<int>(i)});
        }
      }
    }
    pred_.insert(pred_.end(), extra.begin(), extra.end());
  }

  void apply(const UidReset& d) {
    auto& rows = d.target == ResetTarget::GroundTruth ? gt_ : pred_;
    for (Row& r : rows) r.ef.uid += "#" + std::to_string(r.ef.frame / d.period);
  }

  Row* find(int entity, int frame) {
    for (Row& r : pred_) {
      if (r.entity == entity && r.ef.frame == frame) return &r;
    }
    return nullptr;
  }

  const Scenario& s_;
  Rng rng_;
  std::map<std::string, int> index_;
  std::vector<Row> gt_, pred_;
  long clutter_count_ = 0;
};

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void validate(const Scenario& s) {
  require(s.video_length >= 1, "video_length", "must be positive");
  require(s.canvas_w > 0.0 && s.canvas_h > 0.0, "canvas", "must have positive size");
  require(!s.entities.empty(), "entity", "scenario needs at least one entity");

  std::set<std::string> uids;
  for (const EntitySpec& e : s.entities) {
    const std::string who = "entity '" + e.uid + "': ";
    require(!e.uid.empty() && e.uid.find_first_of(",# \t") == std::string::npos, "entity",
            who + "uid must be non-empty without ',', '#' or spaces");
    require(uids.insert(e.uid).second, "entity", who + "duplicate uid");
    require(e.birth >= 0 && e.birth <= e.end && e.end < s.video_length, "entity", who + "needs 0 <= birth <= end < video_length");
    require(e.w > 0.0 && e.h > 0.0, "entity", who + "box size must be positive");
    for (int f : {e.birth, e.end}) {
      const BoundingBox b = e.box_at(f);
      require(b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= s.canvas_w && b.y + b.h <= s.canvas_h, "entity",
              who + "box leaves the canvas at frame " + std::to_string(f));
    }
    std::vector<FrameSpan> spans = e.absences;
    std::sort(spans.begin(), spans.end(), [](const FrameSpan& a, const FrameSpan& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < spans.size(); ++k) {
      require(spans[k].first > e.birth && spans[k].first <= spans[k].last && spans[k].last <= e.end, "entity",
              who + "absence intervals must lie within (birth, end]");
      require(k == 0 || spans[k].first > spans[k - 1].last, "entity", who + "absence intervals overlap");
    }
  }

  auto known = [&](const std::string& uid, bool wildcard) { return (wildcard && uid == "*") || uids.contains(uid); };
  for (const Degradation& d : s.degradations) {
    if (const auto* x = std::get_if<UidSwap>(&d)) {
      require(known(x->uid_a, false) && known(x->uid_b, false) && x->uid_a != x->uid_b, "uid_swap",
              "needs two distinct known entity uids");
      require(x->frame >= 0 && x->frames >= 1 && x->frame + x->frames <= s.video_length, "uid_swap",
              "frames outside the video");
    } else if (const auto* x = std::get_if<Drop>(&d)) {
      require(known(x->uid, true), "drop", "unknown uid '" + x->uid + "'");
      require(x->span.first >= 0 && x->span.first <= x->span.last && x->span.last < s.video_length, "drop",
              "span outside the video");
      require(x->probability >= 0.0 && x->probability <= 1.0, "drop", "probability must lie in [0, 1]");
    } else if (const auto* x = std::get_if<Jitter>(&d)) {
      require(known(x->uid, true), "jitter", "unknown uid '" + x->uid + "'");
      require(x->offset >= 0.0 && std::isfinite(x->offset), "jitter", "offset must be non-negative");
    } else if (const auto* x = std::get_if<Clutter>(&d)) {
      require(x->boxes_per_frame >= 0, "clutter", "count must be non-negative");
      require(x->w > 0.0 && x->h > 0.0 && x->w <= s.canvas_w && x->h <= s.canvas_h, "clutter",
              "box size must be positive and fit the canvas");
    } else if (const auto* x = std::get_if<StaleHold>(&d)) {
      require(known(x->uid, true), "stale_hold", "unknown uid '" + x->uid + "'");
      require(x->frames >= 0, "stale_hold", "frames must be non-negative");
    } else if (const auto* x = std::get_if<UidReset>(&d)) {
      require(x->period >= 1, "uid_reset", "period must be at least 1 frame");
    }
  }
}

std::pair<TrackSet, TrackSet> generate(const Scenario& scenario, std::uint64_t seed) {
  validate(scenario);
  return Generator(scenario, seed).run();
}

// ---------------------------------------------------------------------------
// scenario text

namespace {

std::vector<std::string_view> tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

// `name=value` attributes of one entity or degradation line.
class Attributes {
 public:
  Attributes(std::span<const std::string_view> toks, const KeyValue& kv) : kv_(kv) {
    for (std::string_view t : toks) {
      const auto eq = t.find('=');
      if (eq == std::string_view::npos || eq == 0) throw ParseError("expected name=value, got '" + std::string(t) + "'", kv.line);
      if (!values_.emplace(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1))).second) {
        throw ParseError("attribute '" + std::string(t.substr(0, eq)) + "' repeated", kv.line);
      }
    }
  }

  std::string text(const std::string& name, std::optional<std::string> fallback = std::nullopt) {
    const auto it = values_.find(name);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ParseError(kv_.key + ": missing attribute '" + name + "'", kv_.line);
    }
    used_.insert(name);
    return it->second;
  }
  double real(const std::string& name, std::optional<double> fallback = std::nullopt) {
    if (!values_.contains(name) && fallback) return *fallback;
    return detail::parse_real(text(name), name, kv_.line);
  }
  int integer(const std::string& name, std::optional<int> fallback = std::nullopt) {
    if (!values_.contains(name) && fallback) return *fallback;
    return static_cast<int>(detail::parse_integer(text(name), name, kv_.line));
  }
  bool has(const std::string& name) const { return values_.contains(name); }

  void finish() const {
    for (const auto& [name, _] : values_) {
      if (!used_.contains(name)) throw ParseError(kv_.key + ": unknown attribute '" + name + "'", kv_.line);
    }
  }

 private:
  const KeyValue& kv_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::vector<FrameSpan> parse_spans(std::string_view text, std::size_t line) {
  std::vector<FrameSpan> out;
  if (text.empty()) return out;
  for (std::string_view part : detail::split(text, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string_view::npos) throw ParseError("absence must be first-last, got '" + std::string(part) + "'", line);
    out.push_back(FrameSpan{static_cast<int>(detail::parse_integer(part.substr(0, dash), "absent", line)),
                            static_cast<int>(detail::parse_integer(part.substr(dash + 1), "absent", line))});
  }
  return out;
}

EntitySpec parse_entity(const KeyValue& kv) {
  const auto toks = tokens(kv.value);
  Attributes a(toks, kv);
  EntitySpec e;
  e.uid = a.text("uid");
  e.birth = a.integer("birth");
  e.end = a.integer("end");
  e.x = a.real("x");
  e.y = a.real("y");
  e.vx = a.real("vx", 0.0);
  e.vy = a.real("vy", 0.0);
  e.w = a.real("w");
  e.h = a.real("h");
  e.absences = parse_spans(a.text("absent", std::string()), kv.line);
  a.finish();
  return e;
}

Degradation parse_degradation(const KeyValue& kv) {
  const auto toks = tokens(kv.value);
  if (toks.empty()) throw ParseError("degradation kind missing", kv.line);
  const std::string kind(toks.front());
  Attributes a{std::span(toks).subspan(1), kv};
  Degradation out;
  if (kind == "uid_swap") {
    out = UidSwap{a.integer("frame"), a.text("a"), a.text("b"), a.integer("frames", 1)};
  } else if (kind == "drop") {
    out = Drop{a.text("uid"), FrameSpan{a.integer("from"), a.integer("to")}, a.real("probability", 1.0)};
  } else if (kind == "jitter") {
    out = Jitter{a.text("uid", std::string("*")), a.real("offset")};
  } else if (kind == "clutter") {
    out = Clutter{a.integer("count"), a.real("w", 8.0), a.real("h", 8.0)};
  } else if (kind == "stale_hold") {
    out = StaleHold{a.text("uid", std::string("*")), a.integer("frames")};
  } else if (kind == "uid_reset") {
    const std::string target = a.text("target", std::string("pred"));
    if (target != "pred" && target != "gt") throw ParseError("uid_reset target must be 'pred' or 'gt'", kv.line);
    out = UidReset{a.integer("period"), target == "gt" ? ResetTarget::GroundTruth : ResetTarget::Predictions};
  } else {
    throw ParseError("unknown degradation '" + kind + "'", kv.line);
  }
  a.finish();
  return out;
}

}  // namespace

Scenario parse_scenario_text(std::string_view text) {
  Scenario s;
  bool have_length = false;
  for (const KeyValue& kv : read_key_values(text)) {
    if (kv.key == "video_length") {
      s.video_length = static_cast<int>(detail::parse_integer(kv.value, kv.key, kv.line));
      have_length = true;
    } else if (kv.key == "canvas") {
      const auto toks = tokens(kv.value);
      if (toks.size() != 2) throw ParseError("canvas needs width and height", kv.line);
      s.canvas_w = detail::parse_real(toks[0], "canvas", kv.line);
      s.canvas_h = detail::parse_real(toks[1], "canvas", kv.line);
    } else if (kv.key == "entity") {
      s.entities.push_back(parse_entity(kv));
    } else if (kv.key == "degradation") {
      s.degradations.push_back(parse_degradation(kv));
    } else {
      throw ConfigError(kv.key, "unknown scenario key");
    }
  }
  if (!have_length) throw ConfigError("video_length", "missing");
  validate(s);
  return s;
}

Scenario parse_scenario(const std::string& path) { return parse_scenario_text(read_text_file(path)); }

// ---------------------------------------------------------------------------
// random scenarios

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options) {
  Rng rng(seed);
  Scenario s;
  s.video_length = rng.integer(options.min_video_length, options.max_video_length);
  s.canvas_w = s.canvas_h = options.canvas;

  const int n = rng.integer(1, options.max_entities);
  for (int i = 0; i < n; ++i) {
    EntitySpec e;
    e.uid = "g" + std::to_string(i);
    e.birth = i == 0 ? 0 : rng.integer(0, s.video_length / 2);
    e.end = rng.chance(0.7) ? s.video_length - 1 : rng.integer(e.birth, s.video_length - 1);
    e.w = rng.uniform(12.0, 36.0);
    e.h = rng.uniform(12.0, 36.0);
    const double x0 = rng.uniform(0.0, options.canvas - e.w), y0 = rng.uniform(0.0, options.canvas - e.h);
    const double x1 = rng.uniform(0.0, options.canvas - e.w), y1 = rng.uniform(0.0, options.canvas - e.h);
    const int span = std::max(1, e.end - e.birth);
    e.x = x0;
    e.y = y0;
    e.vx = (x1 - x0) / span;
    e.vy = (y1 - y0) / span;
    int cursor = e.birth + 1;
    while (cursor + 1 <= e.end && rng.chance(0.45)) {
      const int first = rng.integer(cursor, e.end);
      const int last = std::min(e.end, first + rng.integer(0, 12));
      e.absences.push_back(FrameSpan{first, last});
      cursor = last + 2;
    }
    s.entities.push_back(std::move(e));
  }

  const int count = rng.integer(0, 4);
  for (int k = 0; k < count; ++k) {
    const auto pick = [&] { return s.entities[static_cast<std::size_t>(rng.integer(0, n - 1))].uid; };
    switch (rng.integer(0, options.allow_clutter ? 5 : 4)) {
      case 0:
        if (n >= 2) {
          const std::string a = pick();
          std::string b = pick();
          while (b == a) b = pick();
          const int frame = rng.integer(0, s.video_length - 1);
          s.degradations.push_back(UidSwap{frame, a, b, rng.integer(1, std::max(1, std::min(5, s.video_length - frame)))});
        }
        break;
      case 1: {
        const int first = rng.integer(0, s.video_length - 1);
        s.degradations.push_back(Drop{rng.chance(0.3) ? std::string("*") : pick(),
                                      FrameSpan{first, rng.integer(first, s.video_length - 1)}, rng.uniform(0.2, 1.0)});
        break;
      }
      case 2:
        s.degradations.push_back(Jitter{rng.chance(0.5) ? std::string("*") : pick(), rng.uniform(0.0, 8.0)});
        break;
      case 3:
        s.degradations.push_back(StaleHold{rng.chance(0.5) ? std::string("*") : pick(), rng.integer(1, 8)});
        break;
      case 4:
        s.degradations.push_back(UidReset{rng.integer(1, s.video_length), ResetTarget::Predictions});
        break;
      default:
        s.degradations.push_back(Clutter{rng.integer(1, 3), 6.0, 6.0});
        break;
    }
  }
  return s;
}

}  // namespace monce::synth
