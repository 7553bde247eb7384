#include "monce/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "monce/error.hpp"

namespace monce {

using json = nlohmann::ordered_json;

namespace detail {

std::string_view trim(std::string_view text) noexcept {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view text, std::string_view what, std::size_t line) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ParseError("invalid number for " + std::string(what) + ": '" + std::string(t) + "'", line);
  }
  return value;
}

long parse_integer(std::string_view text, std::string_view what, std::size_t line) {
  const std::string_view t = trim(text);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("invalid integer for " + std::string(what) + ": '" + std::string(t) + "'", line);
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what, std::size_t line) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ParseError("invalid boolean for " + std::string(what) + ": '" + std::string(t) + "'", line);
}

}  // namespace detail

using detail::split;
using detail::trim;

std::vector<KeyValue> read_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    out.push_back(KeyValue{std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// track files

TrackSet parse_track_text(std::string_view text) {
  std::vector<EntityFrame> rows;
  std::set<std::pair<int, std::string>> seen;
  bool have_header = false, with_conf = false;
  int max_frame = -1;
  std::size_t line_no = 0;

  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields = split(line, ',');
    for (auto& f : fields) f = trim(f);

    if (!have_header) {
      const bool base = fields.size() >= 6 && fields[0] == "frame" && fields[1] == "uid" &&
                        fields[2] == "x" && fields[3] == "y" && fields[4] == "w" && fields[5] == "h";
      if (!base || fields.size() > 7 || (fields.size() == 7 && fields[6] != "conf")) {
        throw ParseError("expected header 'frame,uid,x,y,w,h[,conf]'", line_no);
      }
      have_header = true;
      with_conf = fields.size() == 7;
      continue;
    }

    if (fields.size() != (with_conf ? 7u : 6u) && !(with_conf && fields.size() == 6)) {
      throw ParseError("expected " + std::to_string(with_conf ? 7 : 6) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    EntityFrame ef;
    const long frame = detail::parse_integer(fields[0], "frame", line_no);
    if (frame < 0 || frame > 100'000'000) throw ParseError("frame out of range", line_no);
    ef.frame = static_cast<int>(frame);
    if (fields[1].empty()) throw ParseError("empty uid", line_no);
    ef.uid = std::string(fields[1]);
    ef.box = BoundingBox{detail::parse_real(fields[2], "x", line_no), detail::parse_real(fields[3], "y", line_no),
                         detail::parse_real(fields[4], "w", line_no), detail::parse_real(fields[5], "h", line_no)};
    if (!ef.box.valid()) throw ParseError("degenerate box (w and h must be positive)", line_no);
    if (fields.size() == 7 && !fields[6].empty()) {
      const double conf = detail::parse_real(fields[6], "conf", line_no);
      if (conf < 0.0 || conf > 1.0) throw ParseError("conf must lie in [0, 1]", line_no);
      ef.confidence = conf;
    }
    if (!seen.emplace(ef.frame, ef.uid).second) {
      throw ParseError("duplicate entity-frame (" + std::to_string(ef.frame) + ", " + ef.uid + ")", line_no);
    }
    max_frame = std::max(max_frame, ef.frame);
    rows.push_back(std::move(ef));
  }
  if (!have_header) throw ParseError("empty track file", 0);
  return TrackSet(std::move(rows), max_frame + 1);
}

TrackSet parse_track_file(const std::filesystem::path& path, TrackFormat format) {
  if (format != TrackFormat::MonceCsv) throw Error("unsupported track format");
  const std::string text = read_text_file(path);
  try {
    return parse_track_text(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::string format_track_csv(const TrackSet& track) {
  bool with_conf = false;
  for (const auto& ef : track.entity_frames()) with_conf = with_conf || ef.confidence.has_value();

  std::string out = with_conf ? "frame,uid,x,y,w,h,conf\n" : "frame,uid,x,y,w,h\n";
  char buf[32];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    out.push_back(',');
    out.append(buf, res.ptr);
  };
  for (const auto& ef : track.entity_frames()) {
    out += std::to_string(ef.frame);
    out.push_back(',');
    out += ef.uid;
    put(ef.box.x);
    put(ef.box.y);
    put(ef.box.w);
    put(ef.box.h);
    if (with_conf) {
      if (ef.confidence) put(*ef.confidence);
      else out.push_back(',');
    }
    out.push_back('\n');
  }
  return out;
}

void write_track_file(const TrackSet& track, const std::filesystem::path& path) {
  write_text_file(path, format_track_csv(track));
}

// ---------------------------------------------------------------------------
// config

EvalConfig parse_config_text(std::string_view text) {
  EvalConfig cfg;
  std::set<std::string> seen;
  for (const KeyValue& kv : read_key_values(text)) {
    if (!seen.insert(kv.key).second) throw ConfigError(kv.key, "given more than once");
    try {
      if (kv.key == "iou_min") {
        cfg.iou_min = detail::parse_real(kv.value, kv.key, kv.line);
      } else if (kv.key == "reid_threshold") {
        cfg.reid_threshold = static_cast<int>(detail::parse_integer(kv.value, kv.key, kv.line));
      } else if (kv.key == "kde_density_fraction") {
        cfg.kde_density_fraction = detail::parse_real(kv.value, kv.key, kv.line);
      } else if (kv.key == "kde_bandwidth_rule") {
        if (kv.value == "silverman") cfg.kde_bandwidth_rule = BandwidthRule::Silverman;
        else if (kv.value == "fixed") cfg.kde_bandwidth_rule = BandwidthRule::Fixed;
        else throw ConfigError(kv.key, "expected 'silverman' or 'fixed'");
      } else if (kv.key == "kde_bandwidth") {
        cfg.kde_fixed_bandwidth = detail::parse_real(kv.value, kv.key, kv.line);
      } else if (kv.key == "localization_grid_step") {
        cfg.localization_grid_step = detail::parse_real(kv.value, kv.key, kv.line);
      } else if (kv.key == "use_kde_range") {
        cfg.use_kde_range = detail::parse_bool(kv.value, kv.key, kv.line);
      } else if (kv.key == "pooled_averaging") {
        cfg.pooled_averaging = detail::parse_bool(kv.value, kv.key, kv.line);
      } else if (kv.key == "longevity_levels") {
        cfg.longevity_levels.clear();
        for (std::string_view level : split(kv.value, ',')) {
          cfg.longevity_levels.push_back(detail::parse_real(level, kv.key, kv.line));
        }
      } else if (kv.key == "video_length") {
        cfg.video_length = static_cast<int>(detail::parse_integer(kv.value, kv.key, kv.line));
      } else {
        throw ConfigError(kv.key, "unknown key");
      }
    } catch (const ParseError& e) {
      throw ConfigError(kv.key, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

EvalConfig parse_config(const std::filesystem::path& path) { return parse_config_text(read_text_file(path)); }

// ---------------------------------------------------------------------------
// report

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

UidCriterion criterion_from(const std::string& name) {
  if (name == "any_uid") return UidCriterion::Any;
  if (name == "original_uid") return UidCriterion::Original;
  throw ParseError("unknown criterion '" + name + "'", 0);
}

json stats_json(const std::vector<LongevityStat>& stats) {
  json out = json::array();
  for (const auto& s : stats) out.push_back({{"level", s.level}, {"length", s.length}});
  return out;
}

std::vector<LongevityStat> stats_from(const json& j) {
  std::vector<LongevityStat> out;
  for (const auto& s : j) out.push_back(LongevityStat{s.at("level").get<double>(), s.at("length").get<int>()});
  return out;
}

json reid_json(const ReidRates& r) {
  return {{"threshold", r.threshold},
          {"short_rate", optional_number(r.short_rate)},
          {"short_count", r.short_count},
          {"long_rate", optional_number(r.long_rate)},
          {"long_count", r.long_count}};
}

ReidRates reid_from(const json& j) {
  ReidRates r;
  r.threshold = j.at("threshold").get<int>();
  r.short_rate = read_optional(j.at("short_rate"));
  r.short_count = j.at("short_count").get<int>();
  r.long_rate = read_optional(j.at("long_rate"));
  r.long_count = j.at("long_count").get<int>();
  return r;
}

json length_curve_json(const LengthCurve& c) {
  json lengths = json::array(), values = json::array(), support = json::array();
  for (const auto& p : c.points) {
    lengths.push_back(p.length);
    values.push_back(optional_number(p.value));
    support.push_back(p.support);
  }
  return {{"length", lengths}, {"value", values}, {"support", support}};
}

LengthCurve length_curve_from(const json& j) {
  LengthCurve c;
  const auto& lengths = j.at("length");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    c.points.push_back(LengthPoint{lengths[i].get<int>(), read_optional(j.at("value").at(i)),
                                   j.at("support").at(i).get<int>()});
  }
  return c;
}

json config_json(const EvalConfig& cfg) {
  return {{"iou_min", cfg.iou_min},
          {"reid_threshold", cfg.reid_threshold},
          {"kde_density_fraction", cfg.kde_density_fraction},
          {"kde_bandwidth_rule", cfg.kde_bandwidth_rule == BandwidthRule::Silverman ? "silverman" : "fixed"},
          {"kde_bandwidth", cfg.kde_fixed_bandwidth},
          {"localization_grid_step", cfg.localization_grid_step},
          {"use_kde_range", cfg.use_kde_range},
          {"pooled_averaging", cfg.pooled_averaging},
          {"longevity_levels", cfg.longevity_levels},
          {"video_length", cfg.video_length ? json(*cfg.video_length) : json(nullptr)}};
}

EvalConfig config_from(const json& j) {
  EvalConfig cfg;
  cfg.iou_min = j.at("iou_min").get<double>();
  cfg.reid_threshold = j.at("reid_threshold").get<int>();
  cfg.kde_density_fraction = j.at("kde_density_fraction").get<double>();
  cfg.kde_bandwidth_rule =
      j.at("kde_bandwidth_rule").get<std::string>() == "fixed" ? BandwidthRule::Fixed : BandwidthRule::Silverman;
  cfg.kde_fixed_bandwidth = j.at("kde_bandwidth").get<double>();
  cfg.localization_grid_step = j.at("localization_grid_step").get<double>();
  cfg.use_kde_range = j.at("use_kde_range").get<bool>();
  cfg.pooled_averaging = j.at("pooled_averaging").get<bool>();
  cfg.longevity_levels = j.at("longevity_levels").get<std::vector<double>>();
  if (!j.at("video_length").is_null()) cfg.video_length = j.at("video_length").get<int>();
  return cfg;
}

json criterion_json(const CriterionReport& c) {
  json longevity = {{"length", json::array()}, {"successes", json::array()}, {"total", json::array()},
                    {"rate", json::array()}};
  for (const auto& p : c.longevity.points) {
    longevity["length"].push_back(p.length);
    longevity["successes"].push_back(p.successes);
    longevity["total"].push_back(p.total);
    longevity["rate"].push_back(p.rate);
  }
  json localization = {{"threshold", json::array()}, {"rate", json::array()}};
  for (const auto& p : c.localization) {
    localization["threshold"].push_back(p.threshold);
    localization["rate"].push_back(optional_number(p.rate));
  }
  json absence = {{"length", json::array()}, {"rate", json::array()}, {"support", json::array()}};
  for (const auto& p : c.absence) {
    absence["length"].push_back(p.length);
    absence["rate"].push_back(p.rate);
    absence["support"].push_back(p.support);
  }
  return {{"criterion", std::string(to_string(c.criterion))},
          {"eao", c.eao},
          {"eao_p", c.eao_p},
          {"longevity_stats", stats_json(c.longevity_stats)},
          {"reid", reid_json(c.reid)},
          {"orphan_predictions", c.orphan_predictions},
          {"recall", length_curve_json(c.recall)},
          {"precision", length_curve_json(c.precision)},
          {"longevity", longevity},
          {"localization", localization},
          {"absence", absence}};
}

CriterionReport criterion_from_json(const json& j) {
  CriterionReport c;
  c.criterion = criterion_from(j.at("criterion").get<std::string>());
  c.eao = j.at("eao").get<double>();
  c.eao_p = j.at("eao_p").get<double>();
  c.longevity_stats = stats_from(j.at("longevity_stats"));
  c.reid = reid_from(j.at("reid"));
  c.orphan_predictions = j.at("orphan_predictions").get<int>();
  c.recall = length_curve_from(j.at("recall"));
  c.precision = length_curve_from(j.at("precision"));
  const auto& lg = j.at("longevity");
  for (std::size_t i = 0; i < lg.at("length").size(); ++i) {
    c.longevity.points.push_back(LongevityPoint{lg["length"][i].get<int>(), lg["successes"][i].get<int>(),
                                                lg["total"][i].get<int>(), lg["rate"][i].get<double>()});
  }
  const auto& lc = j.at("localization");
  for (std::size_t i = 0; i < lc.at("threshold").size(); ++i) {
    c.localization.push_back(LocalizationPoint{lc["threshold"][i].get<double>(), read_optional(lc["rate"][i])});
  }
  const auto& ab = j.at("absence");
  for (std::size_t i = 0; i < ab.at("length").size(); ++i) {
    c.absence.push_back(
        AbsencePoint{ab["length"][i].get<int>(), ab["rate"][i].get<double>(), ab["support"][i].get<int>()});
  }
  return c;
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  json criteria = json::array();
  for (const auto& c : report.criteria) criteria.push_back(criterion_json(c));
  const json doc = {
      {"schema_version", report.schema_version},
      {"summary",
       {{"headline_criterion", std::string(to_string(report.headline))},
        {"eao", report.eao},
        {"eao_p", report.eao_p},
        {"longevity_stats", stats_json(report.longevity_stats)},
        {"reid", reid_json(report.reid)}}},
      {"kde_range",
       {{"t_lo", report.kde_range.t_lo},
        {"t_hi", report.kde_range.t_hi},
        {"bandwidth", report.kde_range.bandwidth},
        {"peak_length", report.kde_range.peak_length}}},
      {"criteria", criteria},
      {"config", config_json(report.config)},
      {"metadata",
       {{"video_length", report.metadata.video_length},
        {"gt_sequences", report.metadata.gt_sequences},
        {"gt_entity_frames", report.metadata.gt_entity_frames},
        {"pred_entity_frames", report.metadata.pred_entity_frames},
        {"absence_runs", report.metadata.absence_runs},
        {"range_rule", report.metadata.range_rule}}}};
  return doc.dump(2) + "\n";
}

MetricReport report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what(), 0);
  }
  try {
    MetricReport r;
    r.schema_version = doc.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw ParseError("unsupported report schema version " + std::to_string(r.schema_version), 0);
    }
    const auto& summary = doc.at("summary");
    r.headline = criterion_from(summary.at("headline_criterion").get<std::string>());
    r.eao = summary.at("eao").get<double>();
    r.eao_p = summary.at("eao_p").get<double>();
    r.longevity_stats = stats_from(summary.at("longevity_stats"));
    r.reid = reid_from(summary.at("reid"));
    const auto& kr = doc.at("kde_range");
    r.kde_range = KdeRange{kr.at("t_lo").get<int>(), kr.at("t_hi").get<int>(), kr.at("bandwidth").get<double>(),
                           kr.at("peak_length").get<int>()};
    for (const auto& c : doc.at("criteria")) r.criteria.push_back(criterion_from_json(c));
    r.config = config_from(doc.at("config"));
    const auto& md = doc.at("metadata");
    r.metadata = ReportMetadata{md.at("video_length").get<int>(),     md.at("gt_sequences").get<int>(),
                                md.at("gt_entity_frames").get<int>(), md.at("pred_entity_frames").get<int>(),
                                md.at("absence_runs").get<int>(),     md.at("range_rule").get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0);
  }
}

void write_report(const MetricReport& report, const std::filesystem::path& path) {
  write_text_file(path, report_to_json(report));
}

MetricReport read_report(const std::filesystem::path& path) { return report_from_json(read_text_file(path)); }

}  // namespace monce
