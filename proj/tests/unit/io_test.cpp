#include <gtest/gtest.h>

#include <filesystem>

#include "json.hpp"

#include "builders.hpp"
#include "monce/error.hpp"
#include "monce/io.hpp"

namespace monce {
namespace {

using test::emit;

std::size_t parse_error_line(std::string_view text) {
  try {
    parse_track_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return 0;
}

TEST(ParseTracks, SingleRow) {
  const TrackSet t = parse_track_text("frame,uid,x,y,w,h\n0,a,0,0,10,10\n");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.video_length(), 1);
  EXPECT_EQ(t.entity_frames()[0].box, (BoundingBox{0, 0, 10, 10}));
  EXPECT_FALSE(t.entity_frames()[0].confidence);
}

TEST(ParseTracks, RowOrderDoesNotMatter) {
  const TrackSet sorted = parse_track_text("frame,uid,x,y,w,h\n0,a,0,0,1,1\n0,b,1,1,1,1\n3,a,2,2,1,1\n");
  const TrackSet shuffled = parse_track_text("frame,uid,x,y,w,h\n3,a,2,2,1,1\n0,b,1,1,1,1\n0,a,0,0,1,1\n");
  EXPECT_EQ(sorted, shuffled);
  EXPECT_EQ(sorted.video_length(), 4);
}

TEST(ParseTracks, CommentsBlankLinesAndWhitespace) {
  const TrackSet t = parse_track_text("# exported\n\nframe, uid, x, y, w, h, conf\n 2 , car 1 ,1.5,2,3,4, 0.75 \n# end\n");
  ASSERT_EQ(t.size(), 1u);
  const EntityFrame& ef = t.entity_frames()[0];
  EXPECT_EQ(ef.uid, "car 1");
  EXPECT_EQ(ef.frame, 2);
  EXPECT_EQ(ef.confidence, std::optional(0.75));
}

TEST(ParseTracks, UidsStayStrings) {
  const TrackSet t = parse_track_text("frame,uid,x,y,w,h\n0,007,0,0,1,1\n0,7,0,0,1,1\n");
  EXPECT_EQ(t.uids(), (std::vector<std::string>{"007", "7"}));
}

TEST(ParseTracks, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n0,a,0,0,10,10\n1,a,0,0,0,10\n"), 3u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n0,a,0,0,10,10\n0,a,1,1,10,10\n"), 3u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n0,a,0,0,10\n"), 2u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\nx,a,0,0,10,10\n"), 2u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n-1,a,0,0,10,10\n"), 2u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n0,,0,0,10,10\n"), 2u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h\n0,a,nan,0,10,10\n"), 2u);
  EXPECT_EQ(parse_error_line("frame,uid,x,y,w,h,conf\n0,a,0,0,10,10,1.5\n"), 2u);
  EXPECT_EQ(parse_error_line("uid,frame,x,y,w,h\n"), 1u);
}

TEST(ParseTracks, EmptyInputIsAnError) {
  EXPECT_THROW(parse_track_text(""), ParseError);
  EXPECT_THROW(parse_track_text("# only a comment\n"), ParseError);
  const TrackSet header_only = parse_track_text("frame,uid,x,y,w,h\n");
  EXPECT_TRUE(header_only.empty());
}

TEST(ParseTracks, MissingFileNamesThePath) {
  const auto path = std::filesystem::temp_directory_path() / "monce-does-not-exist.csv";
  try {
    parse_track_file(path);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
  }
}

TEST(FormatTracks, RoundTripsExactly) {
  std::vector<EntityFrame> rows;
  emit(rows, "a", {{0, 2}}, 0.1, 1.0 / 3.0, 10.25, 7.0);
  rows.push_back(EntityFrame{1, "b", BoundingBox{1e-7, 123456.789, 0.5, 2}, 0.125});
  const TrackSet t(rows, 3);
  const std::string csv = format_track_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "frame,uid,x,y,w,h,conf");
  const TrackSet back = parse_track_text(csv);
  EXPECT_EQ(back, t);
  EXPECT_EQ(format_track_csv(back), csv);
}

TEST(ParseConfig, EmptyMeansDefaults) { EXPECT_EQ(parse_config_text(""), EvalConfig{}); }

TEST(ParseConfig, SingleOverride) {
  const EvalConfig cfg = parse_config_text("reid_threshold=10\n");
  EvalConfig expected;
  expected.reid_threshold = 10;
  EXPECT_EQ(cfg, expected);
}

TEST(ParseConfig, AllKeys) {
  const EvalConfig cfg = parse_config_text(
      "# tuned\n"
      "iou_min = 0.25\n"
      "reid_threshold = 12\n"
      "kde_density_fraction = 0.3\n"
      "kde_bandwidth_rule = fixed\n"
      "kde_bandwidth = 4.5\n"
      "localization_grid_step = 0.1\n"
      "use_kde_range = false\n"
      "pooled_averaging = true\n"
      "longevity_levels = 0.25, 0.5\n"
      "video_length = 300\n");
  EXPECT_EQ(cfg.iou_min, 0.25);
  EXPECT_EQ(cfg.reid_threshold, 12);
  EXPECT_EQ(cfg.kde_density_fraction, 0.3);
  EXPECT_EQ(cfg.kde_bandwidth_rule, BandwidthRule::Fixed);
  EXPECT_EQ(cfg.kde_fixed_bandwidth, 4.5);
  EXPECT_EQ(cfg.localization_grid_step, 0.1);
  EXPECT_FALSE(cfg.use_kde_range);
  EXPECT_TRUE(cfg.pooled_averaging);
  EXPECT_EQ(cfg.longevity_levels, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(cfg.video_length, std::optional(300));
}

std::string config_error_key(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  ADD_FAILURE() << "no ConfigError for: " << text;
  return {};
}

TEST(ParseConfig, ErrorsNameTheKey) {
  EXPECT_EQ(config_error_key("iou_min=1.5"), "iou_min");
  EXPECT_EQ(config_error_key("iou_min=abc"), "iou_min");
  EXPECT_EQ(config_error_key("reid_threshold=2.5"), "reid_threshold");
  EXPECT_EQ(config_error_key("use_kde_range=maybe"), "use_kde_range");
  EXPECT_EQ(config_error_key("kde_bandwidth_rule=scott"), "kde_bandwidth_rule");
  EXPECT_EQ(config_error_key("colour=red"), "colour");
  EXPECT_EQ(config_error_key("reid_threshold=5\nreid_threshold=6"), "reid_threshold");
}

MetricReport sample_report() {
  std::vector<EntityFrame> g, p;
  emit(g, "a", {{0, 5}, {9, 14}}, 0, 0);
  emit(g, "b", {{2, 14}}, 30, 0);
  emit(p, "t", {{0, 6}, {9, 14}}, 0.7, 0.3);
  emit(p, "u", {{2, 8}}, 30, 0);
  emit(p, "v", {{9, 14}}, 30, 0);
  emit(p, "junk", {{4, 4}}, 200, 200);
  return assemble_report(TrackSet(g, 15), TrackSet(p, 15), {});
}

TEST(ReportJson, RoundTrip) {
  const MetricReport r = sample_report();
  const MetricReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(back, r);
}

TEST(ReportJson, FileRoundTripIsByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "monce-io-test";
  std::filesystem::create_directories(dir);
  const MetricReport r = sample_report();
  write_report(r, dir / "a.json");
  write_report(sample_report(), dir / "b.json");
  EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json"));
  EXPECT_EQ(read_report(dir / "a.json"), r);
  std::filesystem::remove_all(dir);
}

TEST(ReportJson, NullsAreExplicit) {
  MetricReport r = sample_report();
  for (auto& pt : r.criteria[0].localization) pt.rate.reset();
  r.reid.long_rate.reset();
  const auto doc = nlohmann::json::parse(report_to_json(r));
  const auto& loc = doc.at("criteria").at(0).at("localization").at("rate");
  ASSERT_FALSE(loc.empty());
  for (const auto& v : loc) EXPECT_TRUE(v.is_null());
  EXPECT_TRUE(doc.at("summary").at("reid").at("long_rate").is_null());
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
}

TEST(ReportJson, CarriesConfigAndRange) {
  const auto doc = nlohmann::json::parse(report_to_json(sample_report()));
  EXPECT_EQ(doc.at("schema_version"), kReportSchemaVersion);
  EXPECT_TRUE(doc.at("config").contains("kde_density_fraction"));
  EXPECT_TRUE(doc.at("kde_range").contains("bandwidth"));
  EXPECT_EQ(doc.at("criteria").size(), 2u);
  EXPECT_EQ(doc.at("criteria").at(0).at("criterion"), "any_uid");
}

TEST(ReportJson, RejectsOtherSchemaVersionsAndGarbage) {
  auto doc = nlohmann::json::parse(report_to_json(sample_report()));
  doc["schema_version"] = 99;
  EXPECT_THROW(report_from_json(doc.dump()), ParseError);
  EXPECT_THROW(report_from_json("{not json"), ParseError);
  EXPECT_THROW(report_from_json("{}"), ParseError);
}

}  // namespace
}  // namespace monce
