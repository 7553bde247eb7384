#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "monce/io.hpp"
#include "monce/plot.hpp"

namespace monce::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("monce-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_text_file(dir_ / "scenario.txt",
                    "video_length = 40\n"
                    "canvas = 300 200\n"
                    "entity = uid=a birth=0 end=39 x=10 y=10 vx=1 w=20 h=20 absent=15-18\n"
                    "entity = uid=b birth=6 end=39 x=150 y=50 vy=1 w=30 h=25\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "monce");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const char* name) const { return (dir_ / name).string(); }

  int synth_fixture() {
    return run({"synth", "--scenario", path("scenario.txt"), "--seed", "1", "--out-gt", path("gt.csv"), "--out-pred",
                path("pred.csv")});
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, PerfectFixturePrintsOnes) {
  ASSERT_EQ(synth_fixture(), kExitOk) << err_.str();
  ASSERT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("out")}), kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("EAO: 1.000"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("EAO_P: 1.000"), std::string::npos);
  EXPECT_NE(out_.str().find("REID short: 1.000"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "report.json"));
  for (PlotKind k : kDashboardPlots) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string(plot_file_stem(k)) + ".svg"))) << plot_file_stem(k);
  }
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(synth_fixture(), kExitOk);
  ASSERT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("o1")}), kExitOk);
  const std::string first_stdout = out_.str();
  ASSERT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("o2")}), kExitOk);
  EXPECT_EQ(out_.str(), first_stdout);
  for (const auto& entry : fs::directory_iterator(dir_ / "o1")) {
    EXPECT_EQ(read_text_file(entry.path()), read_text_file(dir_ / "o2" / entry.path().filename()))
        << entry.path().filename();
  }
}

TEST_F(CliTest, PlotRerendersSameSvgs) {
  ASSERT_EQ(synth_fixture(), kExitOk);
  ASSERT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("o")}), kExitOk);
  ASSERT_EQ(run({"plot", "--report", path("o/report.json"), "--out", path("p")}), kExitOk) << err_.str();
  for (PlotKind k : kDashboardPlots) {
    const std::string name = std::string(plot_file_stem(k)) + ".svg";
    EXPECT_EQ(read_text_file(dir_ / "o" / name), read_text_file(dir_ / "p" / name)) << name;
  }
}

TEST_F(CliTest, CriterionAndConfigFlags) {
  ASSERT_EQ(synth_fixture(), kExitOk);
  write_text_file(dir_ / "cfg.txt", "reid_threshold = 3\n");
  ASSERT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("o"), "--criterion",
                 "original", "--config", path("cfg.txt"), "--no-kde"}),
            kExitOk)
      << err_.str();
  const MetricReport r = read_report(dir_ / "o" / "report.json");
  ASSERT_EQ(r.criteria.size(), 1u);
  EXPECT_EQ(r.headline, UidCriterion::Original);
  EXPECT_EQ(r.config.reid_threshold, 3);
  EXPECT_FALSE(r.config.use_kde_range);
  EXPECT_EQ(r.reid.long_count, 1);
}

TEST_F(CliTest, MissingPredictionFile) {
  ASSERT_EQ(synth_fixture(), kExitOk);
  const std::string missing = path("nope.csv");
  EXPECT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", missing, "--out", path("o")}), kExitIo);
  EXPECT_NE(err_.str().find(missing), std::string::npos) << err_.str();
}

TEST_F(CliTest, ArgumentErrors) {
  EXPECT_EQ(run({}), kExitIo);
  EXPECT_EQ(run({"evaluate", "--gt", "x"}), kExitIo);
  EXPECT_EQ(run({"evaluate", "--gt", "a", "--pred", "b", "--out", "c", "--criterion", "some"}), kExitIo);
  EXPECT_EQ(run({"frobnicate"}), kExitIo);
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("evaluate"), std::string::npos);
}

TEST_F(CliTest, BadConfigIsAnInputError) {
  ASSERT_EQ(synth_fixture(), kExitOk);
  write_text_file(dir_ / "cfg.txt", "iou_min = 1.5\n");
  EXPECT_EQ(run({"evaluate", "--gt", path("gt.csv"), "--pred", path("pred.csv"), "--out", path("o"), "--config",
                 path("cfg.txt")}),
            kExitIo);
  EXPECT_NE(err_.str().find("iou_min"), std::string::npos);
}

TEST_F(CliTest, EmptyGroundTruthIsAnEvaluationError) {
  write_text_file(dir_ / "empty.csv", "frame,uid,x,y,w,h\n");
  write_text_file(dir_ / "pred.csv", "frame,uid,x,y,w,h\n0,a,0,0,1,1\n");
  EXPECT_EQ(run({"evaluate", "--gt", path("empty.csv"), "--pred", path("pred.csv"), "--out", path("o")}),
            kExitEvaluation);
}

TEST_F(CliTest, MalformedTrackFileNamesPathAndLine) {
  write_text_file(dir_ / "bad.csv", "frame,uid,x,y,w,h\n0,a,0,0,0,1\n");
  EXPECT_EQ(run({"evaluate", "--gt", path("bad.csv"), "--pred", path("bad.csv"), "--out", path("o")}), kExitIo);
  EXPECT_NE(err_.str().find("bad.csv"), std::string::npos);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos);
}

TEST_F(CliTest, SynthRejectsBadScenario) {
  write_text_file(dir_ / "bad.txt", "video_length = 10\n");
  EXPECT_EQ(run({"synth", "--scenario", path("bad.txt"), "--out-gt", path("g.csv"), "--out-pred", path("p.csv")}),
            kExitIo);
}

}  // namespace
}  // namespace monce::cli
