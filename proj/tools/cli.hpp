#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monce/matcher.hpp"

namespace monce::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvaluation = 1;
inline constexpr int kExitIo = 2;

struct EvaluateOptions {
  std::filesystem::path gt;
  std::filesystem::path pred;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  std::vector<UidCriterion> criteria{UidCriterion::Any, UidCriterion::Original};
  bool no_kde = false;
};

struct SynthOptions {
  std::filesystem::path scenario;
  std::uint64_t seed = 0;
  std::filesystem::path out_gt;
  std::filesystem::path out_pred;
};

struct PlotOptions {
  std::filesystem::path report;
  std::filesystem::path out_dir;
};

/// Writes report.json and one SVG per dashboard panel, prints the summary.
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err);
int cmd_plot(const PlotOptions& options, std::ostream& out, std::ostream& err);

/// Full command line: `monce {evaluate,synth,plot} ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace monce::cli
