#include "cli.hpp"

#include <cstdio>
#include <future>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "monce/error.hpp"
#include "monce/io.hpp"
#include "monce/metrics.hpp"
#include "monce/plot.hpp"
#include "monce/synth.hpp"

namespace monce::cli {
namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fixed3(const std::optional<double>& v) { return v ? fixed3(*v) : std::string("n/a"); }

void print_summary(const MetricReport& report, std::ostream& out) {
  out << "headline criterion: " << to_string(report.headline) << '\n';
  out << "EAO: " << fixed3(report.eao) << '\n';
  out << "EAO_P: " << fixed3(report.eao_p) << '\n';
  out << "averaging range: [" << report.kde_range.t_lo << ", " << report.kde_range.t_hi << "]\n";
  out << "longevity:";
  for (const auto& s : report.longevity_stats) out << " L(" << s.level << ")=" << s.length;
  out << '\n';
  out << "REID short: " << fixed3(report.reid.short_rate) << " (" << report.reid.short_count << " runs)\n";
  out << "REID long: " << fixed3(report.reid.long_rate) << " (" << report.reid.long_count << " runs)\n";
  for (const auto& c : report.criteria) {
    out << to_string(c.criterion) << ": EAO " << fixed3(c.eao) << ", EAO_P " << fixed3(c.eao_p) << '\n';
  }
}

void write_plots(const MetricReport& report, const std::filesystem::path& dir) {
  for (const PlotSpec& spec : dashboard_plots(report)) {
    write_text_file(dir / (std::string(plot_file_stem(spec.kind)) + ".svg"), render_plot(spec));
  }
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitEvaluation;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitEvaluation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto gt_future = std::async(std::launch::async, [&] { return parse_track_file(options.gt); });
    TrackSet pred = parse_track_file(options.pred);
    TrackSet gt = gt_future.get();

    EvalConfig cfg = options.config ? parse_config(*options.config) : EvalConfig{};
    if (options.no_kde) cfg.use_kde_range = false;

    const MetricReport report = assemble_report(gt, pred, cfg, options.criteria);
    ensure_directory(options.out_dir);
    write_report(report, options.out_dir / "report.json");
    write_plots(report, options.out_dir);
    print_summary(report, out);
    return kExitOk;
  });
}

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const synth::Scenario scenario = synth::parse_scenario(options.scenario.string());
    const auto [gt, pred] = synth::generate(scenario, options.seed);
    write_track_file(gt, options.out_gt);
    write_track_file(pred, options.out_pred);
    out << "wrote " << gt.size() << " ground-truth and " << pred.size() << " predicted entity-frames\n";
    return kExitOk;
  });
}

int cmd_plot(const PlotOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const MetricReport report = read_report(options.report);
    ensure_directory(options.out_dir);
    write_plots(report, options.out_dir);
    out << "wrote " << std::size(kDashboardPlots) << " plots to " << options.out_dir.string() << '\n';
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-object tracking evaluation"};
  app.require_subcommand(1);

  EvaluateOptions eval;
  std::string config, criterion = "both";
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--gt", eval.gt, "ground-truth CSV")->required();
  evaluate->add_option("--pred", eval.pred, "prediction CSV")->required();
  evaluate->add_option("--config", config, "key=value config file");
  evaluate->add_option("--out", eval.out_dir, "output directory")->required();
  evaluate->add_option("--criterion", criterion, "UID criterion")
      ->check(CLI::IsMember({"any", "original", "both"}));
  evaluate->add_flag("--no-kde", eval.no_kde, "average EAO over the full length range");

  SynthOptions syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic ground-truth/prediction pair");
  synth_cmd->add_option("--scenario", syn.scenario, "scenario file")->required();
  synth_cmd->add_option("--seed", syn.seed, "random seed");
  synth_cmd->add_option("--out-gt", syn.out_gt, "ground-truth CSV to write")->required();
  synth_cmd->add_option("--out-pred", syn.out_pred, "prediction CSV to write")->required();

  PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Re-render dashboard plots from a saved report");
  plot_cmd->add_option("--report", plot.report, "report.json")->required();
  plot_cmd->add_option("--out", plot.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }

  if (evaluate->parsed()) {
    if (!config.empty()) eval.config = config;
    if (criterion == "any") eval.criteria = {UidCriterion::Any};
    else if (criterion == "original") eval.criteria = {UidCriterion::Original};
    return cmd_evaluate(eval, out, err);
  }
  if (synth_cmd->parsed()) return cmd_synth(syn, out, err);
  return cmd_plot(plot, out, err);
}

}  // namespace monce::cli
