#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monce/metrics.hpp"

namespace monce {

enum class PlotKind { Recall, Precision, LongevityCounts, LongevityRate, Localization, Absence };

inline constexpr PlotKind kDashboardPlots[] = {PlotKind::Recall,          PlotKind::Precision,
                                               PlotKind::LongevityCounts, PlotKind::LongevityRate,
                                               PlotKind::Localization,    PlotKind::Absence};

/// File stem used for a plot kind ("recall", "longevity_counts", ...).
std::string_view plot_file_stem(PlotKind kind) noexcept;

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, std::optional<double>>> points;  // null y breaks the line
};

struct PlotSpec {
  PlotKind kind = PlotKind::Recall;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<std::pair<double, double>> y_range;  // fixed y axis, e.g. [0, 1] for rates
  std::vector<PlotSeries> series;
};

/// Deterministic SVG on a fixed 640x400 canvas with ticks and a legend.
std::string render_plot(const PlotSpec& spec);

/// One spec per dashboard panel, built from the report's per-criterion curves.
std::vector<PlotSpec> dashboard_plots(const MetricReport& report);

}  // namespace monce
