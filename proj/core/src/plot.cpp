#include "monce/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace monce {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 64, kRight = 16, kTop = 36, kBottom = 48;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (std::abs(v - std::round(v)) < 1e-9) std::snprintf(buf, sizeof buf, "%.0f", std::round(v));
  else std::snprintf(buf, sizeof buf, "%.3g", v);
  return std::string(buf) == "-0" ? "0" : buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0) * mag;
}

std::vector<double> ticks(double lo, double hi) {
  const double step = nice_step(hi - lo);
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) {
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

std::pair<double, double> widen(double lo, double hi) {
  if (hi - lo < 1e-12) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

std::string criterion_label(UidCriterion c) { return c == UidCriterion::Any ? "any UID" : "original UID"; }

}  // namespace

std::string_view plot_file_stem(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::Recall: return "recall";
    case PlotKind::Precision: return "precision";
    case PlotKind::LongevityCounts: return "longevity_counts";
    case PlotKind::LongevityRate: return "longevity_rate";
    case PlotKind::Localization: return "localization";
    case PlotKind::Absence: return "absence";
  }
  return "plot";
}

std::string render_plot(const PlotSpec& spec) {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool any_x = false, any_y = false;
  for (const auto& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      x_lo = any_x ? std::min(x_lo, x) : x;
      x_hi = any_x ? std::max(x_hi, x) : x;
      any_x = true;
      if (!y) continue;
      y_lo = any_y ? std::min(y_lo, *y) : *y;
      y_hi = any_y ? std::max(y_hi, *y) : *y;
      any_y = true;
    }
  }
  if (!any_x) x_lo = 0, x_hi = 1;
  std::tie(x_lo, x_hi) = widen(x_lo, x_hi);
  if (spec.y_range) {
    std::tie(y_lo, y_hi) = *spec.y_range;
  } else {
    y_lo = std::min(0.0, any_y ? y_lo : 0.0);
    y_hi = any_y ? y_hi : 1.0;
    std::tie(y_lo, y_hi) = widen(y_lo, y_hi);
  }

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";

  for (double t : ticks(x_lo, x_hi)) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(t)) << "\" y2=\""
       << num(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(y_lo, y_hi)) {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
       << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
       << "</text>\n";
  }
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << num(kTop + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::vector<std::pair<double, double>> segment;
    auto flush = [&] {
      if (segment.size() == 1) {
        os << "<circle cx=\"" << num(px(segment[0].first)) << "\" cy=\"" << num(py(segment[0].second))
           << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      } else if (segment.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < segment.size(); ++k) {
          os << (k ? " " : "") << num(px(segment[k].first)) << ',' << num(py(segment[k].second));
        }
        os << "\"/>\n";
      }
      segment.clear();
    };
    for (const auto& [x, y] : s.points) {
      if (y) segment.emplace_back(x, *y);
      else flush();
    }
    flush();

    const double ly = kTop + 14 + 16 * static_cast<double>(i);
    const double lx = kLeft + pw - 150;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20) << "\" y2=\"" << num(ly - 4)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  if (!any_y) {
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kTop + ph / 2)
       << "\" text-anchor=\"middle\" fill=\"#888888\">no data</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<PlotSpec> dashboard_plots(const MetricReport& report) {
  std::vector<PlotSpec> out;
  out.reserve(std::size(kDashboardPlots));
  auto make = [&](PlotKind kind, std::string title, std::string x, std::string y,
                  std::optional<std::pair<double, double>> range) {
    out.push_back(PlotSpec{kind, std::move(title), std::move(x), std::move(y), range, {}});
    return &out.back();
  };
  const auto unit = std::make_optional(std::pair(0.0, 1.0));

  PlotSpec* recall = make(PlotKind::Recall, "Tracking Recall", "sequence length (frames)", "average overlap", unit);
  PlotSpec* precision =
      make(PlotKind::Precision, "Tracking Precision", "sequence length (frames)", "average overlap", unit);
  PlotSpec* counts = make(PlotKind::LongevityCounts, "Tracking Longevity", "sequence length (frames)", "tracks",
                          std::nullopt);
  PlotSpec* rate =
      make(PlotKind::LongevityRate, "Tracking Longevity (rate)", "sequence length (frames)", "success rate", unit);
  PlotSpec* loc = make(PlotKind::Localization, "Localization", "IOU threshold", "success rate", unit);
  PlotSpec* absence =
      make(PlotKind::Absence, "Absence Prediction", "absence length (frames)", "absence prediction rate", unit);

  for (const auto& c : report.criteria) {
    const std::string label = criterion_label(c.criterion);
    PlotSeries r{label, {}}, p{label, {}}, lc{label, {}}, lr{label, {}}, lo{label, {}}, ab{label, {}};
    for (const auto& pt : c.recall.points) r.points.emplace_back(pt.length, pt.value);
    for (const auto& pt : c.precision.points) p.points.emplace_back(pt.length, pt.value);
    for (const auto& pt : c.longevity.points) {
      lc.points.emplace_back(pt.length, static_cast<double>(pt.successes));
      lr.points.emplace_back(pt.length, pt.rate);
    }
    for (const auto& pt : c.localization) lo.points.emplace_back(pt.threshold, pt.rate);
    for (const auto& pt : c.absence) ab.points.emplace_back(pt.length, pt.rate);
    recall->series.push_back(std::move(r));
    precision->series.push_back(std::move(p));
    counts->series.push_back(std::move(lc));
    rate->series.push_back(std::move(lr));
    loc->series.push_back(std::move(lo));
    absence->series.push_back(std::move(ab));
  }
  if (!report.criteria.empty()) {
    PlotSeries total{"total", {}};
    for (const auto& pt : report.criteria.front().longevity.points) {
      total.points.emplace_back(pt.length, static_cast<double>(pt.total));
    }
    counts->series.push_back(std::move(total));
  }
  return out;
}

}  // namespace monce
