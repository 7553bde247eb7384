#include "monce/kde.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "monce/error.hpp"

namespace monce {
namespace {

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 0.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double spread = std::min(sd, iqr / 1.34);
  // Lengths are integers; a kernel narrower than one frame carries no information.
  return std::max(1.0, 0.9 * spread * std::pow(static_cast<double>(n), -0.2));
}

double kernel_sum(std::span<const double> samples, double bandwidth, double x) {
  double sum = 0.0;
  for (double s : samples) {
    const double z = (x - s) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum;
}

KdeRange kde_range(std::span<const int> lengths, const EvalConfig& cfg) {
  if (lengths.empty()) throw EvaluationError("kde_range: no sequence lengths");
  const auto [min_it, max_it] = std::minmax_element(lengths.begin(), lengths.end());
  const int lo = *min_it, hi = *max_it;

  std::vector<double> samples(lengths.begin(), lengths.end());
  const double bandwidth = cfg.kde_bandwidth_rule == BandwidthRule::Fixed
                               ? cfg.kde_fixed_bandwidth
                               : silverman_bandwidth(samples);

  if (!cfg.use_kde_range || lo == hi || bandwidth <= 0.0) {
    // Full range, peak taken as the most frequent length (smallest on ties).
    std::vector<int> sorted(lengths.begin(), lengths.end());
    std::sort(sorted.begin(), sorted.end());
    int peak = sorted.front(), best = 0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      if (static_cast<int>(j - i) > best) {
        best = static_cast<int>(j - i);
        peak = sorted[i];
      }
      i = j;
    }
    return KdeRange{lo, hi, cfg.use_kde_range ? bandwidth : 0.0, peak};
  }

  std::vector<double> density(static_cast<std::size_t>(hi - lo + 1));
  for (int t = lo; t <= hi; ++t) {
    density[static_cast<std::size_t>(t - lo)] = kernel_sum(samples, bandwidth, static_cast<double>(t));
  }
  const auto peak_it = std::max_element(density.begin(), density.end());
  const auto peak_idx = static_cast<std::size_t>(peak_it - density.begin());
  const double cutoff = cfg.kde_density_fraction * *peak_it;

  std::size_t left = peak_idx, right = peak_idx;
  while (left > 0 && density[left - 1] >= cutoff) --left;
  while (right + 1 < density.size() && density[right + 1] >= cutoff) ++right;
  return KdeRange{lo + static_cast<int>(left), lo + static_cast<int>(right), bandwidth,
                  lo + static_cast<int>(peak_idx)};
}

}  // namespace monce
