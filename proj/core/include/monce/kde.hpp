#pragma once

#include <span>

#include "monce/model.hpp"

namespace monce {

/// Range of sequence lengths used to average the recall and precision curves.
struct KdeRange {
  int t_lo = 0;
  int t_hi = 0;
  double bandwidth = 0.0;  // 0 when the range was not density-derived
  int peak_length = 0;

  friend bool operator==(const KdeRange&, const KdeRange&) = default;
};

/// Rule-of-thumb bandwidth 0.9 * min(sd, IQR / 1.34) * n^(-1/5), floored at one
/// frame. Returns 0 when fewer than two samples are given or all are equal.
double silverman_bandwidth(std::span<const double> samples);

/// Unnormalized Gaussian kernel sum at x.
double kernel_sum(std::span<const double> samples, double bandwidth, double x);

/// Mode-anchored high-density range of `lengths`.
///
/// The density is evaluated at every integer between the smallest and largest
/// length. The range is the maximal contiguous run around its first maximum
/// where density >= kde_density_fraction * peak. With use_kde_range off, or
/// when all lengths coincide, the full observed range is returned.
KdeRange kde_range(std::span<const int> lengths, const EvalConfig& cfg);

}  // namespace monce
