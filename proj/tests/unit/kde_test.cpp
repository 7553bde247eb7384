#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "monce/kde.hpp"

namespace monce {
namespace {

// Reference statistics, written from the textbook definitions.
double ref_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

double ref_sd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double ref_bandwidth(const std::vector<double>& v) {
  const double iqr = ref_quantile(v, 0.75) - ref_quantile(v, 0.25);
  const double spread = std::min(ref_sd(v), iqr / 1.34);
  return std::max(1.0, 0.9 * spread * std::pow(static_cast<double>(v.size()), -0.2));
}

// Dense-grid density with the same run rule, as an oracle for kde_range.
std::pair<int, int> ref_range(const std::vector<int>& lengths, double h, double fraction) {
  const int lo = *std::min_element(lengths.begin(), lengths.end());
  const int hi = *std::max_element(lengths.begin(), lengths.end());
  std::vector<double> density;
  for (int x = lo; x <= hi; ++x) {
    double d = 0.0;
    for (int l : lengths) d += std::exp(-0.5 * ((x - l) / h) * ((x - l) / h));
    density.push_back(d);
  }
  const auto peak_it = std::max_element(density.begin(), density.end());
  const double cut = fraction * *peak_it;
  auto a = static_cast<int>(peak_it - density.begin()), b = a;
  while (a > 0 && density[static_cast<std::size_t>(a - 1)] >= cut) --a;
  while (b + 1 < static_cast<int>(density.size()) && density[static_cast<std::size_t>(b + 1)] >= cut) ++b;
  return {lo + a, lo + b};
}

TEST(Silverman, MatchesReferenceFormula) {
  const std::vector<double> v{3, 7, 8, 12, 20, 21, 40, 41, 41, 60};
  EXPECT_NEAR(silverman_bandwidth(v), ref_bandwidth(v), 1e-12);
}

TEST(Silverman, FlooredAtOneFrame) {
  std::vector<double> v(100, 100.0);
  v.push_back(5.0);
  v.push_back(1000.0);
  EXPECT_EQ(silverman_bandwidth(v), 1.0);
}

TEST(Silverman, DegenerateSamples) {
  EXPECT_EQ(silverman_bandwidth(std::vector<double>{}), 0.0);
  EXPECT_EQ(silverman_bandwidth(std::vector<double>{4.0}), 0.0);
  EXPECT_EQ(silverman_bandwidth(std::vector<double>{4.0, 4.0, 4.0}), 0.0);
}

TEST(KernelSum, GaussianAtCenter) {
  const std::vector<double> v{0.0, 2.0};
  EXPECT_DOUBLE_EQ(kernel_sum(v, 1.0, 0.0), 1.0 + std::exp(-2.0));
}

TEST(KdeRange, AllEqualLengths) {
  const std::vector<int> v(5, 42);
  const KdeRange r = kde_range(v, {});
  EXPECT_EQ(r.t_lo, 42);
  EXPECT_EQ(r.t_hi, 42);
  EXPECT_EQ(r.peak_length, 42);
}

TEST(KdeRange, FullRangeWhenDisabled) {
  EvalConfig cfg;
  cfg.use_kde_range = false;
  const std::vector<int> v{3, 7, 20};
  const KdeRange r = kde_range(v, cfg);
  EXPECT_EQ(r.t_lo, 3);
  EXPECT_EQ(r.t_hi, 20);
  EXPECT_EQ(r.bandwidth, 0.0);
}

TEST(KdeRange, ConcentratedMassExcludesOutliers) {
  std::vector<int> v(10, 100);
  v.push_back(5);
  v.push_back(1000);
  const KdeRange r = kde_range(v, {});
  EXPECT_LE(r.t_lo, 100);
  EXPECT_GE(r.t_hi, 100);
  EXPECT_GT(r.t_lo, 5);
  EXPECT_LT(r.t_hi, 1000);
  EXPECT_EQ(r.peak_length, 100);

  std::vector<double> dv(v.begin(), v.end());
  const auto [lo, hi] = ref_range(v, ref_bandwidth(dv), 0.5);
  EXPECT_EQ(r.t_lo, lo);
  EXPECT_EQ(r.t_hi, hi);
}

TEST(KdeRange, AgreesWithDenseGridOracle) {
  const std::vector<std::vector<int>> cases{
      {10, 12, 12, 13, 30, 31, 31, 32, 33, 80},
      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
      {50, 51, 52, 90, 91, 92, 93, 150},
      {100, 100, 100, 100, 100, 100, 72, 72},
  };
  for (const auto& v : cases) {
    std::vector<double> dv(v.begin(), v.end());
    const auto [lo, hi] = ref_range(v, ref_bandwidth(dv), 0.5);
    const KdeRange r = kde_range(v, {});
    EXPECT_EQ(r.t_lo, lo);
    EXPECT_EQ(r.t_hi, hi);
    EXPECT_LE(r.t_lo, r.peak_length);
    EXPECT_GE(r.t_hi, r.peak_length);
  }
}

TEST(KdeRange, FixedBandwidthAndFraction) {
  EvalConfig cfg;
  cfg.kde_bandwidth_rule = BandwidthRule::Fixed;
  cfg.kde_fixed_bandwidth = 3.0;
  cfg.kde_density_fraction = 0.2;
  const std::vector<int> v{20, 21, 22, 40, 60, 61};
  const auto [lo, hi] = ref_range(v, 3.0, 0.2);
  const KdeRange r = kde_range(v, cfg);
  EXPECT_EQ(r.bandwidth, 3.0);
  EXPECT_EQ(r.t_lo, lo);
  EXPECT_EQ(r.t_hi, hi);
}

TEST(KdeRange, FractionOneKeepsOnlyThePeak) {
  EvalConfig cfg;
  cfg.kde_density_fraction = 1.0;
  const std::vector<int> v{10, 20, 20, 20, 30};
  const KdeRange r = kde_range(v, cfg);
  EXPECT_EQ(r.t_lo, 20);
  EXPECT_EQ(r.t_hi, 20);
}

}  // namespace
}  // namespace monce
