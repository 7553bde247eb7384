#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "monce/assignment.hpp"

namespace monce {
namespace {

// Cheapest full assignment of the smaller side, by enumerating permutations.
double brute_force_cost(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
  const bool wide = rows <= cols;
  const std::size_t small = wide ? rows : cols, large = wide ? cols : rows;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < small; ++i) sum += wide ? cost[i * cols + perm[i]] : cost[perm[i] * cols + i];
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Assignment, MatchesEnumerationAndDualBound) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    std::vector<double> cost(rows * cols);
    for (double& c : cost) c = value(rng);

    const AssignmentSolution sol = solve_assignment(cost, rows, cols);
    double sum = 0.0;
    std::vector<int> seen;
    for (std::size_t r = 0; r < rows; ++r) {
      if (sol.row_to_col[r] < 0) continue;
      sum += cost[r * cols + static_cast<std::size_t>(sol.row_to_col[r])];
      seen.push_back(sol.row_to_col[r]);
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen.size(), std::min(rows, cols));
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
    EXPECT_NEAR(sum, brute_force_cost(cost, rows, cols), 1e-9) << "trial " << trial;

    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double reduced = cost[r * cols + c] - sol.row_dual[r] - sol.col_dual[c];
        EXPECT_GE(reduced, -1e-9);
        if (sol.row_to_col[r] == static_cast<int>(c)) EXPECT_NEAR(reduced, 0.0, 1e-9);
      }
    }
  }
}

TEST(Assignment, EmptySides) {
  EXPECT_EQ(min_cost_assignment({}, 3, 0), (std::vector<int>{-1, -1, -1}));
  EXPECT_TRUE(min_cost_assignment({}, 0, 4).empty());
}

}  // namespace
}  // namespace monce
