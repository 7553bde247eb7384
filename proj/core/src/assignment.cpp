#include "monce/assignment.hpp"

#include <limits>

#include "monce/error.hpp"

namespace monce {
namespace {

// Shortest augmenting path formulation; requires n <= m. Indices are 1-based
// internally with slot 0 as the virtual source column.
AssignmentSolution solve_wide(std::span<const double> cost, std::size_t n, std::size_t m,
                              bool transposed) {
  const double inf = std::numeric_limits<double>::infinity();
  auto at = [&](std::size_t i, std::size_t j) {
    return transposed ? cost[j * n + i] : cost[i * m + j];
  };

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw InternalError("assignment solver: non-finite cost");
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentSolution out{std::vector<int>(n, -1), std::vector<double>(u.begin() + 1, u.end()),
                         std::vector<double>(v.begin() + 1, v.end())};
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) out.row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return out;
}

}  // namespace

AssignmentSolution solve_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  if (cost.size() != rows * cols) throw InternalError("assignment solver: cost size mismatch");
  if (rows == 0 || cols == 0) {
    return {std::vector<int>(rows, -1), std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
  }
  if (rows <= cols) return solve_wide(cost, rows, cols, false);

  AssignmentSolution t = solve_wide(cost, cols, rows, true);
  AssignmentSolution out{std::vector<int>(rows, -1), std::move(t.col_dual), std::move(t.row_dual)};
  for (std::size_t c = 0; c < cols; ++c) {
    if (t.row_to_col[c] >= 0) out.row_to_col[static_cast<std::size_t>(t.row_to_col[c])] = static_cast<int>(c);
  }
  return out;
}

std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t rows,
                                     std::size_t cols) {
  return solve_assignment(cost, rows, cols).row_to_col;
}

}  // namespace monce
