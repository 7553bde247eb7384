#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace monce {

/// Dense rectangular min-cost assignment (Kuhn-Munkres with potentials).
///
/// `cost` is row-major with `rows * cols` entries. Every row is assigned when
/// rows <= cols, every column otherwise. Returns the column assigned to each
/// row, or -1 for rows left unassigned in the rows > cols case.
std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t rows,
                                     std::size_t cols);

/// Assignment plus the final dual potentials. Every assignment that uses
/// cell (r, c) costs at least the optimum plus cost(r, c) - row_dual[r] - col_dual[c].
struct AssignmentSolution {
  std::vector<int> row_to_col;
  std::vector<double> row_dual;
  std::vector<double> col_dual;
};

AssignmentSolution solve_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols);

}  // namespace monce
