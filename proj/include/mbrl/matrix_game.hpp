#pragma once

#include <vector>

namespace mbrl {

struct MatrixGameSolution {
  double value = 0.0;                // min over row mixtures of max over columns
  std::vector<double> row_strategy;  // minimising player's mixture over rows
  std::vector<double> col_strategy;  // maximising player's mixture over columns
};

/// Solves the zero-sum game where the row player picks a mixture over rows
/// to minimise, and the column player maximises, the expected loss
/// loss[row][col]. Standard reduction to a linear program, solved by a
/// dense simplex with Bland's rule; the column strategy comes from the
/// duals.
MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& loss);

}  // namespace mbrl
