#include "mbrl/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mbrl {

namespace {

constexpr double kPivotTol = 1e-9;

// Dense tableau simplex for: maximise sum(x) subject to M^T x <= 1, x >= 0,
// where M > 0 is the shifted loss matrix. With v = 1 / sum(x*) the row
// mixture is x* v and the duals of the column constraints give the column
// mixture.
struct Tableau {
  int m, n;                         // constraints (columns of the game), variables (rows)
  std::vector<std::vector<double>> t;  // (m+1) x (n+m+1)
  std::vector<int> basis;

  Tableau(const std::vector<std::vector<double>>& shifted)
      : m(int(shifted.front().size())), n(int(shifted.size())) {
    t.assign(m + 1, std::vector<double>(n + m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) t[i][j] = shifted[j][i];
      t[i][n + i] = 1.0;
      t[i][n + m] = 1.0;
    }
    for (int j = 0; j < n; ++j) t[m][j] = -1.0;  // objective row holds z_j - c_j
    basis.resize(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;
  }

  void pivot(int row, int col) {
    const double piv = t[row][col];
    for (double& v : t[row]) v /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double factor = t[i][col];
      if (factor == 0.0) continue;
      for (int j = 0; j <= n + m; ++j) t[i][j] -= factor * t[row][j];
    }
    basis[row] = col;
  }

  void solve() {
    const int max_iters = 50000 + 200 * (n + m);
    for (int iter = 0; iter < max_iters; ++iter) {
      int col = -1;  // Bland: smallest improving index
      for (int j = 0; j < n + m; ++j) {
        if (t[m][j] < -kPivotTol) {
          col = j;
          break;
        }
      }
      if (col < 0) return;
      int row = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t[i][col] > kPivotTol) {
          const double ratio = t[i][n + m] / t[i][col];
          if (ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol && (row < 0 || basis[i] < basis[row]))) {
            best_ratio = ratio;
            row = i;
          }
        }
      }
      if (row < 0) throw std::runtime_error("matrix game: unbounded linear program");
      pivot(row, col);
    }
    throw std::runtime_error("matrix game: simplex iteration cap exceeded");
  }
};

}  // namespace

MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& loss) {
  if (loss.empty() || loss.front().empty()) {
    throw std::invalid_argument("matrix game: empty payoff matrix");
  }
  const int n = int(loss.size());
  const int m = int(loss.front().size());
  double lo = loss[0][0];
  for (const auto& row : loss) {
    if (int(row.size()) != m) throw std::invalid_argument("matrix game: ragged payoff matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("matrix game: non-finite payoff");
      lo = std::min(lo, v);
    }
  }
  const double shift = 1.0 - lo;  // strictly positive entries keep the value positive
  std::vector<std::vector<double>> shifted(n, std::vector<double>(m));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) shifted[j][i] = loss[j][i] + shift;
  }

  Tableau tab(shifted);
  tab.solve();

  std::vector<double> x(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) x[tab.basis[i]] = tab.t[i][n + m];
  }
  double x_sum = 0.0;
  for (double v : x) x_sum += v;
  if (x_sum <= 0.0) throw std::runtime_error("matrix game: degenerate optimum");
  const double shifted_value = 1.0 / x_sum;

  MatrixGameSolution sol;
  sol.value = shifted_value - shift;
  sol.row_strategy.resize(n);
  for (int j = 0; j < n; ++j) sol.row_strategy[j] = x[j] * shifted_value;
  sol.col_strategy.resize(m);
  double y_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    sol.col_strategy[i] = std::max(tab.t[m][n + i], 0.0) * shifted_value;
    y_sum += sol.col_strategy[i];
  }
  if (y_sum > 0.0) {
    for (double& v : sol.col_strategy) v /= y_sum;
  }
  return sol;
}

}  // namespace mbrl
