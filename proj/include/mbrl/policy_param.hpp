#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mbrl/mdp.hpp"

namespace mbrl {

enum class PartitionKind {
  history,        // one cell per history; exact but exponential in the horizon
  suffix_window,  // cell = last `window` (state, action) pairs plus the state
};

/// Softmax policy over a finite partition of histories:
/// pi(a | h) = exp(w[cell(h)][a]) / sum_b exp(w[cell(h)][b]).
struct SoftmaxPartitionPolicy {
  PartitionKind kind = PartitionKind::history;
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  int window = 2;  // suffix_window only

  std::vector<double> weights;  // [cell][action]
  int n_cells = 0;

  // history kind: cells are histories, indexed arithmetically per level
  std::vector<size_t> level_base;
  // suffix_window kind: materialised context tables
  std::vector<int> window_state;  // current state per cell
  std::vector<int> window_next;   // [cell][a][s'] -> next cell
  std::unordered_map<uint64_t, int> window_ids;

  int start_cell(int s1) const;
  int next_cell(int cell, int t, int a, int s2) const;  // t = step of `cell`
  int state_of(int cell, int t) const;                  // suffix_window ignores t

  std::span<const double> row(int cell) const {
    return {weights.data() + size_t(cell) * n_actions, size_t(n_actions)};
  }
  std::span<double> row_mut(int cell) {
    return {weights.data() + size_t(cell) * n_actions, size_t(n_actions)};
  }
  void validate() const;
};

SoftmaxPartitionPolicy make_history_policy(int n_states, int n_actions, int horizon);
SoftmaxPartitionPolicy make_window_policy(int n_states, int n_actions, int horizon,
                                          int window = 2);

/// Softmax of the cell's weight row.
std::vector<double> action_probs(const SoftmaxPartitionPolicy& policy, int cell);

/// d ln pi(action | cell) / d w[cell][b] = delta(action, b) - pi(b | cell);
/// zero outside the visited cell.
std::vector<double> log_policy_gradient(const SoftmaxPartitionPolicy& policy, int cell,
                                        int action);

/// Exact expected utility. History partitions walk the history tree (guarded
/// horizon); suffix windows use dynamic programming over (context, state).
double evaluate_policy(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy);

/// Exact gradient of the expected utility in the weights.
std::vector<double> utility_gradient(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy);

struct McGradient {
  std::vector<double> g;
  double se = 0.0;  // standard error of the estimator norm
  int n = 0;
};

/// REINFORCE estimate with a leave-one-out mean baseline (which keeps the
/// estimator unbiased).
McGradient utility_gradient_mc(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy,
                               int n_rollouts, Rng& rng);

/// Exact Hessian (row-major, dimension = n_cells * n_actions) by trajectory
/// enumeration; refuses weight tables past a size guard.
std::vector<double> utility_hessian(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy);

/// One sampled trajectory's utility (used by rollout-based estimators).
double rollout_utility(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy, Rng& rng);

}  // namespace mbrl
