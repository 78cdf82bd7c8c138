#pragma once

#include <span>
#include <vector>

#include "mbrl/rng.hpp"

namespace mbrl {

// Exact computations over history trees are exponential in the horizon;
// everything tree-shaped refuses to run past this depth.
inline constexpr int kTreeHorizonGuard = 8;

inline constexpr double kRowSumTolerance = 1e-12;

/// Tabular MDP with a fixed finite horizon. Rewards live in [0, 1] and are
/// a deterministic function of (state, action).
struct FiniteMDP {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 1;
  double discount = 1.0;
  std::vector<double> transition;  // row-major [s][a][s']
  std::vector<double> reward;      // [s][a]
  std::vector<double> initial;     // start-state distribution

  double p(int s, int a, int s2) const {
    return transition[(size_t(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(size_t(s) * n_actions + a) * n_states + s2];
  }
  std::span<const double> row(int s, int a) const {
    return {transition.data() + (size_t(s) * n_actions + a) * n_states, size_t(n_states)};
  }
  double r(int s, int a) const { return reward[size_t(s) * n_actions + a]; }
  double& r(int s, int a) { return reward[size_t(s) * n_actions + a]; }

  /// Start state index if the initial distribution is a point mass, else -1.
  int initial_state() const;
  void set_initial_state(int s);

  /// sum_{t=1..T} discount^{t-1}: the largest utility any policy can earn.
  double utility_upper_bound() const;

  void validate() const;  // throws std::invalid_argument
};

/// Zeroed MDP shell of the given shape (transitions must still be filled in).
FiniteMDP make_mdp(int n_states, int n_actions, int horizon, double discount = 1.0);

/// Policy that looks only at the current state; optionally one table per step.
struct MemorylessPolicy {
  int n_states = 0;
  int n_actions = 0;
  int n_steps = 0;            // 0 => stationary, single table
  std::vector<double> probs;  // [t][s][a] (or [s][a] when stationary)

  bool stationary() const { return n_steps == 0; }
  double prob(int t, int s, int a) const {
    const size_t base = stationary() ? 0 : size_t(t) * n_states * n_actions;
    return probs[base + size_t(s) * n_actions + a];
  }
  double& prob_at(int t, int s, int a) {
    const size_t base = stationary() ? 0 : size_t(t) * n_states * n_actions;
    return probs[base + size_t(s) * n_actions + a];
  }
  void validate() const;
};

MemorylessPolicy uniform_memoryless(int n_states, int n_actions);
MemorylessPolicy random_memoryless(int n_states, int n_actions, Rng& rng);
/// One-hot policy from per-step greedy actions, actions[t][s].
MemorylessPolicy deterministic_memoryless(const std::vector<std::vector<int>>& actions, int n_actions);

struct BackwardInductionResult {
  std::vector<std::vector<double>> values;  // [t][s], t = 0..T; terminal row is zero
  std::vector<std::vector<int>> actions;    // [t][s] greedy action, ties to lowest index
  double utility = 0.0;                     // U*(mdp)

  MemorylessPolicy policy(int n_actions) const { return deterministic_memoryless(actions, n_actions); }
};

/// Finite-horizon dynamic programming; the greedy policy is deterministic
/// and memoryless per step.
BackwardInductionResult backward_induction(const FiniteMDP& mdp);

/// Exact expected utility of a memoryless (possibly step-indexed) policy.
double evaluate_policy(const FiniteMDP& mdp, const MemorylessPolicy& policy);

/// Transition rows drawn i.i.d. Exp(1) and normalised; reward 1 for the
/// first action in the last state, 0 elsewhere; start state 0.
FiniteMDP gen_random_mdp(int n_states, int n_actions, uint64_t seed, int horizon = 5,
                         double discount = 1.0);

struct ChainParams {
  double final_reward = 1.0;   // taking the advance action in the last state
  double return_reward = 0.2;  // taking the return action in state 0
};

/// Chain environment: action 0 advances toward the far end, action 1 returns
/// to state 0, and with probability `slip` the two effects are swapped.
FiniteMDP chain_mdp(int n_states, double slip, int horizon = 10, double discount = 1.0,
                    const ChainParams& params = {});

}  // namespace mbrl
