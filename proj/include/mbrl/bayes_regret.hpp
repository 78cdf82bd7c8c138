#pragma once

#include <span>
#include <vector>

#include "mbrl/beliefs.hpp"
#include "mbrl/history_policy.hpp"
#include "mbrl/mdp.hpp"

namespace mbrl {

struct BayesOptimalResult {
  HistoryPolicyTree policy;  // deterministic per history, ties to lowest action
  double value = 0.0;        // U*(belief)
};

/// Exact Bayes-optimal history policy by backward induction over the
/// history tree. The information state is the vector of per-MDP
/// probabilities of the observed history, scaled by the belief.
BayesOptimalResult bayes_optimal_tree(std::span<const FiniteMDP> mdps,
                                      const BeliefVector& belief);

double bayes_optimal_value(std::span<const FiniteMDP> mdps, const BeliefVector& belief);

/// U*(mu) - U(pi, mu).
double regret(const FiniteMDP& mdp, const MemorylessPolicy& policy);
double regret(const FiniteMDP& mdp, const HistoryPolicyTree& policy);

/// Per-MDP optimal and achieved utilities for one policy on a task; the
/// pieces every regret notion is assembled from.
struct TaskEvaluation {
  std::vector<double> optimal;  // U*(mu_i)
  std::vector<double> utility;  // U(pi, mu_i)
};

TaskEvaluation evaluate_on_task(std::span<const FiniteMDP> mdps, const HistoryPolicyTree& policy);
TaskEvaluation evaluate_on_task(std::span<const FiniteMDP> mdps, const MemorylessPolicy& policy);

std::vector<double> optimal_utilities(std::span<const FiniteMDP> mdps);

/// U*(belief) - U(pi, belief): loss against an oracle that knows the prior.
double bayes_optimal_regret(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                            const HistoryPolicyTree& policy);

/// E_{mu ~ belief}[ U*(mu) - U(pi, mu) ]: loss against an oracle that knows
/// the MDP; linear in the belief.
double bayesian_regret(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                       const HistoryPolicyTree& policy);
double bayesian_regret(const TaskEvaluation& eval, const BeliefVector& belief);

struct RegretReport {
  double regret = 0.0;                // max_i R(pi, mu_i)
  double bayes_optimal_regret = 0.0;  // R(pi, belief)
  double bayesian_regret = 0.0;       // expected regret under the belief
  int argmax_mdp = 0;                 // index attaining the worst-case regret

  void validate() const;  // ordering and nonnegativity invariants
};

RegretReport make_regret_report(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                                const HistoryPolicyTree& policy);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

/// Posterior-sampling baseline: at the start of each episode draw an MDP
/// from the belief and play its optimal policy. Bayesian regret estimated
/// by Monte Carlo over the true MDP and the trajectory. The belief is only
/// updated between episodes when `update_posterior` is set.
McEstimate psrl_evaluate(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                         int episode_length, int n_episodes, int n_mc, Rng& rng,
                         bool update_posterior = false);

/// All Pareto-undominated achievable utility vectors (U(pi, mu_1), ...,
/// U(pi, mu_n)) over deterministic tree policies, with one witness policy
/// each. Dominated vectors are discarded during the tree recursion, which
/// preserves every candidate a regret-minimising pure or mixed policy could
/// use. Throws if intermediate sets exceed `cap`.
struct UtilityFrontier {
  std::vector<std::vector<double>> utilities;
  std::vector<HistoryPolicyTree> policies;
};

UtilityFrontier utility_frontier(std::span<const FiniteMDP> mdps, size_t cap = 500000);

}  // namespace mbrl
