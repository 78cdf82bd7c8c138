#pragma once

#include <span>
#include <vector>

#include "mbrl/bayes_regret.hpp"
#include "mbrl/beliefs.hpp"
#include "mbrl/policy_param.hpp"

namespace mbrl {

enum class BeliefKind { finite, dirichlet };

struct GdaConfig {
  double eta_policy = 0.05;
  double eta_belief = 0.01;
  int batch = 16;       // M sampled MDPs per step (dirichlet case)
  int iterations = 5000;
  uint64_t seed = 0;
  BeliefKind belief_kind = BeliefKind::finite;
  int mc_rollouts = 0;         // 0: exact per-sample policy gradients
  double alpha_min = 0.01;     // clip box projecting Dirichlet parameters
  double alpha_max = 100.0;
  double divergence_guard = 1e6;

  void validate() const;
};

struct GdaTrace {
  std::vector<double> regret_estimate;
  std::vector<double> g_policy_norm;
  std::vector<double> g_belief_norm;
  std::vector<std::vector<double>> belief;  // simplex weights or flattened alpha
};

struct StochasticGradients {
  std::vector<double> g_policy;      // gradient of the Bayesian regret in the weights
  std::vector<double> g_belief;      // ascent direction over the prior parameters
  double regret_estimate = 0.0;
  double variance_policy = 0.0;      // mean squared deviation across the batch
  double variance_belief = 0.0;
};

/// Exact gradients for a belief over a finite MDP set:
/// g_belief[i] = R(pi, mu_i) and g_policy = -sum_i belief_i grad U(pi, mu_i).
StochasticGradients stochastic_gradients(const SoftmaxPartitionPolicy& policy,
                                         std::span<const FiniteMDP> mdps,
                                         const BeliefVector& belief);

/// Score-function estimates over a Dirichlet-product prior from `batch`
/// sampled MDPs; `mc_rollouts` = 0 evaluates each sample exactly.
StochasticGradients stochastic_gradients(const SoftmaxPartitionPolicy& policy,
                                         const DirichletProductPrior& prior, int batch,
                                         int mc_rollouts, Rng& rng);

struct GdaFiniteResult {
  SoftmaxPartitionPolicy policy;  // iterate drawn uniformly at random
  BeliefVector belief;
  int picked_iteration = 0;
  GdaTrace trace;
};

/// Simultaneous descent (policy) / projected ascent (belief) on the
/// Bayesian regret over a finite MDP set.
GdaFiniteResult gda_run(const GdaConfig& config, const SoftmaxPartitionPolicy& init_policy,
                        std::span<const FiniteMDP> mdps, const BeliefVector& init_belief);

struct GdaDirichletResult {
  SoftmaxPartitionPolicy policy;
  DirichletProductPrior prior;
  int picked_iteration = 0;
  GdaTrace trace;
};

/// Same loop over a Dirichlet-product prior; the projection step clips the
/// parameters to the configured box.
GdaDirichletResult gda_run(const GdaConfig& config, const SoftmaxPartitionPolicy& init_policy,
                           const DirichletProductPrior& init_prior);

}  // namespace mbrl
