#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mbrl/mdp.hpp"

namespace mbrl {

/// Probability vector over a finite MDP set.
using BeliefVector = std::vector<double>;

void validate_belief(std::span<const double> belief);

BeliefVector dirac_belief(int n, int index);
BeliefVector uniform_belief(int n);

/// Euclidean projection onto the probability simplex (sort-based, exact).
BeliefVector simplex_project(std::span<const double> v);

/// Visits every point of the simplex grid {k/resolution} with the given
/// dimension; includes the vertices.
void for_each_simplex_grid(int dim, int resolution,
                           const std::function<void(std::span<const double>)>& fn);

double digamma(double x);

/// Independent Beta(a[s], b[s]) prior over the per-state reward.
struct BetaRewardPrior {
  std::vector<double> a;
  std::vector<double> b;
};

/// One Dirichlet distribution per (state, action) transition row, plus an
/// optional Beta reward prior. Sampled MDPs take their shape (horizon,
/// discount, start distribution, fixed rewards) from the fields here.
struct DirichletProductPrior {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 1;
  double discount = 1.0;
  std::vector<double> alpha;         // [s][a][s'], all > 0
  std::vector<double> fixed_reward;  // [s][a], used when reward_prior is absent
  std::vector<double> initial;
  std::optional<BetaRewardPrior> reward_prior;

  double a(int s, int act, int s2) const {
    return alpha[(size_t(s) * n_actions + act) * n_states + s2];
  }
  double& a(int s, int act, int s2) {
    return alpha[(size_t(s) * n_actions + act) * n_states + s2];
  }
  void validate() const;
};

/// Symmetric prior (every alpha = concentration) whose samples share the
/// reward structure and shape of `shape_like`.
DirichletProductPrior symmetric_dirichlet_prior(const FiniteMDP& shape_like,
                                                double concentration);

FiniteMDP dirichlet_sample(const DirichletProductPrior& prior, Rng& rng);

/// ln beta(mu), including the reward term when a reward prior is present.
double dirichlet_log_density(const DirichletProductPrior& prior, const FiniteMDP& mdp);

struct DirichletScore {
  std::vector<double> d_alpha;  // same layout as prior.alpha
  bool clamped = false;         // some transition probability was below the log floor
};

/// Gradient of ln beta(mu) in the Dirichlet parameters:
/// psi(sum_j alpha_j) - psi(alpha_i) + ln mu_i per row. Transition
/// probabilities below 1e-12 are clamped and flagged; exact zeros throw.
DirichletScore dirichlet_score(const DirichletProductPrior& prior, const FiniteMDP& mdp);

struct BetaRewardScore {
  std::vector<double> d_a;  // per state
  std::vector<double> d_b;
  std::vector<double> d_p;  // alternate parametrisation p = a/(a+b), n = a+b
  std::vector<double> d_n;
};

/// Gradients of ln beta(mu) in the reward-prior parameters, in both the
/// (a, b) and the (p, n) parametrisations. Rewards are read per state from
/// action 0 and must lie strictly inside (0, 1).
BetaRewardScore beta_reward_score(const DirichletProductPrior& prior, const FiniteMDP& mdp);

/// Componentwise clip of all Dirichlet (and reward-prior) parameters; the
/// projection step of gradient ascent over priors.
void clip_prior_parameters(DirichletProductPrior& prior, double lo, double hi);

}  // namespace mbrl
