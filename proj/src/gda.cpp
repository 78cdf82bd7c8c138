#include "mbrl/gda.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_divergence(const SoftmaxPartitionPolicy& policy, double guard) {
  for (double w : policy.weights) {
    if (!std::isfinite(w) || std::abs(w) > guard) {
      throw std::runtime_error("gda: policy weights diverged past the guard");
    }
  }
}

}  // namespace

void GdaConfig::validate() const {
  require(eta_policy >= 0.0 && eta_belief >= 0.0, "gda: step sizes must be nonnegative");
  require(batch >= 1, "gda: batch must be >= 1");
  require(iterations >= 1, "gda: iterations must be >= 1");
  require(mc_rollouts == 0 || mc_rollouts >= 2, "gda: mc_rollouts must be 0 (exact) or >= 2");
  require(alpha_min > 0.0 && alpha_max > alpha_min, "gda: bad clip box");
}

StochasticGradients stochastic_gradients(const SoftmaxPartitionPolicy& policy,
                                         std::span<const FiniteMDP> mdps,
                                         const BeliefVector& belief) {
  validate_belief(belief);
  require(belief.size() == mdps.size(), "gda: belief length mismatch");
  StochasticGradients out;
  out.g_policy.assign(policy.weights.size(), 0.0);
  out.g_belief.resize(mdps.size());
  for (size_t i = 0; i < mdps.size(); ++i) {
    const double ustar = backward_induction(mdps[i]).utility;
    const double u = evaluate_policy(mdps[i], policy);
    out.g_belief[i] = ustar - u;  // d regret / d belief_i
    out.regret_estimate += belief[i] * (ustar - u);
    if (belief[i] > 0.0) {
      const std::vector<double> grad = utility_gradient(mdps[i], policy);
      for (size_t j = 0; j < grad.size(); ++j) out.g_policy[j] -= belief[i] * grad[j];
    }
  }
  return out;  // exact: variance estimates stay zero
}

StochasticGradients stochastic_gradients(const SoftmaxPartitionPolicy& policy,
                                         const DirichletProductPrior& prior, int batch,
                                         int mc_rollouts, Rng& rng) {
  prior.validate();
  require(batch >= 1, "gda: batch must be >= 1");
  StochasticGradients out;
  out.g_policy.assign(policy.weights.size(), 0.0);
  out.g_belief.assign(prior.alpha.size(), 0.0);

  std::vector<std::vector<double>> policy_samples;
  std::vector<std::vector<double>> belief_samples;
  policy_samples.reserve(batch);
  belief_samples.reserve(batch);
  for (int k = 0; k < batch; ++k) {
    const FiniteMDP mdp = dirichlet_sample(prior, rng);
    const double ustar = backward_induction(mdp).utility;
    double u;
    std::vector<double> g_pi;
    if (mc_rollouts == 0) {
      u = evaluate_policy(mdp, policy);
      g_pi = utility_gradient(mdp, policy);
    } else {
      const McGradient mc = utility_gradient_mc(mdp, policy, mc_rollouts, rng);
      g_pi = mc.g;
      double sum = 0.0;
      for (int r = 0; r < mc_rollouts; ++r) sum += rollout_utility(mdp, policy, rng);
      u = sum / mc_rollouts;
    }
    const double sample_regret = ustar - u;
    out.regret_estimate += sample_regret / batch;

    const DirichletScore score = dirichlet_score(prior, mdp);
    std::vector<double> g_bel(score.d_alpha.size());
    for (size_t j = 0; j < g_bel.size(); ++j) g_bel[j] = sample_regret * score.d_alpha[j];
    for (double& v : g_pi) v = -v;  // descent on the Bayesian regret

    for (size_t j = 0; j < g_pi.size(); ++j) out.g_policy[j] += g_pi[j] / batch;
    for (size_t j = 0; j < g_bel.size(); ++j) out.g_belief[j] += g_bel[j] / batch;
    policy_samples.push_back(std::move(g_pi));
    belief_samples.push_back(std::move(g_bel));
  }
  if (batch > 1) {
    for (int k = 0; k < batch; ++k) {
      double d2 = 0.0;
      for (size_t j = 0; j < out.g_policy.size(); ++j) {
        const double d = policy_samples[k][j] - out.g_policy[j];
        d2 += d * d;
      }
      out.variance_policy += d2 / (batch - 1);
      d2 = 0.0;
      for (size_t j = 0; j < out.g_belief.size(); ++j) {
        const double d = belief_samples[k][j] - out.g_belief[j];
        d2 += d * d;
      }
      out.variance_belief += d2 / (batch - 1);
    }
    out.variance_policy /= batch;
    out.variance_belief /= batch;
  }
  return out;
}

GdaFiniteResult gda_run(const GdaConfig& config, const SoftmaxPartitionPolicy& init_policy,
                        std::span<const FiniteMDP> mdps, const BeliefVector& init_belief) {
  config.validate();
  require(config.belief_kind == BeliefKind::finite, "gda_run: config is not finite-belief");
  Rng rng(config.seed);
  const int picked = 1 + rng.uniform_int(config.iterations);  // uniform over iterates

  GdaFiniteResult res;
  res.policy = init_policy;
  res.belief = init_belief;
  res.picked_iteration = picked;
  SoftmaxPartitionPolicy policy = init_policy;
  BeliefVector belief = init_belief;

  for (int t = 1; t <= config.iterations; ++t) {
    const StochasticGradients g = stochastic_gradients(policy, mdps, belief);
    // simultaneous update: both gradients read the same iterate
    for (size_t j = 0; j < policy.weights.size(); ++j) {
      policy.weights[j] -= config.eta_policy * g.g_policy[j];
    }
    std::vector<double> shifted(belief.size());
    for (size_t i = 0; i < belief.size(); ++i) {
      shifted[i] = belief[i] + config.eta_belief * g.g_belief[i];
    }
    belief = simplex_project(shifted);
    check_divergence(policy, config.divergence_guard);

    res.trace.regret_estimate.push_back(g.regret_estimate);
    res.trace.g_policy_norm.push_back(norm2(g.g_policy));
    res.trace.g_belief_norm.push_back(norm2(g.g_belief));
    res.trace.belief.push_back(belief);
    if (t == picked) {
      res.policy = policy;
      res.belief = belief;
    }
  }
  return res;
}

GdaDirichletResult gda_run(const GdaConfig& config, const SoftmaxPartitionPolicy& init_policy,
                           const DirichletProductPrior& init_prior) {
  config.validate();
  require(config.belief_kind == BeliefKind::dirichlet, "gda_run: config is not dirichlet");
  Rng rng(config.seed);
  const int picked = 1 + rng.uniform_int(config.iterations);

  GdaDirichletResult res;
  res.policy = init_policy;
  res.prior = init_prior;
  res.picked_iteration = picked;
  SoftmaxPartitionPolicy policy = init_policy;
  DirichletProductPrior prior = init_prior;

  for (int t = 1; t <= config.iterations; ++t) {
    const StochasticGradients g =
        stochastic_gradients(policy, prior, config.batch, config.mc_rollouts, rng);
    for (size_t j = 0; j < policy.weights.size(); ++j) {
      policy.weights[j] -= config.eta_policy * g.g_policy[j];
    }
    for (size_t j = 0; j < prior.alpha.size(); ++j) {
      prior.alpha[j] += config.eta_belief * g.g_belief[j];
    }
    clip_prior_parameters(prior, config.alpha_min, config.alpha_max);
    check_divergence(policy, config.divergence_guard);

    res.trace.regret_estimate.push_back(g.regret_estimate);
    res.trace.g_policy_norm.push_back(norm2(g.g_policy));
    res.trace.g_belief_norm.push_back(norm2(g.g_belief));
    res.trace.belief.push_back(prior.alpha);
    if (t == picked) {
      res.policy = policy;
      res.prior = prior;
    }
  }
  return res;
}

}  // namespace mbrl
