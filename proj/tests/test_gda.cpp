#include <cmath>
#include <vector>

#include "doctest.h"
#include "mbrl/experiments.hpp"
#include "mbrl/gda.hpp"

using namespace mbrl;

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("gda") {

TEST_CASE("finite-belief gradient components are the per-MDP regrets") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  SoftmaxPartitionPolicy policy = make_history_policy(2, 2, 3);
  Rng rng(3);
  for (double& w : policy.weights) w = rng.uniform(-1.0, 1.0);
  const StochasticGradients g = stochastic_gradients(policy, mdps, {0.4, 0.6});
  for (int i = 0; i < 2; ++i) {
    const double expected =
        backward_induction(mdps[i]).utility - evaluate_policy(mdps[i], policy);
    CHECK(g.g_belief[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(g.variance_policy == 0.0);
}

TEST_CASE("policy gradient vanishes at the parametric best response") {
  // drive the policy to the Bayes optimum of a fixed belief by descent, then
  // check the simplex-tangent-projected stationarity
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  const BeliefVector belief{0.5, 0.5};
  SoftmaxPartitionPolicy policy = make_history_policy(2, 2, 3);
  for (int iter = 0; iter < 4000; ++iter) {
    const StochasticGradients g = stochastic_gradients(policy, mdps, belief);
    for (size_t j = 0; j < policy.weights.size(); ++j) {
      policy.weights[j] -= 0.5 * g.g_policy[j];
    }
  }
  const StochasticGradients g = stochastic_gradients(policy, mdps, belief);
  CHECK(norm2(g.g_policy) < 1e-3);
}

TEST_CASE("dirichlet estimator mean matches finite differences of the regret") {
  // d/d alpha_j E[R] via the score estimator versus central differences of
  // the Monte-Carlo expectation with common random numbers
  FiniteMDP shape = gen_random_mdp(2, 2, 5, 3);
  DirichletProductPrior prior = symmetric_dirichlet_prior(shape, 1.0);
  SoftmaxPartitionPolicy policy = make_history_policy(2, 2, 3);
  Rng wrng(7);
  for (double& w : policy.weights) w = wrng.uniform(-0.5, 0.5);

  const size_t coord = 3;
  const int n = 200000;

  // score-function estimate of the derivative
  Rng rng(11);
  double score_sum = 0.0, score_sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const FiniteMDP mdp = dirichlet_sample(prior, rng);
    const double r = backward_induction(mdp).utility - evaluate_policy(mdp, policy);
    const DirichletScore score = dirichlet_score(prior, mdp);
    const double v = r * score.d_alpha[coord];
    score_sum += v;
    score_sum2 += v * v;
  }
  const double score_mean = score_sum / n;
  const double score_se =
      std::sqrt(std::max(score_sum2 / n - score_mean * score_mean, 0.0) / n);

  // finite-difference oracle with common random numbers
  const double h = 0.02;
  auto mc_regret = [&](double bump) {
    DirichletProductPrior p2 = prior;
    p2.alpha[coord] += bump;
    Rng crn(13);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const FiniteMDP mdp = dirichlet_sample(p2, crn);
      sum += backward_induction(mdp).utility - evaluate_policy(mdp, policy);
    }
    return sum / n;
  };
  const double fd = (mc_regret(h) - mc_regret(-h)) / (2 * h);
  CHECK(std::abs(score_mean - fd) <= 3.0 * score_se + 0.01);
}

TEST_CASE("zero step sizes return the inputs unchanged") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  SoftmaxPartitionPolicy policy = make_history_policy(2, 2, 3);
  Rng rng(17);
  for (double& w : policy.weights) w = rng.uniform(-1.0, 1.0);
  GdaConfig config;
  config.eta_policy = 0.0;
  config.eta_belief = 0.0;
  config.iterations = 50;
  config.seed = 5;
  const GdaFiniteResult res = gda_run(config, policy, mdps, {0.3, 0.7});
  CHECK(res.policy.weights == policy.weights);
  CHECK(res.belief[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(int(res.trace.regret_estimate.size()) == 50);
}

TEST_CASE("every trace belief stays on the simplex") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(3, 2, 4, kTwoMdpBenchmarkSeed);
  GdaConfig config;
  config.iterations = 300;
  config.seed = 3;
  const SoftmaxPartitionPolicy init = make_history_policy(3, 2, 4);
  const GdaFiniteResult res = gda_run(config, init, mdps, uniform_belief(2));
  for (const auto& belief : res.trace.belief) validate_belief(belief);
}

TEST_CASE("trace regret is bounded by the worst-case regret of the iterate") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  GdaConfig config;
  config.iterations = 200;
  config.seed = 9;
  const SoftmaxPartitionPolicy init = make_history_policy(2, 2, 3);
  const GdaFiniteResult res = gda_run(config, init, mdps, {0.5, 0.5});
  // replay the run to recover iterates is overkill; check the recorded
  // estimates against the max of the belief-gradient components, which equal
  // the per-MDP regrets of the same iterate
  SoftmaxPartitionPolicy policy = init;
  BeliefVector belief{0.5, 0.5};
  for (int t = 0; t < config.iterations; ++t) {
    const StochasticGradients g = stochastic_gradients(policy, mdps, belief);
    const double worst = std::max(g.g_belief[0], g.g_belief[1]);
    CHECK(res.trace.regret_estimate[t] <= worst + 1e-10);
    for (size_t j = 0; j < policy.weights.size(); ++j) {
      policy.weights[j] -= config.eta_policy * g.g_policy[j];
    }
    std::vector<double> shifted(2);
    for (int i = 0; i < 2; ++i) shifted[i] = belief[i] + config.eta_belief * g.g_belief[i];
    belief = simplex_project(shifted);
  }
}

TEST_CASE("gda approaches the matrix-game saddle on the benchmark") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  const std::vector<double> ustar = optimal_utilities(mdps);

  // oracle: grid maximin over the Bayes-optimal responder
  double game_value = 0.0;
  BeliefVector maximin{1.0, 0.0};
  for (int g = 0; g <= 100; ++g) {
    const double x = g / 100.0;
    const BeliefVector belief{1.0 - x, x};
    const double value =
        belief[0] * ustar[0] + belief[1] * ustar[1] - bayes_optimal_value(mdps, belief);
    if (value > game_value) {
      game_value = value;
      maximin = belief;
    }
  }

  GdaConfig config;
  config.iterations = 4000;
  config.eta_policy = 0.2;
  config.eta_belief = 0.002;
  config.seed = 12;
  const SoftmaxPartitionPolicy init = make_history_policy(3, 2, 5);
  const GdaFiniteResult res = gda_run(config, init, mdps, uniform_belief(2));

  CHECK(std::abs(res.belief[0] - maximin[0]) + std::abs(res.belief[1] - maximin[1]) <= 0.05);
  const StochasticGradients g = stochastic_gradients(res.policy, mdps, res.belief);
  const double worst = std::max(g.g_belief[0], g.g_belief[1]);
  CHECK(std::abs(worst - game_value) <= 0.02);
}

TEST_CASE("stationarity proxy improves over the run") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  GdaConfig config;
  config.iterations = 2000;
  config.eta_policy = 0.2;
  config.eta_belief = 0.002;
  config.seed = 4;
  const SoftmaxPartitionPolicy init = make_history_policy(3, 2, 5);
  const GdaFiniteResult res = gda_run(config, init, mdps, uniform_belief(2));
  const int tenth = config.iterations / 10;
  double head = 0.0, tail = 0.0;
  for (int t = 0; t < tenth; ++t) {
    head += res.trace.g_policy_norm[t];
    tail += res.trace.g_policy_norm[config.iterations - 1 - t];
  }
  CHECK(tail < head);
}

TEST_CASE("dirichlet gda clips parameters into the configured box") {
  FiniteMDP shape = gen_random_mdp(3, 2, 5, 6);
  const DirichletProductPrior prior = symmetric_dirichlet_prior(shape, 1.0);
  GdaConfig config;
  config.belief_kind = BeliefKind::dirichlet;
  config.iterations = 60;
  config.batch = 4;
  config.eta_belief = 0.5;  // aggressive on purpose
  config.alpha_min = 0.05;
  config.alpha_max = 5.0;
  config.seed = 21;
  const SoftmaxPartitionPolicy init = make_window_policy(3, 2, 6, 2);
  const GdaDirichletResult res = gda_run(config, init, prior);
  for (const auto& alpha : res.trace.belief) {
    for (double v : alpha) {
      CHECK(v >= 0.05 - 1e-12);
      CHECK(v <= 5.0 + 1e-12);
    }
  }
}

TEST_CASE("divergence guard aborts on absurd step sizes") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  GdaConfig config;
  config.eta_policy = 1e9;
  config.iterations = 500;
  config.divergence_guard = 1e6;
  const SoftmaxPartitionPolicy init = make_history_policy(2, 2, 3);
  CHECK_THROWS_AS(gda_run(config, init, mdps, {0.5, 0.5}), std::runtime_error);
}

}  // TEST_SUITE
