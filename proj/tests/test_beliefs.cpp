#include <cmath>
#include <vector>

#include "doctest.h"
#include "mbrl/beliefs.hpp"

using namespace mbrl;

namespace {

// KKT conditions of min ||x - v||^2 over the simplex: feasibility plus a
// common multiplier tau with x_i = v_i - tau on the support and v_i <= tau
// off it. Independent certificate for the sort-based projection.
bool satisfies_projection_kkt(std::span<const double> v, std::span<const double> x) {
  double sum = 0.0;
  double tau = 0.0;
  int support = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < -1e-12) return false;
    sum += x[i];
    if (x[i] > 1e-12) {
      tau += v[i] - x[i];
      ++support;
    }
  }
  if (std::abs(sum - 1.0) > 1e-9 || support == 0) return false;
  tau /= support;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1e-12) {
      if (std::abs((v[i] - x[i]) - tau) > 1e-9) return false;
    } else if (v[i] > tau + 1e-9) {
      return false;
    }
  }
  return true;
}

double norm2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

DirichletProductPrior test_prior(double concentration = 1.0) {
  const FiniteMDP shape = gen_random_mdp(3, 2, 99, 4);
  return symmetric_dirichlet_prior(shape, concentration);
}

}  // namespace

TEST_SUITE("beliefs") {

TEST_CASE("projection leaves simplex points unchanged") {
  const std::vector<double> v{0.2, 0.5, 0.3};
  const BeliefVector out = simplex_project(v);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(v[i]).epsilon(1e-12));
}

TEST_CASE("projection maps (2, 0) to the vertex") {
  const std::vector<double> v{2.0, 0.0};
  const BeliefVector out = simplex_project(v);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("symmetric input projects to the uniform point with valid KKT") {
  const std::vector<double> v{0.6, 0.6, 0.6};
  const BeliefVector out = simplex_project(v);
  for (double x : out) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(satisfies_projection_kkt(v, out));
}

TEST_CASE("projection satisfies KKT on random inputs") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + rng.uniform_int(5);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    const BeliefVector out = simplex_project(v);
    validate_belief(out);
    CHECK(satisfies_projection_kkt(v, out));
  }
}

TEST_CASE("projection is non-expansive") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + rng.uniform_int(4);
    std::vector<double> u(n), v(n);
    for (int j = 0; j < n; ++j) {
      u[j] = rng.uniform(-3.0, 3.0);
      v[j] = rng.uniform(-3.0, 3.0);
    }
    CHECK(norm2(simplex_project(u), simplex_project(v)) <= norm2(u, v) + 1e-12);
  }
}

TEST_CASE("digamma matches reference values") {
  const double euler = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - euler).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(digamma(10.0) == doctest::Approx(2.2517525890667211).epsilon(1e-12));
}

TEST_CASE("huge symmetric concentration samples near-uniform rows") {
  DirichletProductPrior prior = test_prior(1e6);
  Rng rng(10);
  const FiniteMDP mdp = dirichlet_sample(prior, rng);
  mdp.validate();
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int s2 = 0; s2 < 3; ++s2) CHECK(std::abs(mdp.p(s, a, s2) - 1.0 / 3.0) < 0.01);
    }
  }
}

TEST_CASE("sampling is deterministic under the seed") {
  DirichletProductPrior prior = test_prior();
  Rng r1(123), r2(123);
  CHECK(dirichlet_sample(prior, r1).transition == dirichlet_sample(prior, r2).transition);
}

TEST_CASE("first-component mean of Dirichlet(1,1) rows is one half") {
  // moment oracle: E[p_1] = alpha_1 / sum(alpha) = 1/2
  FiniteMDP shape = make_mdp(2, 1, 1);
  shape.p(0, 0, 0) = 1.0;
  shape.p(1, 0, 1) = 1.0;
  DirichletProductPrior prior = symmetric_dirichlet_prior(shape, 1.0);
  Rng rng(17);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += dirichlet_sample(prior, rng).p(0, 0, 0);
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("score-function identity: prior mean of the score is zero") {
  DirichletProductPrior prior = test_prior(1.5);
  Rng rng(21);
  const int n = 100000;
  std::vector<double> mean(prior.alpha.size(), 0.0), m2(prior.alpha.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const DirichletScore score = dirichlet_score(prior, dirichlet_sample(prior, rng));
    for (size_t j = 0; j < mean.size(); ++j) {
      mean[j] += score.d_alpha[j];
      m2[j] += score.d_alpha[j] * score.d_alpha[j];
    }
  }
  for (size_t j = 0; j < mean.size(); ++j) {
    const double m = mean[j] / n;
    const double se = std::sqrt(std::max(m2[j] / n - m * m, 0.0) / n);
    CHECK(std::abs(m) <= 3.0 * se + 1e-4);
  }
}

TEST_CASE("score at a uniform row substitutes the digamma formula") {
  FiniteMDP shape = make_mdp(2, 1, 1);
  shape.p(0, 0, 0) = 1.0;
  shape.p(1, 0, 1) = 1.0;
  DirichletProductPrior prior = symmetric_dirichlet_prior(shape, 1.0);
  FiniteMDP mdp = shape;
  for (int s = 0; s < 2; ++s) {
    for (int s2 = 0; s2 < 2; ++s2) mdp.p(s, 0, s2) = 0.5;
  }
  const DirichletScore score = dirichlet_score(prior, mdp);
  const double expected = digamma(2.0) - digamma(1.0) + std::log(0.5);
  for (double v : score.d_alpha) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("score matches central finite differences of the log density") {
  DirichletProductPrior prior = test_prior(0.8);
  Rng rng(33);
  const FiniteMDP mdp = dirichlet_sample(prior, rng);
  const DirichletScore score = dirichlet_score(prior, mdp);
  const double h = 1e-5;
  for (size_t j = 0; j < prior.alpha.size(); j += 5) {
    DirichletProductPrior lo = prior, hi = prior;
    lo.alpha[j] -= h;
    hi.alpha[j] += h;
    const double fd = (dirichlet_log_density(hi, mdp) - dirichlet_log_density(lo, mdp)) / (2 * h);
    CHECK(score.d_alpha[j] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("zero transition probability with positive alpha is a domain error") {
  DirichletProductPrior prior = test_prior();
  FiniteMDP mdp = gen_random_mdp(3, 2, 1, 4);
  mdp.p(0, 0, 0) += mdp.p(0, 0, 1);
  mdp.p(0, 0, 1) = 0.0;
  CHECK_THROWS_AS(dirichlet_score(prior, mdp), std::domain_error);
}

TEST_CASE("near-zero transition probabilities clamp and flag") {
  DirichletProductPrior prior = test_prior();
  FiniteMDP mdp = gen_random_mdp(3, 2, 1, 4);
  const double eps = 1e-14;
  mdp.p(0, 0, 0) += mdp.p(0, 0, 1) - eps;
  mdp.p(0, 0, 1) = eps;
  const DirichletScore score = dirichlet_score(prior, mdp);
  CHECK(score.clamped);
  for (double v : score.d_alpha) CHECK(std::isfinite(v));
}

TEST_CASE("beta reward score is zero at the symmetric point") {
  DirichletProductPrior prior = test_prior();
  prior.reward_prior = BetaRewardPrior{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};  // p=1/2, n=2
  Rng rng(4);
  FiniteMDP mdp = dirichlet_sample(prior, rng);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) mdp.r(s, a) = 0.5;
  }
  const BetaRewardScore score = beta_reward_score(prior, mdp);
  for (int s = 0; s < 3; ++s) CHECK(score.d_p[s] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("beta reward score mean vanishes under the prior") {
  DirichletProductPrior prior = test_prior();
  prior.reward_prior = BetaRewardPrior{{2.0, 1.5, 0.8}, {1.0, 2.5, 0.9}};
  Rng rng(55);
  const int n = 100000;
  std::vector<double> mean(4, 0.0), m2(4, 0.0);
  for (int i = 0; i < n; ++i) {
    const FiniteMDP mdp = dirichlet_sample(prior, rng);
    const BetaRewardScore score = beta_reward_score(prior, mdp);
    const double vals[4] = {score.d_a[0], score.d_b[0], score.d_a[2], score.d_b[2]};
    for (int k = 0; k < 4; ++k) {
      mean[k] += vals[k];
      m2[k] += vals[k] * vals[k];
    }
  }
  for (int k = 0; k < 4; ++k) {
    const double m = mean[k] / n;
    const double se = std::sqrt(std::max(m2[k] / n - m * m, 0.0) / n);
    CHECK(std::abs(m) <= 3.0 * se + 1e-4);
  }
}

TEST_CASE("beta reward score matches finite differences in all four parameters") {
  DirichletProductPrior prior = test_prior();
  prior.reward_prior = BetaRewardPrior{{1.7, 0.9, 2.2}, {0.8, 1.3, 3.0}};
  Rng rng(66);
  const FiniteMDP mdp = dirichlet_sample(prior, rng);
  const BetaRewardScore score = beta_reward_score(prior, mdp);
  const double h = 1e-5;
  for (int s = 0; s < 3; ++s) {
    DirichletProductPrior lo = prior, hi = prior;
    lo.reward_prior->a[s] -= h;
    hi.reward_prior->a[s] += h;
    double fd = (dirichlet_log_density(hi, mdp) - dirichlet_log_density(lo, mdp)) / (2 * h);
    CHECK(score.d_a[s] == doctest::Approx(fd).epsilon(1e-5));
    lo = prior;
    hi = prior;
    lo.reward_prior->b[s] -= h;
    hi.reward_prior->b[s] += h;
    fd = (dirichlet_log_density(hi, mdp) - dirichlet_log_density(lo, mdp)) / (2 * h);
    CHECK(score.d_b[s] == doctest::Approx(fd).epsilon(1e-5));
    // (p, n) via the reparametrised density a = p n, b = n (1 - p)
    const double a = prior.reward_prior->a[s], b = prior.reward_prior->b[s];
    const double p = a / (a + b), n = a + b;
    lo = prior;
    hi = prior;
    lo.reward_prior->a[s] = (p - h) * n;
    lo.reward_prior->b[s] = n * (1.0 - (p - h));
    hi.reward_prior->a[s] = (p + h) * n;
    hi.reward_prior->b[s] = n * (1.0 - (p + h));
    fd = (dirichlet_log_density(hi, mdp) - dirichlet_log_density(lo, mdp)) / (2 * h);
    CHECK(score.d_p[s] == doctest::Approx(fd).epsilon(1e-5));
    lo = prior;
    hi = prior;
    lo.reward_prior->a[s] = p * (n - h);
    lo.reward_prior->b[s] = (n - h) * (1.0 - p);
    hi.reward_prior->a[s] = p * (n + h);
    hi.reward_prior->b[s] = (n + h) * (1.0 - p);
    fd = (dirichlet_log_density(hi, mdp) - dirichlet_log_density(lo, mdp)) / (2 * h);
    CHECK(score.d_n[s] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("chain rule ties the two reward parametrisations together") {
  DirichletProductPrior prior = test_prior();
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    prior.reward_prior = BetaRewardPrior{{rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)},
                                         {rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)}};
    const FiniteMDP mdp = dirichlet_sample(prior, rng);
    const BetaRewardScore score = beta_reward_score(prior, mdp);
    for (int s = 0; s < 3; ++s) {
      const double a = prior.reward_prior->a[s], b = prior.reward_prior->b[s];
      const double p = a / (a + b), n = a + b;
      // J^T grad with alpha = p n, beta = n (1 - p)
      const double dp = n * score.d_a[s] - n * score.d_b[s];
      const double dn = p * score.d_a[s] + (1.0 - p) * score.d_b[s];
      CHECK(score.d_p[s] == doctest::Approx(dp).epsilon(1e-8));
      CHECK(score.d_n[s] == doctest::Approx(dn).epsilon(1e-8));
    }
  }
}

TEST_CASE("boundary rewards are a domain error") {
  DirichletProductPrior prior = test_prior();
  prior.reward_prior = BetaRewardPrior{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  Rng rng(3);
  FiniteMDP mdp = dirichlet_sample(prior, rng);
  for (int a = 0; a < 2; ++a) mdp.r(1, a) = 1.0;
  CHECK_THROWS_AS(beta_reward_score(prior, mdp), std::domain_error);
}

TEST_CASE("grid iteration covers the simplex including vertices") {
  int count = 0;
  bool saw_vertex = false, saw_uniform = false;
  for_each_simplex_grid(3, 10, [&](std::span<const double> b) {
    ++count;
    double sum = 0.0;
    for (double v : b) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    if (b[0] == 1.0) saw_vertex = true;
    if (std::abs(b[0] - 0.3) < 1e-12 && std::abs(b[1] - 0.3) < 1e-12) saw_uniform = true;
  });
  CHECK(count == 66);  // C(12, 2)
  CHECK(saw_vertex);
  CHECK(saw_uniform);
}

}  // TEST_SUITE
