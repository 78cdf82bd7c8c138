#include "mbrl/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

constexpr double kLogFloor = 1e-12;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void validate_belief(std::span<const double> belief) {
  require(!belief.empty(), "belief: empty vector");
  double sum = 0.0;
  for (double v : belief) {
    require(v >= 0.0 && std::isfinite(v), "belief: negative or non-finite weight");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= kRowSumTolerance, "belief: weights do not sum to one");
}

BeliefVector dirac_belief(int n, int index) {
  BeliefVector b(n, 0.0);
  b.at(index) = 1.0;
  return b;
}

BeliefVector uniform_belief(int n) { return BeliefVector(n, 1.0 / n); }

BeliefVector simplex_project(std::span<const double> v) {
  require(!v.empty(), "simplex_project: empty vector");
  for (double x : v) require(std::isfinite(x), "simplex_project: non-finite entry");
  const int n = int(v.size());
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  for (int j = 0; j < n; ++j) {
    running += sorted[j];
    const double candidate = (running - 1.0) / double(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  BeliefVector out(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = std::max(v[i] - tau, 0.0);
    sum += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= sum;  // absorb rounding residue
  return out;
}

void for_each_simplex_grid(int dim, int resolution,
                           const std::function<void(std::span<const double>)>& fn) {
  require(dim >= 1 && resolution >= 1, "simplex grid: bad shape");
  std::vector<int> counts(dim, 0);
  std::vector<double> point(dim, 0.0);
  const double step = 1.0 / resolution;
  std::function<void(int, int)> rec = [&](int i, int remaining) {
    if (i == dim - 1) {
      counts[i] = remaining;
      for (int k = 0; k < dim; ++k) point[k] = counts[k] * step;
      fn(point);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[i] = c;
      rec(i + 1, remaining - c);
    }
  };
  rec(0, resolution);
}

double digamma(double x) {
  require(x > 0.0, "digamma: domain is x > 0");
  double value = 0.0;
  while (x < 12.0) {  // recurrence psi(x) = psi(x + 1) - 1/x
    value -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // asymptotic expansion, coefficients -B_{2k}/(2k)
  value += std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return value;
}

void DirichletProductPrior::validate() const {
  require(n_states >= 1 && n_actions >= 1, "prior: empty state or action space");
  require(horizon >= 1, "prior: horizon must be >= 1");
  require(discount > 0.0 && discount <= 1.0, "prior: discount must lie in (0, 1]");
  require(alpha.size() == size_t(n_states) * n_actions * n_states, "prior: alpha has wrong size");
  for (double v : alpha) require(v > 0.0 && std::isfinite(v), "prior: alpha must be positive");
  require(fixed_reward.size() == size_t(n_states) * n_actions, "prior: reward table wrong size");
  require(initial.size() == size_t(n_states), "prior: initial distribution wrong size");
  if (reward_prior) {
    require(reward_prior->a.size() == size_t(n_states) && reward_prior->b.size() == size_t(n_states),
            "prior: reward prior needs one (a, b) pair per state");
    for (int s = 0; s < n_states; ++s) {
      require(reward_prior->a[s] > 0.0 && reward_prior->b[s] > 0.0,
              "prior: Beta parameters must be positive");
    }
  }
}

DirichletProductPrior symmetric_dirichlet_prior(const FiniteMDP& shape_like, double concentration) {
  require(concentration > 0.0, "prior: concentration must be positive");
  DirichletProductPrior prior;
  prior.n_states = shape_like.n_states;
  prior.n_actions = shape_like.n_actions;
  prior.horizon = shape_like.horizon;
  prior.discount = shape_like.discount;
  prior.alpha.assign(size_t(prior.n_states) * prior.n_actions * prior.n_states, concentration);
  prior.fixed_reward = shape_like.reward;
  prior.initial = shape_like.initial;
  return prior;
}

FiniteMDP dirichlet_sample(const DirichletProductPrior& prior, Rng& rng) {
  prior.validate();
  FiniteMDP mdp = make_mdp(prior.n_states, prior.n_actions, prior.horizon, prior.discount);
  mdp.initial = prior.initial;
  mdp.reward = prior.fixed_reward;
  const int S = prior.n_states, A = prior.n_actions;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      rng.dirichlet(std::span<const double>(prior.alpha.data() + (size_t(s) * A + a) * S, S),
                    std::span<double>(mdp.transition.data() + (size_t(s) * A + a) * S, S));
    }
  }
  if (prior.reward_prior) {
    for (int s = 0; s < S; ++s) {
      const double rho = rng.beta(prior.reward_prior->a[s], prior.reward_prior->b[s]);
      for (int a = 0; a < A; ++a) mdp.r(s, a) = rho;
    }
  }
  return mdp;
}

double dirichlet_log_density(const DirichletProductPrior& prior, const FiniteMDP& mdp) {
  prior.validate();
  const int S = prior.n_states, A = prior.n_actions;
  require(mdp.n_states == S && mdp.n_actions == A, "log density: MDP shape mismatch");
  double logp = 0.0;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double alpha_sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        const double al = prior.a(s, a, s2);
        const double mu = std::max(mdp.p(s, a, s2), kLogFloor);
        logp += (al - 1.0) * std::log(mu) - std::lgamma(al);
        alpha_sum += al;
      }
      logp += std::lgamma(alpha_sum);
    }
  }
  if (prior.reward_prior) {
    for (int s = 0; s < S; ++s) {
      const double a = prior.reward_prior->a[s];
      const double b = prior.reward_prior->b[s];
      const double rho = mdp.r(s, 0);
      require(rho > 0.0 && rho < 1.0, "log density: reward outside (0, 1)");
      logp += std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(rho) +
              (b - 1.0) * std::log(1.0 - rho);
    }
  }
  return logp;
}

DirichletScore dirichlet_score(const DirichletProductPrior& prior, const FiniteMDP& mdp) {
  prior.validate();
  const int S = prior.n_states, A = prior.n_actions;
  require(mdp.n_states == S && mdp.n_actions == A, "dirichlet_score: MDP shape mismatch");
  DirichletScore score;
  score.d_alpha.assign(prior.alpha.size(), 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double alpha_sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) alpha_sum += prior.a(s, a, s2);
      const double psi_sum = digamma(alpha_sum);
      for (int s2 = 0; s2 < S; ++s2) {
        double mu = mdp.p(s, a, s2);
        if (mu == 0.0) {
          throw std::domain_error("dirichlet_score: zero transition probability at (" +
                                  std::to_string(s) + "," + std::to_string(a) + "," +
                                  std::to_string(s2) + ") with positive alpha");
        }
        if (mu < kLogFloor) {
          mu = kLogFloor;
          score.clamped = true;
        }
        score.d_alpha[(size_t(s) * A + a) * S + s2] =
            psi_sum - digamma(prior.a(s, a, s2)) + std::log(mu);
      }
    }
  }
  return score;
}

BetaRewardScore beta_reward_score(const DirichletProductPrior& prior, const FiniteMDP& mdp) {
  prior.validate();
  require(prior.reward_prior.has_value(), "beta_reward_score: prior has no reward prior");
  const int S = prior.n_states;
  require(mdp.n_states == S, "beta_reward_score: MDP shape mismatch");
  BetaRewardScore score;
  score.d_a.resize(S);
  score.d_b.resize(S);
  score.d_p.resize(S);
  score.d_n.resize(S);
  for (int s = 0; s < S; ++s) {
    const double a = prior.reward_prior->a[s];
    const double b = prior.reward_prior->b[s];
    const double rho = mdp.r(s, 0);
    if (!(rho > 0.0 && rho < 1.0)) {
      throw std::domain_error("beta_reward_score: reward at state " + std::to_string(s) +
                              " lies on the boundary of (0, 1)");
    }
    const double psi_ab = digamma(a + b);
    const double psi_a = digamma(a);
    const double psi_b = digamma(b);
    const double log_rho = std::log(rho);
    const double log_1m = std::log(1.0 - rho);
    score.d_a[s] = psi_ab - psi_a + log_rho;
    score.d_b[s] = psi_ab - psi_b + log_1m;
    const double p = a / (a + b);
    const double n = a + b;
    score.d_p[s] = n * (-psi_a + psi_b + log_rho - log_1m);
    score.d_n[s] = p * (-psi_a + psi_b + log_rho - log_1m) + (psi_ab - psi_b + log_1m);
  }
  return score;
}

void clip_prior_parameters(DirichletProductPrior& prior, double lo, double hi) {
  for (double& v : prior.alpha) v = std::clamp(v, lo, hi);
  if (prior.reward_prior) {
    for (double& v : prior.reward_prior->a) v = std::clamp(v, lo, hi);
    for (double& v : prior.reward_prior->b) v = std::clamp(v, lo, hi);
  }
}

}  // namespace mbrl
