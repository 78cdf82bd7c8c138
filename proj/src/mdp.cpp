#include "mbrl/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool is_distribution(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= kRowSumTolerance;
}

}  // namespace

int FiniteMDP::initial_state() const {
  for (int s = 0; s < n_states; ++s) {
    if (initial[s] == 1.0) return s;
  }
  return -1;
}

void FiniteMDP::set_initial_state(int s) {
  initial.assign(n_states, 0.0);
  initial[s] = 1.0;
}

double FiniteMDP::utility_upper_bound() const {
  double bound = 0.0;
  double scale = 1.0;
  for (int t = 0; t < horizon; ++t) {
    bound += scale;
    scale *= discount;
  }
  return bound;
}

void FiniteMDP::validate() const {
  check(n_states >= 1 && n_actions >= 1, "mdp: needs at least one state and action");
  check(horizon >= 1, "mdp: horizon must be >= 1");
  check(discount > 0.0 && discount <= 1.0, "mdp: discount must lie in (0, 1]");
  check(transition.size() == size_t(n_states) * n_actions * n_states,
        "mdp: transition tensor has wrong size");
  check(reward.size() == size_t(n_states) * n_actions, "mdp: reward table has wrong size");
  check(initial.size() == size_t(n_states), "mdp: initial distribution has wrong size");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      check(is_distribution(row(s, a)),
            "mdp: transition row (" + std::to_string(s) + "," + std::to_string(a) +
                ") is not a probability distribution");
      check(r(s, a) >= 0.0 && r(s, a) <= 1.0, "mdp: rewards must lie in [0, 1]");
    }
  }
  check(is_distribution(initial), "mdp: initial distribution does not sum to one");
}

FiniteMDP make_mdp(int n_states, int n_actions, int horizon, double discount) {
  FiniteMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.horizon = horizon;
  mdp.discount = discount;
  mdp.transition.assign(size_t(n_states) * n_actions * n_states, 0.0);
  mdp.reward.assign(size_t(n_states) * n_actions, 0.0);
  mdp.initial.assign(size_t(n_states), 0.0);
  mdp.initial[0] = 1.0;
  return mdp;
}

void MemorylessPolicy::validate() const {
  check(n_states >= 1 && n_actions >= 1, "policy: empty state or action space");
  const size_t tables = stationary() ? 1 : size_t(n_steps);
  check(probs.size() == tables * n_states * n_actions, "policy: table has wrong size");
  for (size_t i = 0; i < tables * n_states; ++i) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      const double v = probs[i * n_actions + a];
      check(v >= 0.0 && std::isfinite(v), "policy: negative or non-finite probability");
      sum += v;
    }
    check(std::abs(sum - 1.0) <= kRowSumTolerance, "policy: action row does not sum to one");
  }
}

MemorylessPolicy uniform_memoryless(int n_states, int n_actions) {
  MemorylessPolicy pol;
  pol.n_states = n_states;
  pol.n_actions = n_actions;
  pol.probs.assign(size_t(n_states) * n_actions, 1.0 / n_actions);
  return pol;
}

MemorylessPolicy random_memoryless(int n_states, int n_actions, Rng& rng) {
  MemorylessPolicy pol;
  pol.n_states = n_states;
  pol.n_actions = n_actions;
  pol.probs.resize(size_t(n_states) * n_actions);
  std::vector<double> alpha(n_actions, 1.0);
  for (int s = 0; s < n_states; ++s) {
    rng.dirichlet(alpha, std::span<double>(pol.probs.data() + size_t(s) * n_actions, n_actions));
  }
  return pol;
}

MemorylessPolicy deterministic_memoryless(const std::vector<std::vector<int>>& actions,
                                          int n_actions) {
  MemorylessPolicy pol;
  pol.n_steps = int(actions.size());
  pol.n_states = int(actions.front().size());
  pol.n_actions = n_actions;
  pol.probs.assign(size_t(pol.n_steps) * pol.n_states * n_actions, 0.0);
  for (int t = 0; t < pol.n_steps; ++t) {
    for (int s = 0; s < pol.n_states; ++s) {
      pol.prob_at(t, s, actions[t][s]) = 1.0;
    }
  }
  return pol;
}

BackwardInductionResult backward_induction(const FiniteMDP& mdp) {
  mdp.validate();
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  BackwardInductionResult res;
  res.values.assign(T + 1, std::vector<double>(S, 0.0));
  res.actions.assign(T, std::vector<int>(S, 0));
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.r(s, a);
        if (mdp.discount > 0.0) {
          double cont = 0.0;
          for (int s2 = 0; s2 < S; ++s2) cont += mdp.p(s, a, s2) * res.values[t + 1][s2];
          q += mdp.discount * cont;
        }
        if (q > best) {  // strict: ties stay with the lowest action index
          best = q;
          best_a = a;
        }
      }
      res.values[t][s] = best;
      res.actions[t][s] = best_a;
    }
  }
  res.utility = 0.0;
  for (int s = 0; s < S; ++s) res.utility += mdp.initial[s] * res.values[0][s];
  return res;
}

double evaluate_policy(const FiniteMDP& mdp, const MemorylessPolicy& policy) {
  mdp.validate();
  policy.validate();
  check(policy.n_states == mdp.n_states && policy.n_actions == mdp.n_actions,
        "evaluate_policy: policy shape does not match the MDP");
  check(policy.stationary() || policy.n_steps >= mdp.horizon,
        "evaluate_policy: step-indexed policy shorter than the horizon");
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  std::vector<double> value(S, 0.0), next(S, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        const double pa = policy.prob(t, s, a);
        if (pa == 0.0) continue;
        double q = mdp.r(s, a);
        double cont = 0.0;
        for (int s2 = 0; s2 < S; ++s2) cont += mdp.p(s, a, s2) * value[s2];
        v += pa * (q + mdp.discount * cont);
      }
      next[s] = v;
    }
    value.swap(next);
  }
  double utility = 0.0;
  for (int s = 0; s < S; ++s) utility += mdp.initial[s] * value[s];
  return utility;
}

FiniteMDP gen_random_mdp(int n_states, int n_actions, uint64_t seed, int horizon,
                         double discount) {
  if (n_states < 2) throw std::invalid_argument("gen_random_mdp: needs at least two states");
  FiniteMDP mdp = make_mdp(n_states, n_actions, horizon, discount);
  Rng rng(seed);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double e = rng.exponential();
        mdp.p(s, a, s2) = e;
        sum += e;
      }
      for (int s2 = 0; s2 < n_states; ++s2) mdp.p(s, a, s2) /= sum;
    }
  }
  mdp.r(n_states - 1, 0) = 1.0;
  mdp.set_initial_state(0);
  return mdp;
}

FiniteMDP chain_mdp(int n_states, double slip, int horizon, double discount,
                    const ChainParams& params) {
  if (n_states < 2) throw std::invalid_argument("chain_mdp: needs at least two states");
  if (!(slip >= 0.0 && slip <= 1.0)) throw std::invalid_argument("chain_mdp: slip not in [0, 1]");
  FiniteMDP mdp = make_mdp(n_states, 2, horizon, discount);
  for (int s = 0; s < n_states; ++s) {
    const int ahead = std::min(s + 1, n_states - 1);
    // action 0 advances, action 1 returns; slip swaps the effects
    mdp.p(s, 0, ahead) += 1.0 - slip;
    mdp.p(s, 0, 0) += slip;
    mdp.p(s, 1, 0) += 1.0 - slip;
    mdp.p(s, 1, ahead) += slip;
  }
  mdp.r(n_states - 1, 0) = params.final_reward;
  mdp.r(0, 1) = params.return_reward;
  mdp.set_initial_state(0);
  return mdp;
}

}  // namespace mbrl
