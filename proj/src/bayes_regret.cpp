#include "mbrl/bayes_regret.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_shared_shape(std::span<const FiniteMDP> mdps) {
  require(!mdps.empty(), "task: empty MDP set");
  const FiniteMDP& first = mdps.front();
  for (const FiniteMDP& m : mdps) {
    m.validate();
    require(m.n_states == first.n_states && m.n_actions == first.n_actions &&
                m.horizon == first.horizon && m.discount == first.discount,
            "task: MDPs must share states, actions, horizon and discount");
  }
}

}  // namespace

BayesOptimalResult bayes_optimal_tree(std::span<const FiniteMDP> mdps,
                                      const BeliefVector& belief) {
  check_shared_shape(mdps);
  validate_belief(belief);
  require(belief.size() == mdps.size(), "bayes_optimal_tree: belief length mismatch");
  const FiniteMDP& first = mdps.front();
  const int S = first.n_states, A = first.n_actions, T = first.horizon;
  const int n = int(mdps.size());
  require(T <= kTreeHorizonGuard, "bayes_optimal_tree: horizon exceeds the tree guard");

  BayesOptimalResult res;
  res.policy.n_states = S;
  res.policy.n_actions = A;
  res.policy.horizon = T;
  res.policy.roots.assign(S, -1);

  // w_i = belief_i * Pr_i(history); solve() returns the node id and
  // sum_i w_i E_i[future | history]. Nodes are created for histories
  // reachable under any MDP in the set, so the returned policy can be
  // evaluated at every Dirac belief.
  struct Solver {
    std::span<const FiniteMDP> mdps;
    HistoryPolicyTree& tree;
    int S, A, T, n;
    double discount;

    std::pair<int, double> solve(int s, int t, const std::vector<double>& w) {
      const int id = tree.add_node();
      double best = 0.0;
      int best_a = 0;
      bool have_best = false;
      std::vector<double> w2(n);
      for (int a = 0; a < A; ++a) {
        double q = 0.0;
        for (int i = 0; i < n; ++i) q += w[i] * mdps[i].r(s, a);
        if (t < T) {
          for (int s2 = 0; s2 < S; ++s2) {
            bool reachable = false;
            for (int i = 0; i < n; ++i) {
              w2[i] = w[i] * mdps[i].p(s, a, s2);
              if (mdps[i].p(s, a, s2) > 0.0) reachable = true;
            }
            if (!reachable) continue;
            const auto [cid, cval] = solve(s2, t + 1, w2);
            tree.nodes[id].child[size_t(a) * S + s2] = cid;
            q += discount * cval;
          }
        }
        if (!have_best || q > best) {
          best = q;
          best_a = a;
          have_best = true;
        }
      }
      tree.nodes[id].probs[best_a] = 1.0;
      return {id, best};
    }
  } solver{mdps, res.policy, S, A, T, n, first.discount};

  res.value = 0.0;
  std::vector<double> w(n);
  for (int s = 0; s < S; ++s) {
    bool start = false;
    for (int i = 0; i < n; ++i) {
      w[i] = belief[i] * mdps[i].initial[s];
      if (mdps[i].initial[s] > 0.0) start = true;
    }
    if (!start) continue;
    const auto [id, value] = solver.solve(s, 1, w);
    res.policy.roots[s] = id;
    res.value += value;
  }
  return res;
}

double bayes_optimal_value(std::span<const FiniteMDP> mdps, const BeliefVector& belief) {
  return bayes_optimal_tree(mdps, belief).value;
}

double regret(const FiniteMDP& mdp, const MemorylessPolicy& policy) {
  return backward_induction(mdp).utility - evaluate_policy(mdp, policy);
}

double regret(const FiniteMDP& mdp, const HistoryPolicyTree& policy) {
  return backward_induction(mdp).utility - evaluate_policy(mdp, policy);
}

std::vector<double> optimal_utilities(std::span<const FiniteMDP> mdps) {
  std::vector<double> out;
  out.reserve(mdps.size());
  for (const FiniteMDP& m : mdps) out.push_back(backward_induction(m).utility);
  return out;
}

TaskEvaluation evaluate_on_task(std::span<const FiniteMDP> mdps, const HistoryPolicyTree& policy) {
  TaskEvaluation eval;
  eval.optimal = optimal_utilities(mdps);
  eval.utility.reserve(mdps.size());
  for (const FiniteMDP& m : mdps) eval.utility.push_back(evaluate_policy(m, policy));
  return eval;
}

TaskEvaluation evaluate_on_task(std::span<const FiniteMDP> mdps, const MemorylessPolicy& policy) {
  TaskEvaluation eval;
  eval.optimal = optimal_utilities(mdps);
  eval.utility.reserve(mdps.size());
  for (const FiniteMDP& m : mdps) eval.utility.push_back(evaluate_policy(m, policy));
  return eval;
}

double bayes_optimal_regret(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                            const HistoryPolicyTree& policy) {
  const double ustar = bayes_optimal_value(mdps, belief);
  double u = 0.0;
  for (size_t i = 0; i < mdps.size(); ++i) {
    if (belief[i] > 0.0) u += belief[i] * evaluate_policy(mdps[i], policy);
  }
  return ustar - u;
}

double bayesian_regret(const TaskEvaluation& eval, const BeliefVector& belief) {
  require(eval.optimal.size() == belief.size(), "bayesian_regret: belief length mismatch");
  double total = 0.0;
  for (size_t i = 0; i < belief.size(); ++i) {
    total += belief[i] * (eval.optimal[i] - eval.utility[i]);
  }
  return total;
}

double bayesian_regret(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                       const HistoryPolicyTree& policy) {
  return bayesian_regret(evaluate_on_task(mdps, policy), belief);
}

void RegretReport::validate() const {
  require(regret >= -1e-10 && bayes_optimal_regret >= -1e-10 && bayesian_regret >= -1e-10,
          "regret report: negative regret");
  require(bayes_optimal_regret <= bayesian_regret + 1e-10,
          "regret report: Bayes-optimal regret exceeds Bayesian regret");
}

RegretReport make_regret_report(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                                const HistoryPolicyTree& policy) {
  const TaskEvaluation eval = evaluate_on_task(mdps, policy);
  RegretReport report;
  report.bayesian_regret = bayesian_regret(eval, belief);
  report.bayes_optimal_regret = bayes_optimal_value(mdps, belief);
  double u_belief = 0.0;
  for (size_t i = 0; i < mdps.size(); ++i) u_belief += belief[i] * eval.utility[i];
  report.bayes_optimal_regret -= u_belief;
  report.regret = -1.0;
  for (size_t i = 0; i < mdps.size(); ++i) {
    const double r = eval.optimal[i] - eval.utility[i];
    if (r > report.regret) {
      report.regret = r;
      report.argmax_mdp = int(i);
    }
  }
  report.validate();
  return report;
}

McEstimate psrl_evaluate(std::span<const FiniteMDP> mdps, const BeliefVector& belief,
                         int episode_length, int n_episodes, int n_mc, Rng& rng,
                         bool update_posterior) {
  check_shared_shape(mdps);
  validate_belief(belief);
  require(belief.size() == mdps.size(), "psrl: belief length mismatch");
  require(episode_length >= 1 && n_episodes >= 1 && n_mc >= 1, "psrl: counts must be positive");
  const int T = mdps.front().horizon;
  const int effective_horizon = episode_length * n_episodes;
  require(effective_horizon <= T, "psrl: episodes exceed the horizon budget");
  const double discount = mdps.front().discount;
  const int n = int(mdps.size());

  // per-MDP optimal policies and values at the played horizon
  std::vector<BackwardInductionResult> plans;
  plans.reserve(mdps.size());
  std::vector<FiniteMDP> played(mdps.begin(), mdps.end());
  for (FiniteMDP& m : played) m.horizon = effective_horizon;
  for (const FiniteMDP& m : played) plans.push_back(backward_induction(m));

  double sum = 0.0, sum2 = 0.0;
  std::vector<double> posterior(n);
  for (int k = 0; k < n_mc; ++k) {
    const int truth = rng.categorical(belief);
    const FiniteMDP& env = played[truth];
    posterior.assign(belief.begin(), belief.end());
    int s = rng.categorical(env.initial);
    double utility = 0.0, scale = 1.0;
    int t = 0;
    for (int e = 0; e < n_episodes; ++e) {
      const int sampled = rng.categorical(posterior);
      for (int step = 0; step < episode_length; ++step, ++t) {
        const int a = plans[sampled].actions[t][s];
        utility += scale * env.r(s, a);
        scale *= discount;
        const int s2 = rng.categorical(env.row(s, a));
        if (update_posterior) {
          double mass = 0.0;
          for (int i = 0; i < n; ++i) {
            posterior[i] *= played[i].p(s, a, s2);
            mass += posterior[i];
          }
          if (mass <= 0.0) {
            posterior.assign(n, 1.0 / n);  // every model excluded; reset
          } else {
            for (double& v : posterior) v /= mass;
          }
        }
        s = s2;
      }
    }
    const double sample = plans[truth].utility - utility;
    sum += sample;
    sum2 += sample * sample;
  }
  McEstimate est;
  est.n = n_mc;
  est.mean = sum / n_mc;
  est.se = std::sqrt(std::max(sum2 / n_mc - est.mean * est.mean, 0.0) / n_mc);
  return est;
}

namespace {

struct FrontierEntry {
  std::vector<double> u;
  int action = 0;
  std::vector<int> choice;  // entry index per expanded successor
};

// Keep only Pareto-maximal vectors (ties deduplicated). Order is preserved
// for the survivors so reconstruction stays deterministic.
void pareto_prune(std::vector<FrontierEntry>& entries) {
  std::vector<FrontierEntry> kept;
  kept.reserve(entries.size());
  for (FrontierEntry& cand : entries) {
    bool dominated = false;
    for (const FrontierEntry& k : kept) {
      bool all_ge = true, any_gt = false;
      for (size_t i = 0; i < cand.u.size(); ++i) {
        if (k.u[i] < cand.u[i] - 1e-15) all_ge = false;
        if (k.u[i] > cand.u[i] + 1e-15) any_gt = true;
      }
      if (all_ge && !any_gt) {  // duplicate within tolerance
        dominated = true;
        break;
      }
      if (all_ge && any_gt) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    // drop previously kept entries the candidate dominates
    std::vector<FrontierEntry> next;
    next.reserve(kept.size() + 1);
    for (FrontierEntry& k : kept) {
      bool all_le = true;
      for (size_t i = 0; i < cand.u.size(); ++i) {
        if (k.u[i] > cand.u[i] + 1e-15) {
          all_le = false;
          break;
        }
      }
      if (!all_le) next.push_back(std::move(k));
    }
    next.push_back(std::move(cand));
    kept.swap(next);
  }
  entries.swap(kept);
}

}  // namespace

UtilityFrontier utility_frontier(std::span<const FiniteMDP> mdps, size_t cap) {
  check_shared_shape(mdps);
  const FiniteMDP& first = mdps.front();
  const int S = first.n_states, A = first.n_actions, T = first.horizon;
  const int n = int(mdps.size());
  require(T <= kTreeHorizonGuard, "utility_frontier: horizon exceeds the tree guard");

  // skeleton mirrors bayes_optimal_tree: histories reachable under any MDP
  HistoryPolicyTree skeleton;
  skeleton.n_states = S;
  skeleton.n_actions = A;
  skeleton.horizon = T;
  skeleton.roots.assign(S, -1);
  std::vector<int> state_of;
  std::vector<std::vector<FrontierEntry>> sets;

  std::function<int(int, int)> build = [&](int s, int t) -> int {
    const int id = skeleton.add_node();
    state_of.push_back(s);
    sets.emplace_back();
    if (t < T) {
      for (int a = 0; a < A; ++a) {
        for (int s2 = 0; s2 < S; ++s2) {
          bool reachable = false;
          for (const FiniteMDP& m : mdps) {
            if (m.p(s, a, s2) > 0.0) {
              reachable = true;
              break;
            }
          }
          if (reachable) {
            const int cid = build(s2, t + 1);
            skeleton.nodes[id].child[size_t(a) * S + s2] = cid;
          }
        }
      }
    }
    return id;
  };
  struct Root {
    int state;
    int id;
  };
  std::vector<Root> root_list;
  for (int s = 0; s < S; ++s) {
    bool start = false;
    for (const FiniteMDP& m : mdps) {
      if (m.initial[s] > 0.0) start = true;
    }
    if (start) {
      skeleton.roots[s] = build(s, 1);
      root_list.push_back({s, skeleton.roots[s]});
    }
  }

  const double discount = first.discount;

  // bottom-up sets of achievable per-MDP utility vectors
  std::function<void(int, int)> fill = [&](int id, int t) {
    const int s = state_of[id];
    std::vector<FrontierEntry> node_set;
    for (int a = 0; a < A; ++a) {
      std::vector<FrontierEntry> acc(1);
      acc[0].u.assign(n, 0.0);
      acc[0].action = a;
      for (int i = 0; i < n; ++i) acc[0].u[i] = mdps[i].r(s, a);
      if (t < T) {
        for (int s2 = 0; s2 < S; ++s2) {
          const int cid = skeleton.nodes[id].child[size_t(a) * S + s2];
          if (cid < 0) continue;
          if (sets[cid].empty()) fill(cid, t + 1);
          const auto& child = sets[cid];
          std::vector<FrontierEntry> merged;
          merged.reserve(acc.size() * child.size());
          for (const FrontierEntry& base : acc) {
            for (size_t c = 0; c < child.size(); ++c) {
              FrontierEntry e = base;
              for (int i = 0; i < n; ++i) {
                e.u[i] += discount * mdps[i].p(s, a, s2) * child[c].u[i];
              }
              e.choice.push_back(int(c));
              merged.push_back(std::move(e));
            }
          }
          if (merged.size() > cap) {
            throw std::runtime_error("utility_frontier: entry cap exceeded");
          }
          pareto_prune(merged);
          acc.swap(merged);
        }
      }
      for (FrontierEntry& e : acc) node_set.push_back(std::move(e));
    }
    pareto_prune(node_set);
    sets[id].swap(node_set);
  };
  for (const Root& r : root_list) fill(r.id, 1);

  // combine root states (independent choices weighted by start probabilities)
  std::vector<FrontierEntry> task(1);
  task[0].u.assign(n, 0.0);
  for (const Root& r : root_list) {
    const auto& child = sets[r.id];
    std::vector<FrontierEntry> merged;
    merged.reserve(task.size() * child.size());
    for (const FrontierEntry& base : task) {
      for (size_t c = 0; c < child.size(); ++c) {
        FrontierEntry e = base;
        for (int i = 0; i < n; ++i) e.u[i] += mdps[i].initial[r.state] * child[c].u[i];
        e.choice.push_back(int(c));
        merged.push_back(std::move(e));
      }
    }
    if (merged.size() > cap) throw std::runtime_error("utility_frontier: entry cap exceeded");
    pareto_prune(merged);
    task.swap(merged);
  }

  // reconstruct one witness policy per surviving vector
  UtilityFrontier frontier;
  std::function<void(HistoryPolicyTree&, int, int, int)> assign = [&](HistoryPolicyTree& tree,
                                                                      int id, int entry, int t) {
    const FrontierEntry& e = sets[id][entry];
    tree.nodes[id].probs.assign(A, 0.0);
    tree.nodes[id].probs[e.action] = 1.0;
    if (t < T) {
      size_t slot = 0;
      for (int s2 = 0; s2 < S; ++s2) {
        const int cid = skeleton.nodes[id].child[size_t(e.action) * S + s2];
        if (cid < 0) continue;
        assign(tree, cid, e.choice[slot++], t + 1);
      }
    }
  };
  for (const FrontierEntry& e : task) {
    HistoryPolicyTree tree = skeleton;
    for (size_t r = 0; r < root_list.size(); ++r) {
      assign(tree, root_list[r].id, e.choice[r], 1);
    }
    // nodes under non-chosen actions keep uniform-invalid zero rows; give
    // them a concrete default so the tree validates
    for (auto& node : tree.nodes) {
      double sum = 0.0;
      for (double v : node.probs) sum += v;
      if (sum == 0.0) node.probs[0] = 1.0;
    }
    frontier.utilities.push_back(e.u);
    frontier.policies.push_back(std::move(tree));
  }
  return frontier;
}

}  // namespace mbrl
