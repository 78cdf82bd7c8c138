#include "mbrl/policy_param.hpp"

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

constexpr size_t kHessianWeightGuard = 2000;

void softmax_into(std::span<const double> w, std::span<double> out) {
  double hi = w[0];
  for (double v : w) hi = std::max(hi, v);
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    out[i] = std::exp(w[i] - hi);
    sum += out[i];
  }
  for (size_t i = 0; i < w.size(); ++i) out[i] /= sum;
}

uint64_t window_key(std::span<const std::pair<int, int>> context, int state, int S, int A) {
  uint64_t key = context.size();
  for (const auto& [s, a] : context) key = key * uint64_t(S) * A + uint64_t(s) * A + a;
  return key * S + state;
}

void check_mdp_match(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy) {
  require(mdp.n_states == policy.n_states && mdp.n_actions == policy.n_actions,
          "softmax policy: MDP shape mismatch");
  require(mdp.horizon <= policy.horizon, "softmax policy: horizon exceeds the partition");
}

}  // namespace

int SoftmaxPartitionPolicy::start_cell(int s1) const {
  if (kind == PartitionKind::history) return s1;
  const auto it = window_ids.find(window_key({}, s1, n_states, n_actions));
  if (it == window_ids.end()) throw std::invalid_argument("softmax policy: unmapped history");
  return it->second;
}

int SoftmaxPartitionPolicy::next_cell(int cell, int t, int a, int s2) const {
  if (kind == PartitionKind::history) {
    require(t >= 1 && t < horizon, "softmax policy: history advanced past the horizon");
    const size_t local = size_t(cell) - level_base[t];
    return int(level_base[t + 1] + local * (size_t(n_actions) * n_states) +
               size_t(a) * n_states + s2);
  }
  return window_next[(size_t(cell) * n_actions + a) * n_states + s2];
}

int SoftmaxPartitionPolicy::state_of(int cell, int t) const {
  if (kind == PartitionKind::history) {
    const size_t local = size_t(cell) - level_base[t];
    return int(local % n_states);
  }
  return window_state[cell];
}

void SoftmaxPartitionPolicy::validate() const {
  require(n_states >= 1 && n_actions >= 1 && horizon >= 1, "softmax policy: bad shape");
  require(weights.size() == size_t(n_cells) * n_actions, "softmax policy: weight table size");
  for (double w : weights) require(std::isfinite(w), "softmax policy: non-finite weight");
}

SoftmaxPartitionPolicy make_history_policy(int n_states, int n_actions, int horizon) {
  require(horizon >= 1 && horizon <= kTreeHorizonGuard,
          "history partition: horizon exceeds the tree guard");
  SoftmaxPartitionPolicy pol;
  pol.kind = PartitionKind::history;
  pol.n_states = n_states;
  pol.n_actions = n_actions;
  pol.horizon = horizon;
  pol.level_base.assign(horizon + 2, 0);
  size_t level_size = n_states;
  for (int t = 1; t <= horizon; ++t) {
    pol.level_base[t + 1] = pol.level_base[t] + level_size;
    level_size *= size_t(n_actions) * n_states;
  }
  pol.n_cells = int(pol.level_base[horizon + 1]);
  pol.weights.assign(size_t(pol.n_cells) * n_actions, 0.0);
  return pol;
}

SoftmaxPartitionPolicy make_window_policy(int n_states, int n_actions, int horizon, int window) {
  require(window >= 1, "window partition: window must be >= 1");
  SoftmaxPartitionPolicy pol;
  pol.kind = PartitionKind::suffix_window;
  pol.n_states = n_states;
  pol.n_actions = n_actions;
  pol.horizon = horizon;
  pol.window = window;
  const int SA = n_states * n_actions;

  std::vector<std::vector<std::pair<int, int>>> contexts;
  std::vector<std::pair<int, int>> ctx;
  std::function<void(int)> enumerate = [&](int remaining) {
    contexts.push_back(ctx);
    if (remaining == 0) return;
    for (int k = 0; k < SA; ++k) {
      ctx.emplace_back(k / n_actions, k % n_actions);
      enumerate(remaining - 1);
      ctx.pop_back();
    }
  };
  enumerate(window);

  for (const auto& c : contexts) {
    for (int s = 0; s < n_states; ++s) {
      const uint64_t key = window_key(c, s, n_states, n_actions);
      pol.window_ids.emplace(key, pol.n_cells++);
      pol.window_state.push_back(s);
    }
  }
  pol.weights.assign(size_t(pol.n_cells) * n_actions, 0.0);

  // transition table over (context, state) cells
  pol.window_next.assign(size_t(pol.n_cells) * n_actions * n_states, -1);
  for (const auto& c : contexts) {
    for (int s = 0; s < n_states; ++s) {
      const int cell = pol.window_ids.at(window_key(c, s, n_states, n_actions));
      for (int a = 0; a < n_actions; ++a) {
        std::vector<std::pair<int, int>> shifted = c;
        shifted.emplace_back(s, a);
        if (int(shifted.size()) > window) shifted.erase(shifted.begin());
        for (int s2 = 0; s2 < n_states; ++s2) {
          pol.window_next[(size_t(cell) * n_actions + a) * n_states + s2] =
              pol.window_ids.at(window_key(shifted, s2, n_states, n_actions));
        }
      }
    }
  }
  return pol;
}

std::vector<double> action_probs(const SoftmaxPartitionPolicy& policy, int cell) {
  require(cell >= 0 && cell < policy.n_cells, "action_probs: unmapped history cell");
  std::vector<double> probs(policy.n_actions);
  softmax_into(policy.row(cell), probs);
  return probs;
}

std::vector<double> log_policy_gradient(const SoftmaxPartitionPolicy& policy, int cell,
                                        int action) {
  std::vector<double> probs = action_probs(policy, cell);
  for (int b = 0; b < policy.n_actions; ++b) probs[b] = (b == action ? 1.0 : 0.0) - probs[b];
  return probs;
}

namespace {

// Shared exact engine. The history kind walks the history tree; the window
// kind runs occupancy/value dynamic programming over (context, state) cells.
struct ExactEngine {
  const FiniteMDP& mdp;
  const SoftmaxPartitionPolicy& policy;
  const int S, A, T;
  std::vector<double> probs;  // scratch softmax row

  ExactEngine(const FiniteMDP& m, const SoftmaxPartitionPolicy& p)
      : mdp(m), policy(p), S(m.n_states), A(m.n_actions), T(m.horizon), probs(m.n_actions) {}

  double value(std::vector<double>* grad) {
    if (policy.kind == PartitionKind::history) return history_value(grad);
    return window_value(grad);
  }

  // returns E[sum_{u>=t} gamma^{u-t} r_u | history at `cell`], accumulating
  // gradient contributions prob * gamma^{t-1} * pi(a) * q_a * dlnpi.
  double history_node(int cell, int s, int t, double prob, double scale,
                      std::vector<double>* grad) {
    softmax_into(policy.row(cell), probs);
    std::vector<double> pi(probs);
    double v = 0.0;
    for (int a = 0; a < A; ++a) {
      double q = mdp.r(s, a);
      if (t < T) {
        for (int s2 = 0; s2 < S; ++s2) {
          const double ps = mdp.p(s, a, s2);
          if (ps == 0.0) continue;
          const int child = policy.next_cell(cell, t, a, s2);
          q += mdp.discount *
               ps * history_node(child, s2, t + 1, prob * pi[a] * ps, scale * mdp.discount, grad);
        }
      }
      v += pi[a] * q;
      if (grad && prob > 0.0) {
        const double w = prob * scale * pi[a] * q;
        double* row = grad->data() + size_t(cell) * A;
        for (int b = 0; b < A; ++b) row[b] += w * ((b == a ? 1.0 : 0.0) - pi[b]);
      }
    }
    return v;
  }

  double history_value(std::vector<double>* grad) {
    double total = 0.0;
    for (int s = 0; s < S; ++s) {
      if (mdp.initial[s] == 0.0) continue;
      total += mdp.initial[s] * history_node(policy.start_cell(s), s, 1, mdp.initial[s], 1.0, grad);
    }
    return total;
  }

  double window_value(std::vector<double>* grad) {
    const int C = policy.n_cells;
    // backward values V_t(cell) for t = T..1
    std::vector<std::vector<double>> values(T + 1, std::vector<double>(C, 0.0));
    std::vector<std::vector<double>> pi_rows(C, std::vector<double>(A));
    for (int c = 0; c < C; ++c) softmax_into(policy.row(c), pi_rows[c]);
    for (int t = T; t >= 1; --t) {
      for (int c = 0; c < C; ++c) {
        const int s = policy.window_state[c];
        double v = 0.0;
        for (int a = 0; a < A; ++a) {
          double q = mdp.r(s, a);
          if (t < T) {
            for (int s2 = 0; s2 < S; ++s2) {
              const double ps = mdp.p(s, a, s2);
              if (ps == 0.0) continue;
              q += mdp.discount * ps * values[t + 1][policy.next_cell(c, t, a, s2)];
            }
          }
          v += pi_rows[c][a] * q;
        }
        values[t][c] = v;
      }
    }
    double total = 0.0;
    for (int s = 0; s < S; ++s) {
      if (mdp.initial[s] > 0.0) total += mdp.initial[s] * values[1][policy.start_cell(s)];
    }
    if (!grad) return total;

    // forward occupancy, then accumulate the policy-gradient form
    std::vector<double> occ(C, 0.0), occ_next(C, 0.0);
    for (int s = 0; s < S; ++s) {
      if (mdp.initial[s] > 0.0) occ[policy.start_cell(s)] += mdp.initial[s];
    }
    double scale = 1.0;
    for (int t = 1; t <= T; ++t) {
      std::fill(occ_next.begin(), occ_next.end(), 0.0);
      for (int c = 0; c < C; ++c) {
        if (occ[c] == 0.0) continue;
        const int s = policy.window_state[c];
        const auto& pi = pi_rows[c];
        for (int a = 0; a < A; ++a) {
          double q = mdp.r(s, a);
          if (t < T) {
            for (int s2 = 0; s2 < S; ++s2) {
              const double ps = mdp.p(s, a, s2);
              if (ps == 0.0) continue;
              const int next = policy.next_cell(c, t, a, s2);
              q += mdp.discount * ps * values[t + 1][next];
              occ_next[next] += occ[c] * pi[a] * ps;
            }
          }
          const double w = occ[c] * scale * pi[a] * q;
          double* row = grad->data() + size_t(c) * A;
          for (int b = 0; b < A; ++b) row[b] += w * ((b == a ? 1.0 : 0.0) - pi[b]);
        }
      }
      occ.swap(occ_next);
      scale *= mdp.discount;
    }
    return total;
  }
};

}  // namespace

double evaluate_policy(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy) {
  mdp.validate();
  policy.validate();
  check_mdp_match(mdp, policy);
  if (policy.kind == PartitionKind::history) {
    require(mdp.horizon <= kTreeHorizonGuard, "softmax policy: horizon exceeds the tree guard");
  }
  ExactEngine engine(mdp, policy);
  return engine.value(nullptr);
}

std::vector<double> utility_gradient(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy) {
  mdp.validate();
  policy.validate();
  check_mdp_match(mdp, policy);
  if (policy.kind == PartitionKind::history) {
    require(mdp.horizon <= kTreeHorizonGuard, "softmax policy: horizon exceeds the tree guard");
  }
  std::vector<double> grad(policy.weights.size(), 0.0);
  ExactEngine engine(mdp, policy);
  engine.value(&grad);
  return grad;
}

double rollout_utility(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy, Rng& rng) {
  int s = rng.categorical(mdp.initial);
  int cell = policy.start_cell(s);
  double utility = 0.0, scale = 1.0;
  std::vector<double> probs(policy.n_actions);
  for (int t = 1; t <= mdp.horizon; ++t) {
    softmax_into(policy.row(cell), probs);
    const int a = rng.categorical(probs);
    utility += scale * mdp.r(s, a);
    scale *= mdp.discount;
    const int s2 = rng.categorical(mdp.row(s, a));
    if (t < mdp.horizon) cell = policy.next_cell(cell, t, a, s2);
    s = s2;
  }
  return utility;
}

McGradient utility_gradient_mc(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy,
                               int n_rollouts, Rng& rng) {
  mdp.validate();
  policy.validate();
  check_mdp_match(mdp, policy);
  require(n_rollouts >= 2, "utility_gradient_mc: needs at least two rollouts");
  const int A = policy.n_actions;

  struct Visit {
    int cell, action;
  };
  std::vector<double> returns(n_rollouts);
  std::vector<std::vector<Visit>> paths(n_rollouts);
  std::vector<double> probs(A);
  for (int k = 0; k < n_rollouts; ++k) {
    int s = rng.categorical(mdp.initial);
    int cell = policy.start_cell(s);
    double utility = 0.0, scale = 1.0;
    for (int t = 1; t <= mdp.horizon; ++t) {
      softmax_into(policy.row(cell), probs);
      const int a = rng.categorical(probs);
      paths[k].push_back({cell, a});
      utility += scale * mdp.r(s, a);
      scale *= mdp.discount;
      const int s2 = rng.categorical(mdp.row(s, a));
      if (t < mdp.horizon) cell = policy.next_cell(cell, t, a, s2);
      s = s2;
    }
    returns[k] = utility;
  }
  double total_return = 0.0;
  for (double u : returns) total_return += u;

  McGradient out;
  out.n = n_rollouts;
  out.g.assign(policy.weights.size(), 0.0);
  std::vector<double> sample(policy.weights.size());
  double norm2_sum = 0.0;
  for (int k = 0; k < n_rollouts; ++k) {
    const double baseline = (total_return - returns[k]) / (n_rollouts - 1);  // leave-one-out
    const double advantage = returns[k] - baseline;
    std::fill(sample.begin(), sample.end(), 0.0);
    for (const Visit& v : paths[k]) {
      softmax_into(policy.row(v.cell), probs);
      double* row = sample.data() + size_t(v.cell) * A;
      for (int b = 0; b < A; ++b) row[b] += advantage * ((b == v.action ? 1.0 : 0.0) - probs[b]);
    }
    double norm2 = 0.0;
    for (size_t j = 0; j < sample.size(); ++j) {
      out.g[j] += sample[j];
      norm2 += sample[j] * sample[j];
    }
    norm2_sum += norm2;
  }
  for (double& v : out.g) v /= n_rollouts;
  double mean_norm2 = 0.0;
  for (double v : out.g) mean_norm2 += v * v;
  const double var = std::max(norm2_sum / n_rollouts - mean_norm2, 0.0);
  out.se = std::sqrt(var / n_rollouts);
  return out;
}

std::vector<double> utility_hessian(const FiniteMDP& mdp, const SoftmaxPartitionPolicy& policy) {
  mdp.validate();
  policy.validate();
  check_mdp_match(mdp, policy);
  require(policy.weights.size() <= kHessianWeightGuard,
          "utility_hessian: weight table exceeds the exact-Hessian guard");
  require(mdp.horizon <= kTreeHorizonGuard, "utility_hessian: horizon exceeds the tree guard");
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  const size_t dim = policy.weights.size();
  std::vector<double> hessian(dim * dim, 0.0);

  struct Visit {
    int cell, action;
  };
  std::vector<Visit> path;
  std::vector<std::vector<double>> pi_stack(T + 1, std::vector<double>(A));

  // accumulate Pr(tau) U(tau) [ g g^T + sum_t local ] over full trajectories
  std::function<void(int, int, int, double, double, double)> walk =
      [&](int cell, int s, int t, double prob, double past_reward, double scale) {
        softmax_into(policy.row(cell), pi_stack[t]);
        const std::vector<double> pi = pi_stack[t];
        for (int a = 0; a < A; ++a) {
          if (pi[a] == 0.0) continue;
          path.push_back({cell, a});
          const double reward = past_reward + scale * mdp.r(s, a);
          const double p_here = prob * pi[a];
          if (t < T) {
            for (int s2 = 0; s2 < S; ++s2) {
              const double ps = mdp.p(s, a, s2);
              if (ps == 0.0) continue;
              walk(policy.next_cell(cell, t, a, s2), s2, t + 1, p_here * ps, reward,
                   scale * mdp.discount);
            }
          } else {
            const double w = p_here * reward;
            if (w != 0.0) {
              // score rows per visited position
              std::vector<std::vector<double>> rows(path.size(), std::vector<double>(A));
              std::vector<std::vector<double>> pis(path.size(), std::vector<double>(A));
              for (size_t u = 0; u < path.size(); ++u) {
                softmax_into(policy.row(path[u].cell), pis[u]);
                for (int b = 0; b < A; ++b) {
                  rows[u][b] = (b == path[u].action ? 1.0 : 0.0) - pis[u][b];
                }
              }
              for (size_t u = 0; u < path.size(); ++u) {
                const size_t cu = size_t(path[u].cell) * A;
                for (size_t v = 0; v < path.size(); ++v) {
                  const size_t cv = size_t(path[v].cell) * A;
                  for (int b = 0; b < A; ++b) {
                    for (int b2 = 0; b2 < A; ++b2) {
                      hessian[(cu + b) * dim + cv + b2] += w * rows[u][b] * rows[v][b2];
                    }
                  }
                }
                // d^2 ln pi term: pi_b pi_b' - delta pi_b
                for (int b = 0; b < A; ++b) {
                  for (int b2 = 0; b2 < A; ++b2) {
                    const double local = pis[u][b] * pis[u][b2] - (b == b2 ? pis[u][b] : 0.0);
                    hessian[(cu + b) * dim + cu + b2] += w * local;
                  }
                }
              }
            }
          }
          path.pop_back();
        }
      };

  for (int s = 0; s < S; ++s) {
    if (mdp.initial[s] == 0.0) continue;
    walk(policy.start_cell(s), s, 1, mdp.initial[s], 0.0, 1.0);
  }
  return hessian;
}

}  // namespace mbrl
