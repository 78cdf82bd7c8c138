#include "mbrl/history_policy.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_tree_horizon(int horizon) {
  require(horizon <= kTreeHorizonGuard,
          "history tree: horizon " + std::to_string(horizon) + " exceeds the exact-evaluation guard (" +
              std::to_string(kTreeHorizonGuard) + ")");
}

// Union of histories reachable with positive probability in any MDP.
struct Skeleton {
  int n_states, n_actions, horizon;
  std::vector<HistoryPolicyTree::Node> nodes;  // probs unused
  std::vector<int> roots;
  std::vector<int> state_of;  // current state per node
};

Skeleton build_skeleton(std::span<const FiniteMDP> mdps) {
  require(!mdps.empty(), "history tree: empty MDP set");
  const FiniteMDP& first = mdps.front();
  const int S = first.n_states, A = first.n_actions, T = first.horizon;
  for (const FiniteMDP& m : mdps) {
    require(m.n_states == S && m.n_actions == A && m.horizon == T,
            "history tree: MDPs must share states, actions and horizon");
  }
  check_tree_horizon(T);
  Skeleton sk{S, A, T, {}, std::vector<int>(S, -1), {}};
  std::function<int(int, int)> expand = [&](int s, int depth) -> int {
    sk.nodes.push_back(HistoryPolicyTree::Node{{}, std::vector<int>(size_t(A) * S, -1)});
    sk.state_of.push_back(s);
    const int id = int(sk.nodes.size()) - 1;
    if (depth == T) return id;
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
          const int cid = expand(s2, depth + 1);
          sk.nodes[id].child[size_t(a) * S + s2] = cid;
        }
      }
    }
    return id;
  };
  for (int s = 0; s < S; ++s) {
    bool start = false;
    for (const FiniteMDP& m : mdps) {
      if (m.initial[s] > 0.0) start = true;
    }
    if (start) sk.roots[s] = expand(s, 1);
  }
  return sk;
}

}  // namespace

void HistoryPolicyTree::validate() const {
  require(n_states >= 1 && n_actions >= 1 && horizon >= 1, "history tree: bad shape");
  check_tree_horizon(horizon);
  for (const Node& node : nodes) {
    require(node.probs.size() == size_t(n_actions), "history tree: bad action row");
    double sum = 0.0;
    for (double v : node.probs) {
      require(v >= 0.0 && std::isfinite(v), "history tree: negative or non-finite probability");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= kRowSumTolerance, "history tree: action row does not sum to one");
    for (int c : node.child) require(c >= -1 && c < int(nodes.size()), "history tree: bad child id");
  }
}

double evaluate_policy(const FiniteMDP& mdp, const HistoryPolicyTree& policy) {
  mdp.validate();
  require(policy.n_states == mdp.n_states && policy.n_actions == mdp.n_actions,
          "evaluate_policy: tree shape does not match the MDP");
  require(policy.horizon >= mdp.horizon, "evaluate_policy: tree shallower than the horizon");
  check_tree_horizon(mdp.horizon);
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;

  // expected discounted future reward conditional on the history at `node`
  std::function<double(int, int, int)> future = [&](int node, int s, int t) -> double {
    if (node < 0) throw std::runtime_error("evaluate_policy: missing history node at step " +
                                           std::to_string(t));
    double v = 0.0;
    const HistoryPolicyTree::Node& nd = policy.nodes[node];
    for (int a = 0; a < A; ++a) {
      const double pa = nd.probs[a];
      if (pa == 0.0) continue;
      double q = mdp.r(s, a);
      if (t < T) {
        double cont = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          const double ps = mdp.p(s, a, s2);
          if (ps == 0.0) continue;
          cont += ps * future(nd.child[size_t(a) * S + s2], s2, t + 1);
        }
        q += mdp.discount * cont;
      }
      v += pa * q;
    }
    return v;
  };

  double utility = 0.0;
  for (int s = 0; s < S; ++s) {
    if (mdp.initial[s] == 0.0) continue;
    utility += mdp.initial[s] * future(policy.roots[s], s, 1);
  }
  return utility;
}

namespace {

// Full (every branch) skeleton shared by the generators below.
HistoryPolicyTree full_tree(int n_states, int n_actions, int horizon) {
  check_tree_horizon(horizon);
  HistoryPolicyTree tree;
  tree.n_states = n_states;
  tree.n_actions = n_actions;
  tree.horizon = horizon;
  tree.roots.assign(n_states, -1);
  std::function<int(int)> expand = [&](int depth) -> int {
    const int id = tree.add_node();
    if (depth < horizon) {
      for (int a = 0; a < n_actions; ++a) {
        for (int s2 = 0; s2 < n_states; ++s2) {
          tree.nodes[id].child[size_t(a) * n_states + s2] = expand(depth + 1);
        }
      }
    }
    return id;
  };
  for (int s = 0; s < n_states; ++s) tree.roots[s] = expand(1);
  return tree;
}

// Depth and current state of every node, derived by walking from the roots.
void annotate_states(const HistoryPolicyTree& tree, std::vector<int>& state_of) {
  state_of.assign(tree.nodes.size(), -1);
  std::function<void(int, int)> walk = [&](int node, int s) {
    state_of[node] = s;
    const HistoryPolicyTree::Node& nd = tree.nodes[node];
    for (int a = 0; a < tree.n_actions; ++a) {
      for (int s2 = 0; s2 < tree.n_states; ++s2) {
        const int c = nd.child[size_t(a) * tree.n_states + s2];
        if (c >= 0) walk(c, s2);
      }
    }
  };
  for (int s = 0; s < tree.n_states; ++s) {
    if (tree.roots[s] >= 0) walk(tree.roots[s], s);
  }
}

}  // namespace

HistoryPolicyTree tree_from_memoryless(const MemorylessPolicy& policy, int horizon) {
  policy.validate();
  require(policy.stationary(), "tree_from_memoryless: expects a stationary policy");
  HistoryPolicyTree tree = full_tree(policy.n_states, policy.n_actions, horizon);
  std::vector<int> state_of;
  annotate_states(tree, state_of);
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    for (int a = 0; a < policy.n_actions; ++a) {
      tree.nodes[i].probs[a] = policy.prob(0, state_of[i], a);
    }
  }
  return tree;
}

HistoryPolicyTree random_tree_policy(int n_states, int n_actions, int horizon, Rng& rng,
                                     bool deterministic) {
  HistoryPolicyTree tree = full_tree(n_states, n_actions, horizon);
  std::vector<double> alpha(n_actions, 1.0);
  for (HistoryPolicyTree::Node& node : tree.nodes) {
    if (deterministic) {
      node.probs[rng.uniform_int(n_actions)] = 1.0;
    } else {
      rng.dirichlet(alpha, node.probs);
    }
  }
  return tree;
}

HistoryPolicyTree mix_tree_policies(std::span<const HistoryPolicyTree> policies,
                                    std::span<const double> weights) {
  require(!policies.empty() && policies.size() == weights.size(),
          "mix_tree_policies: needs one weight per policy");
  const HistoryPolicyTree& first = policies.front();
  for (const HistoryPolicyTree& p : policies) {
    require(p.n_states == first.n_states && p.n_actions == first.n_actions &&
                p.horizon == first.horizon,
            "mix_tree_policies: shape mismatch");
  }
  const int S = first.n_states, A = first.n_actions;

  HistoryPolicyTree mixed;
  mixed.n_states = S;
  mixed.n_actions = A;
  mixed.horizon = first.horizon;
  mixed.roots.assign(S, -1);

  // w[j] = weight_j * prod_t pi_j(a_t | h_t); transition factors are common
  // to all policies and cancel in the mixture.
  std::function<int(const std::vector<int>&, const std::vector<double>&, int)> expand =
      [&](const std::vector<int>& ids, const std::vector<double>& w, int depth) -> int {
    const int id = mixed.add_node();
    double total = 0.0;
    for (double v : w) total += v;
    std::vector<double> action_prob(A, 0.0);
    for (size_t j = 0; j < policies.size(); ++j) {
      if (w[j] == 0.0 || ids[j] < 0) continue;
      for (int a = 0; a < A; ++a) {
        action_prob[a] += w[j] * policies[j].nodes[ids[j]].probs[a];
      }
    }
    for (int a = 0; a < A; ++a) mixed.nodes[id].probs[a] = action_prob[a] / total;
    if (depth < mixed.horizon) {
      for (int a = 0; a < A; ++a) {
        if (action_prob[a] == 0.0) continue;  // history has zero probability
        std::vector<double> w2(policies.size(), 0.0);
        for (size_t j = 0; j < policies.size(); ++j) {
          if (w[j] == 0.0 || ids[j] < 0) continue;
          w2[j] = w[j] * policies[j].nodes[ids[j]].probs[a];
        }
        for (int s2 = 0; s2 < S; ++s2) {
          std::vector<int> ids2(policies.size(), -1);
          for (size_t j = 0; j < policies.size(); ++j) {
            if (ids[j] >= 0) ids2[j] = policies[j].nodes[ids[j]].child[size_t(a) * S + s2];
          }
          mixed.nodes[id].child[size_t(a) * S + s2] = expand(ids2, w2, depth + 1);
        }
      }
    }
    return id;
  };

  for (int s = 0; s < S; ++s) {
    std::vector<int> ids(policies.size());
    std::vector<double> w(weights.begin(), weights.end());
    bool present = false;
    for (size_t j = 0; j < policies.size(); ++j) {
      ids[j] = policies[j].roots[s];
      if (ids[j] >= 0) present = true;
    }
    if (present) mixed.roots[s] = expand(ids, w, 1);
  }
  return mixed;
}

size_t count_reachable_histories(std::span<const FiniteMDP> mdps) {
  return build_skeleton(mdps).nodes.size();
}

std::vector<HistoryPolicyTree> enumerate_tree_policies(std::span<const FiniteMDP> mdps,
                                                       size_t cap) {
  Skeleton sk = build_skeleton(mdps);
  const size_t n_nodes = sk.nodes.size();
  double count = std::pow(double(sk.n_actions), double(n_nodes));
  if (count > double(cap)) {
    throw std::invalid_argument("enumerate_tree_policies: " + std::to_string(n_nodes) +
                                " decision nodes exceed the enumeration cap");
  }
  const size_t total = size_t(std::llround(count));
  std::vector<HistoryPolicyTree> out;
  out.reserve(total);
  std::vector<int> assignment(n_nodes, 0);
  for (size_t k = 0; k < total; ++k) {
    HistoryPolicyTree tree;
    tree.n_states = sk.n_states;
    tree.n_actions = sk.n_actions;
    tree.horizon = sk.horizon;
    tree.roots = sk.roots;
    tree.nodes.resize(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) {
      tree.nodes[i].probs.assign(sk.n_actions, 0.0);
      tree.nodes[i].probs[assignment[i]] = 1.0;
      tree.nodes[i].child = sk.nodes[i].child;
    }
    out.push_back(std::move(tree));
    for (size_t i = 0; i < n_nodes; ++i) {  // mixed-radix increment
      if (++assignment[i] < sk.n_actions) break;
      assignment[i] = 0;
    }
  }
  return out;
}

}  // namespace mbrl
