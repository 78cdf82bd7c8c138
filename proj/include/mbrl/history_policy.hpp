#pragma once

#include <span>
#include <vector>

#include "mbrl/mdp.hpp"

namespace mbrl {

/// History-dependent stochastic policy stored as an explicit tree. A node is
/// one history (s_1, a_1, ..., s_t); its children are indexed by the taken
/// action and observed next state.
struct HistoryPolicyTree {
  struct Node {
    std::vector<double> probs;  // action distribution at this history
    std::vector<int> child;     // [a * n_states + s'] -> node id, -1 where absent
  };

  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  std::vector<Node> nodes;
  std::vector<int> roots;  // node id per first state, -1 where absent

  int child_of(int node, int a, int s2) const {
    return nodes[node].child[size_t(a) * n_states + s2];
  }
  int add_node() {
    nodes.push_back(Node{std::vector<double>(n_actions, 0.0),
                         std::vector<int>(size_t(n_actions) * n_states, -1)});
    return int(nodes.size()) - 1;
  }
  void validate() const;
};

/// Exact expected utility by walking every positive-probability history.
/// Throws if the policy is missing a node the MDP can reach.
double evaluate_policy(const FiniteMDP& mdp, const HistoryPolicyTree& policy);

/// Full tree skeleton (every action/next-state branch) with the per-state
/// distribution of `policy` copied into each node.
HistoryPolicyTree tree_from_memoryless(const MemorylessPolicy& policy, int horizon);

/// Full tree with i.i.d. Dirichlet(1) node distributions, or one-hot rows
/// when `deterministic` is set.
HistoryPolicyTree random_tree_policy(int n_states, int n_actions, int horizon, Rng& rng,
                                     bool deterministic = false);

/// Behavioural policy equivalent to first drawing one of `policies` with the
/// given weights and then following it. Node distributions are mixed with
/// weights proportional to each policy's probability of producing the
/// actions along the history.
HistoryPolicyTree mix_tree_policies(std::span<const HistoryPolicyTree> policies,
                                    std::span<const double> weights);

/// Every deterministic tree policy over the histories reachable in at least
/// one of `mdps`. Throws if there would be more than `cap`.
std::vector<HistoryPolicyTree> enumerate_tree_policies(std::span<const FiniteMDP> mdps,
                                                       size_t cap = size_t(1) << 20);

/// Number of decision nodes reachable in at least one of `mdps` (the
/// exponent of the pure-policy count).
size_t count_reachable_histories(std::span<const FiniteMDP> mdps);

}  // namespace mbrl
