#include "mbrl/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace mbrl {

namespace {

Json tensor3(const std::vector<double>& flat, int d0, int d1, int d2) {
  Json out = Json::array();
  for (int i = 0; i < d0; ++i) {
    Json mid = Json::array();
    for (int j = 0; j < d1; ++j) {
      Json row = Json::array();
      for (int k = 0; k < d2; ++k) row.push_back(flat[(size_t(i) * d1 + j) * d2 + k]);
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

Json table2(const std::vector<double>& flat, int d0, int d1) {
  Json out = Json::array();
  for (int i = 0; i < d0; ++i) {
    Json row = Json::array();
    for (int j = 0; j < d1; ++j) row.push_back(flat[size_t(i) * d1 + j]);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> flatten3(const Json& j, int* d0, int* d1, int* d2) {
  *d0 = int(j.size());
  *d1 = int(j.at(0).size());
  *d2 = int(j.at(0).at(0).size());
  std::vector<double> flat;
  flat.reserve(size_t(*d0) * *d1 * *d2);
  for (const auto& mid : j) {
    for (const auto& row : mid) {
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  }
  return flat;
}

std::vector<double> flatten2(const Json& j) {
  std::vector<double> flat;
  for (const auto& row : j) {
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

}  // namespace

Json mdp_to_json(const FiniteMDP& mdp) {
  Json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["transition"] = tensor3(mdp.transition, mdp.n_states, mdp.n_actions, mdp.n_states);
  j["reward"] = table2(mdp.reward, mdp.n_states, mdp.n_actions);
  j["horizon"] = mdp.horizon;
  j["discount"] = mdp.discount;
  const int start = mdp.initial_state();
  if (start >= 0) {
    j["initial_state"] = start;
  } else {
    j["initial_state"] = mdp.initial;
  }
  return j;
}

FiniteMDP mdp_from_json(const Json& j) {
  FiniteMDP mdp;
  mdp.n_states = j.at("n_states").get<int>();
  mdp.n_actions = j.at("n_actions").get<int>();
  mdp.horizon = j.at("horizon").get<int>();
  mdp.discount = j.at("discount").get<double>();
  int d0, d1, d2;
  mdp.transition = flatten3(j.at("transition"), &d0, &d1, &d2);
  mdp.reward = flatten2(j.at("reward"));
  if (j.at("initial_state").is_number_integer()) {
    mdp.initial.assign(mdp.n_states, 0.0);
    mdp.initial[j.at("initial_state").get<int>()] = 1.0;
  } else {
    mdp.initial = j.at("initial_state").get<std::vector<double>>();
  }
  mdp.validate();
  return mdp;
}

Json prior_to_json(const DirichletProductPrior& prior) {
  Json j;
  j["n_states"] = prior.n_states;
  j["n_actions"] = prior.n_actions;
  j["horizon"] = prior.horizon;
  j["discount"] = prior.discount;
  j["alpha"] = tensor3(prior.alpha, prior.n_states, prior.n_actions, prior.n_states);
  j["fixed_reward"] = table2(prior.fixed_reward, prior.n_states, prior.n_actions);
  j["initial"] = prior.initial;
  if (prior.reward_prior) {
    j["reward_prior"] = Json{{"a", prior.reward_prior->a}, {"b", prior.reward_prior->b}};
  }
  return j;
}

DirichletProductPrior prior_from_json(const Json& j) {
  DirichletProductPrior prior;
  prior.n_states = j.at("n_states").get<int>();
  prior.n_actions = j.at("n_actions").get<int>();
  prior.horizon = j.at("horizon").get<int>();
  prior.discount = j.at("discount").get<double>();
  int d0, d1, d2;
  prior.alpha = flatten3(j.at("alpha"), &d0, &d1, &d2);
  prior.fixed_reward = flatten2(j.at("fixed_reward"));
  prior.initial = j.at("initial").get<std::vector<double>>();
  if (j.contains("reward_prior")) {
    prior.reward_prior = BetaRewardPrior{j.at("reward_prior").at("a").get<std::vector<double>>(),
                                         j.at("reward_prior").at("b").get<std::vector<double>>()};
  }
  prior.validate();
  return prior;
}

Json policy_to_json(const SoftmaxPartitionPolicy& policy) {
  Json spec;
  spec["kind"] = policy.kind == PartitionKind::history ? "history" : "suffix_window";
  spec["n_states"] = policy.n_states;
  spec["n_actions"] = policy.n_actions;
  spec["horizon"] = policy.horizon;
  spec["window"] = policy.window;
  Json j;
  j["partition_spec"] = spec;
  j["weights"] = policy.weights;
  return j;
}

SoftmaxPartitionPolicy policy_from_json(const Json& j) {
  const Json& spec = j.at("partition_spec");
  const std::string kind = spec.at("kind").get<std::string>();
  SoftmaxPartitionPolicy policy;
  if (kind == "history") {
    policy = make_history_policy(spec.at("n_states").get<int>(), spec.at("n_actions").get<int>(),
                                 spec.at("horizon").get<int>());
  } else if (kind == "suffix_window") {
    policy = make_window_policy(spec.at("n_states").get<int>(), spec.at("n_actions").get<int>(),
                                spec.at("horizon").get<int>(), spec.at("window").get<int>());
  } else {
    throw std::invalid_argument("policy: unknown partition kind " + kind);
  }
  const std::vector<double> weights = j.at("weights").get<std::vector<double>>();
  if (weights.size() != policy.weights.size()) {
    throw std::invalid_argument("policy: weight table size does not match the partition");
  }
  policy.weights = weights;
  policy.validate();
  return policy;
}

Json tree_policy_to_json(const HistoryPolicyTree& policy) {
  Json nodes = Json::array();
  for (const auto& node : policy.nodes) {
    nodes.push_back(Json{{"probs", node.probs}, {"child", node.child}});
  }
  return Json{{"n_states", policy.n_states},
              {"n_actions", policy.n_actions},
              {"horizon", policy.horizon},
              {"roots", policy.roots},
              {"nodes", std::move(nodes)}};
}

HistoryPolicyTree tree_policy_from_json(const Json& j) {
  HistoryPolicyTree policy;
  policy.n_states = j.at("n_states").get<int>();
  policy.n_actions = j.at("n_actions").get<int>();
  policy.horizon = j.at("horizon").get<int>();
  policy.roots = j.at("roots").get<std::vector<int>>();
  for (const auto& node : j.at("nodes")) {
    HistoryPolicyTree::Node n;
    n.probs = node.at("probs").get<std::vector<double>>();
    n.child = node.at("child").get<std::vector<int>>();
    policy.nodes.push_back(std::move(n));
  }
  policy.validate();
  return policy;
}

Json regret_report_to_json(const RegretReport& report) {
  return Json{{"regret", report.regret},
              {"bayes_optimal_regret", report.bayes_optimal_regret},
              {"bayesian_regret", report.bayesian_regret},
              {"argmax_mdp", report.argmax_mdp}};
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)hash);
  return std::string(buf);
}

}  // namespace mbrl
