#pragma once

#include <string>

#include "json.hpp"
#include "mbrl/bandits.hpp"
#include "mbrl/bayes_regret.hpp"
#include "mbrl/beliefs.hpp"
#include "mbrl/history_policy.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy_param.hpp"

namespace mbrl {

using Json = nlohmann::ordered_json;

// {n_states, n_actions, transition, reward, horizon, discount, initial_state}
Json mdp_to_json(const FiniteMDP& mdp);
FiniteMDP mdp_from_json(const Json& j);

// {alpha, reward_prior?}
Json prior_to_json(const DirichletProductPrior& prior);
DirichletProductPrior prior_from_json(const Json& j);

// {partition_spec, weights}
Json policy_to_json(const SoftmaxPartitionPolicy& policy);
SoftmaxPartitionPolicy policy_from_json(const Json& j);

Json tree_policy_to_json(const HistoryPolicyTree& policy);
HistoryPolicyTree tree_policy_from_json(const Json& j);

Json regret_report_to_json(const RegretReport& report);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

/// FNV-1a over the serialised text; stable across platforms, used to stamp
/// run manifests.
std::string fnv1a_hex(const std::string& text);

}  // namespace mbrl
