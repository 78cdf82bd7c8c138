#include "mbrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mbrl/parallel.hpp"

namespace mbrl {

namespace {

std::string format_value(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<FiniteMDP> two_mdp_benchmark(int n_states, int n_actions, int horizon,
                                         uint64_t seed) {
  std::vector<FiniteMDP> mdps;
  mdps.push_back(gen_random_mdp(n_states, n_actions, derive_seed(seed, 0), horizon));
  mdps.push_back(gen_random_mdp(n_states, n_actions, derive_seed(seed, 1), horizon));
  return mdps;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_value(row[i]);
    }
    out << "\n";
  }
}

void write_manifest(const std::string& out_dir, const std::string& experiment,
                    const Json& config, uint64_t seed, const std::vector<std::string>& outputs) {
  Json manifest;
  manifest["experiment"] = experiment;
  manifest["version"] = kLibraryVersion;
  manifest["seed"] = seed;
  manifest["config"] = config;
  manifest["config_hash"] = fnv1a_hex(config.dump());
  manifest["outputs"] = outputs;
  save_json_file((std::filesystem::path(out_dir) / (experiment + "_manifest.json")).string(),
                 manifest);
}

// ---------------------------------------------------------------------------

Json TwoMdpCurveConfig::to_json() const {
  return Json{{"n_states", n_states}, {"n_actions", n_actions}, {"horizon", horizon},
              {"seed", seed},         {"grid", grid},           {"psrl_episode_length", psrl_episode_length},
              {"psrl_mc", psrl_mc},   {"psrl_update", psrl_update}};
}

TwoMdpCurveConfig TwoMdpCurveConfig::from_json(const Json& j) {
  TwoMdpCurveConfig c;
  c.n_states = j.value("n_states", c.n_states);
  c.n_actions = j.value("n_actions", c.n_actions);
  c.horizon = j.value("horizon", c.horizon);
  c.seed = j.value("seed", c.seed);
  c.grid = j.value("grid", c.grid);
  c.psrl_episode_length = j.value("psrl_episode_length", c.psrl_episode_length);
  c.psrl_mc = j.value("psrl_mc", c.psrl_mc);
  c.psrl_update = j.value("psrl_update", c.psrl_update);
  return c;
}

TwoMdpCurveData compute_two_mdp_curve(const TwoMdpCurveConfig& config) {
  TwoMdpCurveData data;
  data.mdps = two_mdp_benchmark(config.n_states, config.n_actions, config.horizon, config.seed);
  const std::vector<FiniteMDP>& mdps = data.mdps;
  const std::vector<double> ustar = optimal_utilities(mdps);

  // exact matrix game over the pure-policy frontier
  const UtilityFrontier frontier = utility_frontier(mdps);
  std::vector<std::vector<double>> loss(frontier.utilities.size(), std::vector<double>(2));
  for (size_t j = 0; j < frontier.utilities.size(); ++j) {
    for (int i = 0; i < 2; ++i) loss[j][i] = ustar[i] - frontier.utilities[j][i];
  }
  const MatrixGameSolution game = solve_matrix_game(loss);
  data.game_value = game.value;

  // flanking best responses at the LP maximin belief
  const double maximin = std::clamp(game.col_strategy[1], 0.0, 1.0);
  const double delta = 1.0 / (4.0 * config.grid);
  const BeliefVector left{1.0 - std::max(maximin - delta, 0.0), std::max(maximin - delta, 0.0)};
  const BeliefVector right{1.0 - std::min(maximin + delta, 1.0), std::min(maximin + delta, 1.0)};
  const TaskEvaluation low_eval = evaluate_on_task(mdps, bayes_optimal_tree(mdps, left).policy);
  const TaskEvaluation high_eval = evaluate_on_task(mdps, bayes_optimal_tree(mdps, right).policy);

  // minimax mixture regret per MDP (its curve is the mixture of pure lines)
  std::vector<double> mixture_regret(2, 0.0);
  for (size_t j = 0; j < frontier.utilities.size(); ++j) {
    if (game.row_strategy[j] == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      mixture_regret[i] += game.row_strategy[j] * (ustar[i] - frontier.utilities[j][i]);
    }
  }

  data.table.header = {"beta2",       "bayes_opt", "br_low", "br_high",
                       "minimax_mix", "psrl",      "psrl_se"};
  data.table.rows.resize(config.grid + 1);
  const int episodes = std::max(config.horizon / config.psrl_episode_length, 1);
  parallel_for(config.grid + 1, config.threads, [&](size_t g) {
    const double x = double(g) / config.grid;
    const BeliefVector belief{1.0 - x, x};
    const double bayes_opt =
        belief[0] * ustar[0] + belief[1] * ustar[1] - bayes_optimal_value(mdps, belief);
    const double br_low = bayesian_regret(low_eval, belief);
    const double br_high = bayesian_regret(high_eval, belief);
    const double mix = belief[0] * mixture_regret[0] + belief[1] * mixture_regret[1];
    Rng rng(derive_seed(config.seed, 100 + g));
    const McEstimate psrl = psrl_evaluate(mdps, belief, config.psrl_episode_length, episodes,
                                          config.psrl_mc, rng, config.psrl_update);
    data.table.rows[g] = {x, bayes_opt, br_low, br_high, mix, psrl.mean, psrl.se};
  });

  double best = -1.0;
  for (const auto& row : data.table.rows) {
    if (row[1] > best) {
      best = row[1];
      data.maximin_beta2 = row[0];
    }
  }
  return data;
}

// ---------------------------------------------------------------------------

Json ThreeMdpGridConfig::to_json() const {
  return Json{{"n_states", n_states},
              {"n_actions", n_actions},
              {"horizon", horizon},
              {"seed", seed},
              {"resolution", resolution}};
}

ThreeMdpGridConfig ThreeMdpGridConfig::from_json(const Json& j) {
  ThreeMdpGridConfig c;
  c.n_states = j.value("n_states", c.n_states);
  c.n_actions = j.value("n_actions", c.n_actions);
  c.horizon = j.value("horizon", c.horizon);
  c.seed = j.value("seed", c.seed);
  c.resolution = j.value("resolution", c.resolution);
  return c;
}

ThreeMdpGridData compute_three_mdp_grid(const ThreeMdpGridConfig& config) {
  ThreeMdpGridData data;
  for (int i = 0; i < 3; ++i) {
    data.mdps.push_back(
        gen_random_mdp(config.n_states, config.n_actions, derive_seed(config.seed, i),
                       config.horizon));
  }
  const std::vector<double> ustar = optimal_utilities(data.mdps);
  data.table.header = {"beta1", "beta2", "beta3", "bayes_regret", "g1", "g2", "g3",
                       "gt1",   "gt2",   "gt3"};

  std::vector<BeliefVector> points;
  for_each_simplex_grid(3, config.resolution, [&](std::span<const double> b) {
    points.emplace_back(b.begin(), b.end());
  });
  data.table.rows.resize(points.size());
  parallel_for(points.size(), config.threads, [&](size_t idx) {
    const BeliefVector& belief = points[idx];
    const BayesOptimalResult best = bayes_optimal_tree(data.mdps, belief);
    std::vector<double> grad(3);
    double value = 0.0, mean = 0.0;
    for (int i = 0; i < 3; ++i) {
      grad[i] = ustar[i] - evaluate_policy(data.mdps[i], best.policy);
      value += belief[i] * grad[i];
      mean += grad[i] / 3.0;
    }
    data.table.rows[idx] = {belief[0], belief[1],         belief[2],        value,
                            grad[0],   grad[1],           grad[2],          grad[0] - mean,
                            grad[1] - mean, grad[2] - mean};
  });
  return data;
}

// ---------------------------------------------------------------------------

Json Compare16Config::to_json() const {
  return Json{{"n_mdps", n_mdps},   {"n_states", n_states}, {"n_actions", n_actions},
              {"horizon", horizon}, {"discount", discount}, {"n_seeds", n_seeds},
              {"seed", seed},       {"cut_iterations", cut_iterations}};
}

Compare16Config Compare16Config::from_json(const Json& j) {
  Compare16Config c;
  c.n_mdps = j.value("n_mdps", c.n_mdps);
  c.n_states = j.value("n_states", c.n_states);
  c.n_actions = j.value("n_actions", c.n_actions);
  c.horizon = j.value("horizon", c.horizon);
  c.discount = j.value("discount", c.discount);
  c.n_seeds = j.value("n_seeds", c.n_seeds);
  c.seed = j.value("seed", c.seed);
  c.cut_iterations = j.value("cut_iterations", c.cut_iterations);
  return c;
}

std::vector<Compare16Row> compute_compare16(const Compare16Config& config) {
  std::vector<Compare16Row> rows(config.n_seeds);
  parallel_for(config.n_seeds, config.threads, [&](size_t s) {
    const uint64_t task_seed = derive_seed(config.seed, s);
    std::vector<FiniteMDP> mdps;
    for (int i = 0; i < config.n_mdps; ++i) {
      mdps.push_back(gen_random_mdp(config.n_states, config.n_actions,
                                    derive_seed(task_seed, i), config.horizon,
                                    config.discount));
    }
    CutPlaneConfig cut;
    cut.seed = derive_seed(task_seed, 999);
    const CutPlaneResult run = cutting_plane_run(mdps, config.cut_iterations, cut);
    const MinimaxMixture mix = minimax_mixture(mdps, run.best_responses);

    const std::vector<double> ustar = optimal_utilities(mdps);
    double minimax_worst = 0.0;
    for (int i = 0; i < config.n_mdps; ++i) {
      double r = 0.0;
      for (size_t j = 0; j < run.best_responses.size(); ++j) {
        if (mix.policy_weights[j] == 0.0) continue;
        r += mix.policy_weights[j] *
             (ustar[i] - evaluate_policy(mdps[i], run.best_responses[j]));
      }
      minimax_worst = std::max(minimax_worst, r);
    }
    const BayesOptimalResult uniform_br = bayes_optimal_tree(mdps, uniform_belief(config.n_mdps));
    double uniform_worst = 0.0;
    for (int i = 0; i < config.n_mdps; ++i) {
      uniform_worst =
          std::max(uniform_worst, ustar[i] - evaluate_policy(mdps[i], uniform_br.policy));
    }
    rows[s] = Compare16Row{int(s + 1), minimax_worst, uniform_worst, mix.value,
                           int(run.best_responses.size())};
  });
  return rows;
}

// ---------------------------------------------------------------------------

Json GdaDirichletStudyConfig::to_json() const {
  return Json{{"n_states", n_states},
              {"n_actions", n_actions},
              {"horizon", horizon},
              {"window", window},
              {"iterations", gda.iterations},
              {"eta_policy", gda.eta_policy},
              {"eta_belief", gda.eta_belief},
              {"batch", gda.batch},
              {"mc_rollouts", gda.mc_rollouts},
              {"alpha_min", gda.alpha_min},
              {"alpha_max", gda.alpha_max},
              {"best_response_iterations", best_response_iterations},
              {"eval_samples", eval_samples},
              {"det_concentration", det_concentration},
              {"chain_slip", chain_slip},
              {"seed", seed}};
}

GdaDirichletStudyConfig GdaDirichletStudyConfig::from_json(const Json& j) {
  GdaDirichletStudyConfig c;
  c.n_states = j.value("n_states", c.n_states);
  c.n_actions = j.value("n_actions", c.n_actions);
  c.horizon = j.value("horizon", c.horizon);
  c.window = j.value("window", c.window);
  c.gda.iterations = j.value("iterations", c.gda.iterations);
  c.gda.eta_policy = j.value("eta_policy", c.gda.eta_policy);
  c.gda.eta_belief = j.value("eta_belief", c.gda.eta_belief);
  c.gda.batch = j.value("batch", c.gda.batch);
  c.gda.mc_rollouts = j.value("mc_rollouts", c.gda.mc_rollouts);
  c.gda.alpha_min = j.value("alpha_min", c.gda.alpha_min);
  c.gda.alpha_max = j.value("alpha_max", c.gda.alpha_max);
  c.best_response_iterations = j.value("best_response_iterations", c.best_response_iterations);
  c.eval_samples = j.value("eval_samples", c.eval_samples);
  c.det_concentration = j.value("det_concentration", c.det_concentration);
  c.chain_slip = j.value("chain_slip", c.chain_slip);
  c.seed = j.value("seed", c.seed);
  return c;
}

namespace {

// Plain stochastic gradient descent on the Bayesian regret at a fixed prior;
// returns the final iterate (best-response training, not a saddle search).
SoftmaxPartitionPolicy train_best_response(const DirichletProductPrior& prior,
                                           SoftmaxPartitionPolicy policy, int iterations,
                                           double eta, int batch, int mc_rollouts,
                                           uint64_t seed) {
  Rng rng(seed);
  for (int t = 0; t < iterations; ++t) {
    const StochasticGradients g = stochastic_gradients(policy, prior, batch, mc_rollouts, rng);
    for (size_t j = 0; j < policy.weights.size(); ++j) policy.weights[j] -= eta * g.g_policy[j];
  }
  return policy;
}

struct SampleStats {
  double mean, median, p999, se;
};

SampleStats summarise(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  const size_t n = samples.size();
  double sum = 0.0, sum2 = 0.0;
  for (double v : samples) {
    sum += v;
    sum2 += v * v;
  }
  SampleStats stats;
  stats.mean = sum / n;
  stats.se = std::sqrt(std::max(sum2 / n - stats.mean * stats.mean, 0.0) / n);
  stats.median = samples[n / 2];
  stats.p999 = samples[std::min(size_t(std::ceil(0.999 * n)), n - 1)];
  return stats;
}

}  // namespace

GdaDirichletStudyData compute_gda_dirichlet(const GdaDirichletStudyConfig& config) {
  FiniteMDP shape = gen_random_mdp(config.n_states, config.n_actions, 0, config.horizon);
  const DirichletProductPrior uniform_prior = symmetric_dirichlet_prior(shape, 1.0);

  GdaConfig gda_cfg = config.gda;
  gda_cfg.belief_kind = BeliefKind::dirichlet;
  gda_cfg.seed = derive_seed(config.seed, 1);

  const SoftmaxPartitionPolicy init =
      make_window_policy(config.n_states, config.n_actions, config.horizon, config.window);

  // three policies: best response to uniform, GDA saddle policy, best
  // response to the GDA maximin prior
  const SoftmaxPartitionPolicy br_uniform =
      train_best_response(uniform_prior, init, config.best_response_iterations,
                          config.gda.eta_policy, config.gda.batch, config.gda.mc_rollouts,
                          derive_seed(config.seed, 2));
  const GdaDirichletResult saddle = gda_run(gda_cfg, init, uniform_prior);
  const SoftmaxPartitionPolicy br_maximin =
      train_best_response(saddle.prior, init, config.best_response_iterations,
                          config.gda.eta_policy, config.gda.batch, config.gda.mc_rollouts,
                          derive_seed(config.seed, 3));

  GdaDirichletStudyData data;
  data.maximin_prior = saddle.prior;

  // six evaluation priors
  struct EvalPrior {
    std::string name;
    DirichletProductPrior prior;
    bool chain = false;
  };
  std::vector<EvalPrior> priors;
  priors.push_back({"uniform", uniform_prior, false});
  for (int m = 1; m <= 2; ++m) {
    DirichletProductPrior mix = uniform_prior;
    const double lambda = double(m) / 3.0;
    for (size_t j = 0; j < mix.alpha.size(); ++j) {
      mix.alpha[j] = (1.0 - lambda) * uniform_prior.alpha[j] + lambda * saddle.prior.alpha[j];
    }
    priors.push_back({"mix_" + std::to_string(m), std::move(mix), false});
  }
  priors.push_back({"maximin", saddle.prior, false});
  priors.push_back(
      {"deterministic", symmetric_dirichlet_prior(shape, config.det_concentration), false});
  priors.push_back({"chain", uniform_prior, true});  // stands for the Dirac chain prior

  const FiniteMDP chain =
      chain_mdp(config.n_states, config.chain_slip, config.horizon, 1.0);

  const std::vector<std::pair<std::string, const SoftmaxPartitionPolicy*>> policies{
      {"br_uniform", &br_uniform}, {"gda_minimax", &saddle.policy}, {"br_maximin", &br_maximin}};

  data.table.header = {"policy_id", "prior_id", "mean", "median", "p999", "se"};
  for (size_t pi = 0; pi < policies.size(); ++pi) {
    for (size_t qi = 0; qi < priors.size(); ++qi) {
      std::vector<double> samples;
      if (priors[qi].chain) {
        const double r = backward_induction(chain).utility - evaluate_policy(chain, *policies[pi].second);
        samples.assign(1, r);
      } else {
        samples.resize(config.eval_samples);
        parallel_for(config.eval_samples, config.threads, [&](size_t k) {
          Rng rng(derive_seed(config.seed, 1000 + qi * 1000000 + k));
          const FiniteMDP mdp = dirichlet_sample(priors[qi].prior, rng);
          samples[k] =
              backward_induction(mdp).utility - evaluate_policy(mdp, *policies[pi].second);
        });
      }
      SampleStats stats = summarise(samples);
      data.cells.push_back(RobustnessCell{policies[pi].first, priors[qi].name, stats.mean,
                                          stats.median, stats.p999, stats.se});
      data.table.rows.push_back({double(pi), double(qi), stats.mean, stats.median, stats.p999,
                                 stats.se});
    }
  }
  return data;
}

// ---------------------------------------------------------------------------

CsvTable gda_trace_table(const GdaTrace& trace) {
  CsvTable table;
  table.header = {"iter", "bayes_regret_est", "gpi_norm", "gbeta_norm"};
  const size_t belief_dim = trace.belief.empty() ? 0 : trace.belief.front().size();
  for (size_t i = 0; i < belief_dim; ++i) table.header.push_back("beta" + std::to_string(i));
  for (size_t t = 0; t < trace.regret_estimate.size(); ++t) {
    std::vector<double> row{double(t + 1), trace.regret_estimate[t], trace.g_policy_norm[t],
                            trace.g_belief_norm[t]};
    row.insert(row.end(), trace.belief[t].begin(), trace.belief[t].end());
    table.rows.push_back(std::move(row));
  }
  return table;
}

Json cutplane_run_to_json(std::span<const FiniteMDP> mdps, const CutPlaneResult& result) {
  Json j;
  j["beta_star"] = result.beta_star;
  j["iterations_run"] = result.iterations_run;
  j["emptied"] = result.emptied;
  j["cuts"] = result.cuts;
  j["centroids"] = result.centroids;
  j["volume_fractions"] = result.volume_fractions;
  j["cut_norms"] = result.cut_norms;
  Json ids = Json::array();
  for (size_t i = 0; i < result.best_responses.size(); ++i) ids.push_back(int(i));
  j["best_response_ids"] = ids;
  Json trees = Json::array();
  for (const auto& p : result.best_responses) trees.push_back(tree_policy_to_json(p));
  j["best_responses"] = trees;
  Json task = Json::array();
  for (const FiniteMDP& m : mdps) task.push_back(mdp_to_json(m));
  j["mdps"] = task;
  return j;
}

}  // namespace mbrl
