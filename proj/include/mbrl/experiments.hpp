#pragma once

#include <string>
#include <vector>

#include "mbrl/bandits.hpp"
#include "mbrl/bayes_regret.hpp"
#include "mbrl/cutting_plane.hpp"
#include "mbrl/gda.hpp"
#include "mbrl/json_io.hpp"

namespace mbrl {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Fixed instance behind the two-MDP studies; chosen so the maximin belief
// is interior with two distinct best responses (the regret lines cross).
inline constexpr uint64_t kTwoMdpBenchmarkSeed = 2;

std::vector<FiniteMDP> two_mdp_benchmark(int n_states = 3, int n_actions = 2, int horizon = 5,
                                         uint64_t seed = kTwoMdpBenchmarkSeed);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

/// Stamps a run with everything needed to reproduce it byte for byte.
void write_manifest(const std::string& out_dir, const std::string& experiment,
                    const Json& config, uint64_t seed, const std::vector<std::string>& outputs);

// ---------------------------------------------------------------------------
// Bayesian-regret curves for a two-MDP task

struct TwoMdpCurveConfig {
  int n_states = 3;
  int n_actions = 2;
  int horizon = 5;
  uint64_t seed = kTwoMdpBenchmarkSeed;
  int grid = 100;                // beta resolution of the sweep
  int psrl_episode_length = 1;   // each step is one episode by default
  int psrl_mc = 4000;
  bool psrl_update = false;
  int threads = 1;

  Json to_json() const;
  static TwoMdpCurveConfig from_json(const Json& j);
};

struct TwoMdpCurveData {
  std::vector<FiniteMDP> mdps;
  CsvTable table;  // beta2, bayes_opt, br_low, br_high, minimax_mix, psrl, psrl_se
  double maximin_beta2 = 0.0;  // grid argmax of the Bayes-optimal regret curve
  double game_value = 0.0;     // LP value over the pure-policy frontier
};

TwoMdpCurveData compute_two_mdp_curve(const TwoMdpCurveConfig& config);

// ---------------------------------------------------------------------------
// Bayesian-regret landscape over the 2-simplex for three MDPs

struct ThreeMdpGridConfig {
  int n_states = 3;
  int n_actions = 2;
  int horizon = 5;
  uint64_t seed = 7;
  int resolution = 50;  // grid spacing 1/resolution
  int threads = 1;

  Json to_json() const;
  static ThreeMdpGridConfig from_json(const Json& j);
};

struct ThreeMdpGridData {
  std::vector<FiniteMDP> mdps;
  // beta1..beta3, bayes_regret, g1..g3 (per-MDP regrets), gt1..gt3 (tangent)
  CsvTable table;
};

ThreeMdpGridData compute_three_mdp_grid(const ThreeMdpGridConfig& config);

// ---------------------------------------------------------------------------
// Worst-case regret of minimax versus uniform best response on 16-MDP tasks

struct Compare16Config {
  int n_mdps = 16;
  int n_states = 4;
  int n_actions = 2;
  int horizon = 4;
  double discount = 0.9;
  int n_seeds = 5;
  uint64_t seed = 1;
  int cut_iterations = 40;
  int threads = 1;

  Json to_json() const;
  static Compare16Config from_json(const Json& j);
};

struct Compare16Row {
  int seed = 0;
  double minimax_worst_case = 0.0;  // max over Dirac beliefs for the mixture
  double uniform_worst_case = 0.0;  // same for the uniform best response
  double game_value = 0.0;
  int n_best_responses = 0;
};

std::vector<Compare16Row> compute_compare16(const Compare16Config& config);

// ---------------------------------------------------------------------------
// GDA robustness study over Dirichlet priors (reduced-scale boxplot data)

struct GdaDirichletStudyConfig {
  int n_states = 3;
  int n_actions = 2;
  int horizon = 8;
  int window = 2;  // suffix partition length
  GdaConfig gda;   // belief_kind forced to dirichlet
  int best_response_iterations = 1500;
  int eval_samples = 10000;
  double det_concentration = 0.05;  // "near-deterministic MDPs" prior
  double chain_slip = 0.2;
  uint64_t seed = 5;
  int threads = 1;

  Json to_json() const;
  static GdaDirichletStudyConfig from_json(const Json& j);
};

struct RobustnessCell {
  std::string policy;  // br_uniform | gda_minimax | br_maximin
  std::string prior;   // uniform | mix_1 | mix_2 | maximin | deterministic | chain
  double mean = 0.0;
  double median = 0.0;
  double p999 = 0.0;
  double se = 0.0;
};

struct GdaDirichletStudyData {
  std::vector<RobustnessCell> cells;
  DirichletProductPrior maximin_prior;
  CsvTable table;  // policy_id, prior_id, mean, median, p999, se
};

GdaDirichletStudyData compute_gda_dirichlet(const GdaDirichletStudyConfig& config);

// ---------------------------------------------------------------------------

CsvTable gda_trace_table(const GdaTrace& trace);
Json cutplane_run_to_json(std::span<const FiniteMDP> mdps, const CutPlaneResult& result);

}  // namespace mbrl
