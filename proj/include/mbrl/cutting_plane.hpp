#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mbrl/bayes_regret.hpp"
#include "mbrl/matrix_game.hpp"

namespace mbrl {

/// Probability simplex intersected with accumulated halfspaces c^T beta >= b.
/// Stays on the simplex's affine hull; a strictly feasible interior point is
/// carried along as the nonemptiness certificate.
struct CutPolytope {
  int dim = 0;
  std::vector<std::vector<double>> cut_normals;
  std::vector<double> cut_offsets;
  std::vector<double> interior;

  static CutPolytope simplex(int n);

  /// Margin by which `point` satisfies all cuts and facets (negative when
  /// infeasible); index of the tightest constraint via `tightest`.
  double feasibility_margin(std::span<const double> point, int* tightest = nullptr) const;
  void add_cut(std::vector<double> normal, double offset);
};

struct HitAndRunConfig {
  int n_samples = 2000;
  int burn_in = 500;
  int thinning = 5;
};

struct HitAndRunResult {
  std::vector<std::vector<double>> samples;
  std::vector<double> centroid;
};

/// Uniform samples from the polytope by hit-and-run in the simplex's
/// tangent space; the centroid estimate is the sample mean.
HitAndRunResult hit_and_run(const CutPolytope& polytope, const HitAndRunConfig& config, Rng& rng);

/// Plane coefficients C with C_i = regret of the Bayes-optimal policy at
/// `belief` on the Dirac belief of mu_i; C^T beta reproduces the Bayesian
/// regret of that policy at any beta.
std::vector<double> regret_plane(std::span<const FiniteMDP> mdps, const BeliefVector& belief);

using BayesOptimalOracle =
    std::function<BayesOptimalResult(std::span<const FiniteMDP>, const BeliefVector&)>;

struct CutPlaneConfig {
  HitAndRunConfig sampling;
  double termination_norm = 1e-4;  // stop when ||C||_inf falls below
  double cut_inset = 1e-12;        // strict cuts stored as >= with this slack
  uint64_t seed = 0;
  BayesOptimalOracle oracle;       // defaults to the exact tree solver
};

struct CutPlaneResult {
  BeliefVector beta_star;
  std::vector<HistoryPolicyTree> best_responses;       // deduplicated
  std::vector<std::vector<double>> cuts;               // normals, one per applied cut
  std::vector<BeliefVector> centroids;                 // query point per iteration
  std::vector<double> volume_fractions;                // sample survival per cut
  std::vector<double> cut_norms;                       // ||C||_inf per iteration
  bool emptied = false;                                // a cut removed the whole sample set
  int iterations_run = 0;
};

/// Approximate-centroid cutting planes over the belief simplex: query the
/// centroid, cut away the descent side of the regret plane, repeat.
CutPlaneResult cutting_plane_run(std::span<const FiniteMDP> mdps, int iterations,
                                 const CutPlaneConfig& config = {});

struct MinimaxMixture {
  std::vector<double> policy_weights;  // over the supplied best responses
  std::vector<double> belief_weights;  // nature's mixture over MDPs
  double value = 0.0;
};

/// Zero-sum matrix game over the collected best responses (rows) versus
/// Dirac beliefs (columns), solved by linear programming.
MinimaxMixture minimax_mixture(std::span<const FiniteMDP> mdps,
                               std::span<const HistoryPolicyTree> best_responses);

}  // namespace mbrl
