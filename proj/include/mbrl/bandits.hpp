#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mbrl/rng.hpp"

namespace mbrl {

/// Independent Beta(a_k, b_k) priors over the success rates of K arms.
struct BetaProductPrior {
  std::vector<double> a;
  std::vector<double> b;

  int arms() const { return int(a.size()); }
  void validate() const;
};

/// Gittins indices on the Beta-count lattice (a0 + i, b0 + j), i + j <=
/// extent, for the discounted Bernoulli one-armed bandit. Computed by
/// calibration against a retirement reward lambda, truncated n_max steps
/// past each state.
struct GittinsTable {
  double gamma = 0.9;
  double a0 = 1.0, b0 = 1.0;
  int extent = 0;
  int n_max = 0;
  double truncation_error = 0.0;  // gamma^n_max / (1 - gamma)

  std::vector<double> index;  // level k = i + j at offset k(k+1)/2, entry i

  double at_counts(int i, int j) const { return index[size_t(i + j) * (i + j + 1) / 2 + i]; }
  /// Lookup by Beta parameters; (a, b) must sit on the lattice.
  double at(double a, double b) const;
};

/// Index table reaching `extent` plays deep (default: a + b <= n_max on the
/// integer lattice). The indifference point is found on a lambda grid and
/// refined by linear interpolation.
GittinsTable gittins_table(double gamma, int n_max, double a0 = 1.0, double b0 = 1.0,
                           int extent = -1, double lambda_step = 0.01);

enum class BanditPolicy {
  gittins,  // play the arm with the largest index
  greedy,   // play the arm with the largest posterior mean
};

struct BanditEstimate {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

struct BanditMcConfig {
  int horizon = 200;   // truncated play length
  int n_mc = 10000;    // replications
  int n_max = 200;     // index truncation depth
  BanditPolicy policy = BanditPolicy::gittins;
};

/// Bayesian regret of posterior-updating index play, by Monte Carlo over
/// arm parameters and reward realisations: regret = (max_k theta_k) *
/// (1 - gamma^H) / (1 - gamma) minus the realised discounted reward.
BanditEstimate gittins_regret(const BetaProductPrior& prior, double gamma,
                              const BanditMcConfig& config, uint64_t seed);

struct SurfaceCell {
  double a2 = 0.0, b2 = 0.0;
  double regret = 0.0;
  double se = 0.0;
};

/// One regret estimate per (a2, b2) grid cell with the first arm's prior
/// fixed; cells use derived seeds so any cell reproduces independently.
std::vector<SurfaceCell> regret_surface(double a1, double b1, std::span<const double> a2_grid,
                                        std::span<const double> b2_grid, double gamma,
                                        const BanditMcConfig& config, uint64_t seed,
                                        int threads = 1);

struct WorstCaseSearchConfig {
  double grid_lo = 0.3;
  double grid_hi = 1.6;
  double grid_step = 0.1;
  BanditMcConfig mc;
  bool coordinate_ascent = false;  // refine per-arm (a_k, b_k) after the grid
  int ascent_sweeps = 2;
};

struct WorstCasePrior {
  BetaProductPrior prior;
  double regret = 0.0;
  double se = 0.0;
  std::vector<std::pair<double, double>> symmetric_curve;  // (a, regret) per grid point
};

/// Grid search over symmetric Beta(a, a) priors (all arms equal), with
/// common random numbers across candidates; optionally followed by
/// coordinate ascent over the full parameter vector.
WorstCasePrior worst_case_prior(int arms, double gamma, const WorstCaseSearchConfig& config,
                                uint64_t seed, int threads = 1);

}  // namespace mbrl
