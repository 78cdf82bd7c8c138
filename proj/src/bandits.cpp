#include "mbrl/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mbrl/parallel.hpp"

namespace mbrl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

size_t level_offset(int k) { return size_t(k) * (k + 1) / 2; }

}  // namespace

void BetaProductPrior::validate() const {
  require(!a.empty() && a.size() == b.size(), "bandit prior: needs matching (a, b) per arm");
  for (size_t k = 0; k < a.size(); ++k) {
    require(a[k] > 0.0 && b[k] > 0.0, "bandit prior: parameters must be positive");
  }
}

double GittinsTable::at(double a, double b) const {
  const int i = int(std::llround(a - a0));
  const int j = int(std::llround(b - b0));
  require(i >= 0 && j >= 0 && i + j <= extent && std::abs(a0 + i - a) < 1e-9 &&
              std::abs(b0 + j - b) < 1e-9,
          "gittins table: (a, b) is not on the lattice");
  return at_counts(i, j);
}

GittinsTable gittins_table(double gamma, int n_max, double a0, double b0, int extent,
                           double lambda_step) {
  require(gamma > 0.0 && gamma < 1.0, "gittins_table: gamma must lie in (0, 1)");
  require(n_max >= 2, "gittins_table: n_max must be >= 2");
  require(a0 > 0.0 && b0 > 0.0, "gittins_table: lattice offsets must be positive");
  require(lambda_step > 0.0 && lambda_step <= 0.5, "gittins_table: bad lambda step");
  if (extent < 0) extent = std::max(n_max - int(std::ceil(a0 + b0)), 0);

  GittinsTable table;
  table.gamma = gamma;
  table.a0 = a0;
  table.b0 = b0;
  table.extent = extent;
  table.n_max = n_max;
  table.truncation_error = std::pow(gamma, n_max) / (1.0 - gamma);
  table.index.assign(level_offset(extent + 1), 1.0);

  // Value sweeps share one lattice: a state at level k keeps at least n_max
  // steps of lookahead when the lattice runs to depth extent + n_max.
  const int depth = extent + n_max;
  std::vector<double> v_next(depth + 2, 0.0), v_here(depth + 2, 0.0);
  // retirement pays lambda per remaining step, discounted
  std::vector<double> annuity(depth + 1, 0.0);  // (1 - gamma^(depth - k)) / (1 - gamma)
  for (int k = depth; k >= 0; --k) {
    annuity[k] = (1.0 - std::pow(gamma, depth - k)) / (1.0 - gamma);
  }

  const size_t tracked = level_offset(extent + 1);
  std::vector<double> prev_lambda(tracked, 0.0);
  std::vector<double> prev_diff(tracked, 0.0);
  std::vector<bool> done(tracked, false);
  bool first_sweep = true;

  for (double lambda = 0.0; lambda <= 1.0 + 1e-12; lambda += lambda_step) {
    std::fill(v_next.begin(), v_next.end(), 0.0);
    for (int k = depth - 1; k >= 0; --k) {
      for (int i = 0; i <= k; ++i) {
        const double p = (a0 + i) / (a0 + b0 + k);
        const double cont =
            p * (1.0 + gamma * v_next[i + 1]) + (1.0 - p) * gamma * v_next[i];
        const double retire = lambda * annuity[k];
        v_here[i] = std::max(cont, retire);
        if (k <= extent) {
          const size_t id = level_offset(k) + i;
          if (!done[id]) {
            const double diff = cont - retire;
            if (diff <= 0.0 && !first_sweep && prev_diff[id] > 0.0) {
              // linear interpolation between bracketing lambdas
              table.index[id] = prev_lambda[id] + (lambda - prev_lambda[id]) * prev_diff[id] /
                                                      (prev_diff[id] - diff);
              done[id] = true;
            } else if (diff <= 0.0) {
              table.index[id] = 0.0;  // indifferent already at lambda = 0
              done[id] = true;
            } else {
              prev_lambda[id] = lambda;
              prev_diff[id] = diff;
            }
          }
        }
      }
      std::swap(v_here, v_next);
    }
    first_sweep = false;
  }
  // states still undecided are indifferent only past lambda = 1
  return table;
}

namespace {

BanditEstimate run_bandit_mc(const BetaProductPrior& prior, double gamma,
                             const BanditMcConfig& config, uint64_t seed) {
  prior.validate();
  require(prior.arms() >= 2, "bandit regret: needs at least two arms");
  require(config.horizon >= 1 && config.n_mc >= 1, "bandit regret: bad MC configuration");
  const int K = prior.arms();
  std::vector<GittinsTable> tables;
  if (config.policy == BanditPolicy::gittins) {
    tables.reserve(K);
    for (int k = 0; k < K; ++k) {
      tables.push_back(
          gittins_table(gamma, config.n_max, prior.a[k], prior.b[k], config.horizon));
    }
  }
  const double horizon_value = (1.0 - std::pow(gamma, config.horizon)) / (1.0 - gamma);

  Rng rng(seed);
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> theta(K);
  std::vector<int> wins(K), losses(K);
  for (int rep = 0; rep < config.n_mc; ++rep) {
    double best_theta = 0.0;
    for (int k = 0; k < K; ++k) {
      theta[k] = rng.beta(prior.a[k], prior.b[k]);
      best_theta = std::max(best_theta, theta[k]);
      wins[k] = 0;
      losses[k] = 0;
    }
    double realised = 0.0, scale = 1.0;
    for (int t = 0; t < config.horizon; ++t) {
      int arm = 0;
      double best_score = -1.0;
      for (int k = 0; k < K; ++k) {
        const double score = config.policy == BanditPolicy::gittins
                                 ? tables[k].at_counts(wins[k], losses[k])
                                 : (prior.a[k] + wins[k]) /
                                       (prior.a[k] + prior.b[k] + wins[k] + losses[k]);
        if (score > best_score) {  // ties stay with the lowest arm
          best_score = score;
          arm = k;
        }
      }
      if (rng.bernoulli(theta[arm])) {
        realised += scale;
        ++wins[arm];
      } else {
        ++losses[arm];
      }
      scale *= gamma;
    }
    const double sample = best_theta * horizon_value - realised;
    sum += sample;
    sum2 += sample * sample;
  }
  BanditEstimate est;
  est.n = config.n_mc;
  est.mean = sum / config.n_mc;
  est.se = std::sqrt(std::max(sum2 / config.n_mc - est.mean * est.mean, 0.0) / config.n_mc);
  return est;
}

}  // namespace

BanditEstimate gittins_regret(const BetaProductPrior& prior, double gamma,
                              const BanditMcConfig& config, uint64_t seed) {
  return run_bandit_mc(prior, gamma, config, seed);
}

std::vector<SurfaceCell> regret_surface(double a1, double b1, std::span<const double> a2_grid,
                                        std::span<const double> b2_grid, double gamma,
                                        const BanditMcConfig& config, uint64_t seed,
                                        int threads) {
  require(a1 > 0.0 && b1 > 0.0, "regret_surface: fixed prior must be positive");
  std::vector<SurfaceCell> cells(a2_grid.size() * b2_grid.size());
  parallel_for(cells.size(), threads, [&](size_t idx) {
    const double a2 = a2_grid[idx / b2_grid.size()];
    const double b2 = b2_grid[idx % b2_grid.size()];
    const BetaProductPrior prior{{a1, a2}, {b1, b2}};
    const BanditEstimate est = gittins_regret(prior, gamma, config, derive_seed(seed, idx));
    cells[idx] = SurfaceCell{a2, b2, est.mean, est.se};
  });
  return cells;
}

WorstCasePrior worst_case_prior(int arms, double gamma, const WorstCaseSearchConfig& config,
                                uint64_t seed, int threads) {
  require(arms >= 2, "worst_case_prior: needs at least two arms");
  require(config.grid_lo > 0.0 && config.grid_hi > config.grid_lo && config.grid_step > 0.0,
          "worst_case_prior: bad grid");
  std::vector<double> grid;
  for (double a = config.grid_lo; a <= config.grid_hi + 1e-12; a += config.grid_step) {
    grid.push_back(a);
  }
  // common random numbers: every candidate sees the same seed
  std::vector<BanditEstimate> estimates(grid.size());
  parallel_for(grid.size(), threads, [&](size_t idx) {
    BetaProductPrior prior{std::vector<double>(arms, grid[idx]),
                           std::vector<double>(arms, grid[idx])};
    estimates[idx] = gittins_regret(prior, gamma, config.mc, seed);
  });

  WorstCasePrior best;
  best.regret = -1.0;
  for (size_t idx = 0; idx < grid.size(); ++idx) {
    best.symmetric_curve.emplace_back(grid[idx], estimates[idx].mean);
    if (estimates[idx].mean > best.regret) {
      best.regret = estimates[idx].mean;
      best.se = estimates[idx].se;
      best.prior = BetaProductPrior{std::vector<double>(arms, grid[idx]),
                                    std::vector<double>(arms, grid[idx])};
    }
  }

  if (config.coordinate_ascent) {
    BetaProductPrior current = best.prior;
    const double step = config.grid_step / 2.0;
    for (int sweep = 0; sweep < config.ascent_sweeps; ++sweep) {
      for (int k = 0; k < arms; ++k) {
        for (int param = 0; param < 2; ++param) {
          double& value = param == 0 ? current.a[k] : current.b[k];
          const double base = value;
          double chosen = base;
          double chosen_regret = best.regret;
          for (double candidate : {base - step, base + step}) {
            if (candidate <= 0.0) continue;
            value = candidate;
            const BanditEstimate est = gittins_regret(current, gamma, config.mc, seed);
            if (est.mean > chosen_regret) {
              chosen = candidate;
              chosen_regret = est.mean;
              best.regret = est.mean;
              best.se = est.se;
              best.prior = current;
            }
          }
          value = chosen;
        }
      }
    }
  }
  return best;
}

}  // namespace mbrl
