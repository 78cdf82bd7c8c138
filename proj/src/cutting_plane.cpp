#include "mbrl/cutting_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mbrl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

constexpr double kDegenerateChord = 1e-11;

}  // namespace

CutPolytope CutPolytope::simplex(int n) {
  require(n >= 2, "cut polytope: dimension must be >= 2");
  CutPolytope poly;
  poly.dim = n;
  poly.interior.assign(n, 1.0 / n);
  return poly;
}

double CutPolytope::feasibility_margin(std::span<const double> point, int* tightest) const {
  double margin = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (int i = 0; i < dim; ++i) {  // simplex facets beta_i >= 0
    if (point[i] < margin) {
      margin = point[i];
      arg = i;
    }
  }
  for (size_t c = 0; c < cut_normals.size(); ++c) {
    double lhs = -cut_offsets[c];
    for (int i = 0; i < dim; ++i) lhs += cut_normals[c][i] * point[i];
    if (lhs < margin) {
      margin = lhs;
      arg = dim + int(c);
    }
  }
  if (tightest) *tightest = arg;
  return margin;
}

void CutPolytope::add_cut(std::vector<double> normal, double offset) {
  require(int(normal.size()) == dim, "cut polytope: normal has wrong dimension");
  cut_normals.push_back(std::move(normal));
  cut_offsets.push_back(offset);
}

HitAndRunResult hit_and_run(const CutPolytope& polytope, const HitAndRunConfig& config,
                            Rng& rng) {
  require(polytope.dim >= 2, "hit_and_run: bad dimension");
  require(config.n_samples >= 1 && config.burn_in >= 0 && config.thinning >= 1,
          "hit_and_run: bad sampling configuration");
  const int n = polytope.dim;
  std::vector<double> x = polytope.interior;
  require(int(x.size()) == n, "hit_and_run: missing interior point");
  {
    int facet = -1;
    if (polytope.feasibility_margin(x, &facet) <= 0.0) {
      throw std::invalid_argument("hit_and_run: interior point violates constraint " +
                                  std::to_string(facet));
    }
  }

  HitAndRunResult result;
  result.samples.reserve(config.n_samples);
  result.centroid.assign(n, 0.0);
  std::vector<double> direction(n);
  const int total_steps = config.burn_in + config.n_samples * config.thinning;
  int degenerate_streak = 0;
  for (int step = 0; step < total_steps; ++step) {
    // random direction in the simplex tangent space (components sum to zero)
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      direction[i] = rng.normal();
      mean += direction[i];
    }
    mean /= n;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      direction[i] -= mean;
      norm += direction[i] * direction[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-14) continue;
    for (int i = 0; i < n; ++i) direction[i] /= norm;

    // chord through x along the direction
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    int binding = -1;
    auto clip = [&](double num, double den, int id) {
      // constraint: num + t * den >= 0
      if (std::abs(den) < 1e-15) return;
      const double bound = -num / den;
      if (den > 0.0) {
        if (bound > lo) lo = bound;
      } else if (bound < hi) {
        hi = bound;
        binding = id;
      }
    };
    for (int i = 0; i < n; ++i) clip(x[i], direction[i], i);
    for (size_t c = 0; c < polytope.cut_normals.size(); ++c) {
      double num = -polytope.cut_offsets[c];
      double den = 0.0;
      for (int i = 0; i < n; ++i) {
        num += polytope.cut_normals[c][i] * x[i];
        den += polytope.cut_normals[c][i] * direction[i];
      }
      clip(num, den, n + int(c));
    }
    if (!(hi - lo > kDegenerateChord)) {
      if (++degenerate_streak > 50) {
        throw std::runtime_error("hit_and_run: polytope is degenerate near constraint " +
                                 std::to_string(binding));
      }
      continue;
    }
    degenerate_streak = 0;
    const double t = rng.uniform(lo, hi);
    for (int i = 0; i < n; ++i) x[i] += t * direction[i];

    if (step >= config.burn_in && (step - config.burn_in) % config.thinning == 0) {
      result.samples.push_back(x);
      for (int i = 0; i < n; ++i) result.centroid[i] += x[i];
    }
  }
  require(!result.samples.empty(), "hit_and_run: no samples drawn");
  for (int i = 0; i < n; ++i) result.centroid[i] /= double(result.samples.size());
  return result;
}

std::vector<double> regret_plane(std::span<const FiniteMDP> mdps, const BeliefVector& belief) {
  const BayesOptimalResult best = bayes_optimal_tree(mdps, belief);
  std::vector<double> plane(mdps.size());
  const std::vector<double> ustar = optimal_utilities(mdps);
  for (size_t i = 0; i < mdps.size(); ++i) {
    plane[i] = ustar[i] - evaluate_policy(mdps[i], best.policy);
  }
  return plane;
}

namespace {

bool same_decision_tree(const HistoryPolicyTree& a, const HistoryPolicyTree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].probs != b.nodes[i].probs) return false;
  }
  return a.roots == b.roots;
}

}  // namespace

CutPlaneResult cutting_plane_run(std::span<const FiniteMDP> mdps, int iterations,
                                 const CutPlaneConfig& config) {
  require(iterations >= 1, "cutting_plane_run: iterations must be >= 1");
  const int n = int(mdps.size());
  require(n >= 2, "cutting_plane_run: needs at least two MDPs");
  BayesOptimalOracle oracle = config.oracle;
  if (!oracle) {
    oracle = [](std::span<const FiniteMDP> task, const BeliefVector& belief) {
      return bayes_optimal_tree(task, belief);
    };
  }

  CutPolytope polytope = CutPolytope::simplex(n);
  Rng rng(config.seed);
  CutPlaneResult result;
  result.beta_star = polytope.interior;

  for (int it = 0; it < iterations; ++it) {
    const HitAndRunResult sampling = hit_and_run(polytope, config.sampling, rng);
    const BeliefVector beta = simplex_project(sampling.centroid);
    result.centroids.push_back(beta);
    result.beta_star = beta;
    result.iterations_run = it + 1;

    const BayesOptimalResult best = oracle(mdps, beta);
    bool seen = false;
    for (const HistoryPolicyTree& p : result.best_responses) {
      if (same_decision_tree(p, best.policy)) {
        seen = true;
        break;
      }
    }
    if (!seen) result.best_responses.push_back(best.policy);

    std::vector<double> plane(n);
    const std::vector<double> ustar = optimal_utilities(mdps);
    double norm_inf = 0.0;
    for (int i = 0; i < n; ++i) {
      plane[i] = ustar[i] - evaluate_policy(mdps[i], best.policy);
      norm_inf = std::max(norm_inf, std::abs(plane[i]));
    }
    result.cut_norms.push_back(norm_inf);
    if (norm_inf < config.termination_norm) break;  // constant best response

    // keep the ascent side {beta' : C^T (beta' - beta) >= -inset}
    double offset = -config.cut_inset;
    for (int i = 0; i < n; ++i) offset += plane[i] * beta[i];

    int surviving = 0;
    std::vector<double> best_point;
    double best_margin = -std::numeric_limits<double>::infinity();
    CutPolytope trial = polytope;
    trial.add_cut(plane, offset);
    for (const std::vector<double>& s : sampling.samples) {
      const double margin = trial.feasibility_margin(s);
      if (margin > 0.0) ++surviving;
      if (margin > best_margin) {
        best_margin = margin;
        best_point = s;
      }
    }
    result.volume_fractions.push_back(double(surviving) / double(sampling.samples.size()));
    result.cuts.push_back(plane);
    if (best_margin <= 0.0) {
      result.emptied = true;  // report with the last valid centroid
      break;
    }
    trial.interior = best_point;
    polytope = std::move(trial);
  }
  return result;
}

MinimaxMixture minimax_mixture(std::span<const FiniteMDP> mdps,
                               std::span<const HistoryPolicyTree> best_responses) {
  require(!best_responses.empty(), "minimax_mixture: no best responses collected");
  const std::vector<double> ustar = optimal_utilities(mdps);
  std::vector<std::vector<double>> loss(best_responses.size(),
                                        std::vector<double>(mdps.size()));
  for (size_t j = 0; j < best_responses.size(); ++j) {
    for (size_t i = 0; i < mdps.size(); ++i) {
      loss[j][i] = ustar[i] - evaluate_policy(mdps[i], best_responses[j]);
    }
  }
  const MatrixGameSolution sol = solve_matrix_game(loss);
  MinimaxMixture mix;
  mix.policy_weights = sol.row_strategy;
  mix.belief_weights = sol.col_strategy;
  mix.value = sol.value;
  return mix;
}

}  // namespace mbrl
