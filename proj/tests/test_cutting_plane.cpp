#include <cmath>
#include <vector>

#include "doctest.h"
#include "mbrl/cutting_plane.hpp"
#include "mbrl/experiments.hpp"

using namespace mbrl;

namespace {

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// grid-search oracle for the maximin belief of a two-MDP task
std::pair<BeliefVector, double> grid_maximin(std::span<const FiniteMDP> mdps, int grid) {
  const std::vector<double> ustar = optimal_utilities(mdps);
  BeliefVector best_belief{1.0, 0.0};
  double best = -1.0;
  for (int g = 0; g <= grid; ++g) {
    const double x = double(g) / grid;
    const BeliefVector belief{1.0 - x, x};
    const double value =
        belief[0] * ustar[0] + belief[1] * ustar[1] - bayes_optimal_value(mdps, belief);
    if (value > best) {
      best = value;
      best_belief = belief;
    }
  }
  return {best_belief, best};
}

}  // namespace

TEST_SUITE("cutting_plane") {

TEST_CASE("hit-and-run recovers the simplex centroid") {
  const CutPolytope simplex = CutPolytope::simplex(3);
  Rng rng(3);
  const HitAndRunResult res = hit_and_run(simplex, {2000, 500, 5}, rng);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(res.centroid[i] - 1.0 / 3.0) < 0.02);
  for (const auto& s : res.samples) {
    double sum = 0.0;
    for (double v : s) {
      CHECK(v >= -1e-12);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("hit-and-run handles a halfspace-restricted simplex") {
  CutPolytope poly = CutPolytope::simplex(2);
  poly.add_cut({1.0, 0.0}, 0.5);  // beta_1 >= 0.5
  poly.interior = {0.75, 0.25};
  Rng rng(5);
  const HitAndRunResult res = hit_and_run(poly, {2000, 500, 5}, rng);
  CHECK(std::abs(res.centroid[0] - 0.75) < 0.02);
  CHECK(std::abs(res.centroid[1] - 0.25) < 0.02);
}

TEST_CASE("hit-and-run sampling is reproducible under the seed") {
  const CutPolytope simplex = CutPolytope::simplex(4);
  Rng r1(9), r2(9);
  const HitAndRunResult a = hit_and_run(simplex, {200, 50, 2}, r1);
  const HitAndRunResult b = hit_and_run(simplex, {200, 50, 2}, r2);
  CHECK(a.centroid == b.centroid);
}

TEST_CASE("volume fraction agrees with a rejection-sampling oracle") {
  // cut the 3-simplex at beta_1 >= 0.3 and compare the surviving fraction
  CutPolytope simplex = CutPolytope::simplex(3);
  Rng rng(11);
  const HitAndRunResult res = hit_and_run(simplex, {4000, 500, 3}, rng);
  int surviving = 0;
  for (const auto& s : res.samples) {
    if (s[0] >= 0.3) ++surviving;
  }
  const double hit_and_run_fraction = double(surviving) / double(res.samples.size());

  // oracle: direct uniform samples on the simplex
  Rng oracle_rng(13);
  const std::vector<double> ones{1.0, 1.0, 1.0};
  std::vector<double> point(3);
  int oracle_surviving = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    oracle_rng.dirichlet(ones, point);
    if (point[0] >= 0.3) ++oracle_surviving;
  }
  const double oracle_fraction = double(oracle_surviving) / n;
  CHECK(std::abs(hit_and_run_fraction - oracle_fraction) <= 0.05);
}

TEST_CASE("degenerate polytopes are reported with the violated facet") {
  CutPolytope poly = CutPolytope::simplex(2);
  poly.add_cut({1.0, 0.0}, 0.5);
  poly.add_cut({-1.0, 0.0}, -0.5);  // forces beta_1 == 0.5 exactly
  poly.interior = {0.5, 0.5};
  Rng rng(7);
  CHECK_THROWS(hit_and_run(poly, {100, 10, 1}, rng));
}

TEST_CASE("regret plane vanishes at its own Dirac belief") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark(2, 2, 3, 31);
  for (int i = 0; i < 2; ++i) {
    const std::vector<double> plane = regret_plane(mdps, dirac_belief(2, i));
    CHECK(plane[i] == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("regret plane reproduces the Bayesian regret of the best response") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double x = rng.uniform();
    const BeliefVector belief{1.0 - x, x};
    const std::vector<double> plane = regret_plane(mdps, belief);
    const BayesOptimalResult best = bayes_optimal_tree(mdps, belief);
    // plane passes through the query point
    const double through = plane[0] * belief[0] + plane[1] * belief[1];
    CHECK(through == doctest::Approx(bayesian_regret(mdps, belief, best.policy)).epsilon(1e-10));
    // and reproduces the regret at any other belief by linearity
    const double y = rng.uniform();
    const BeliefVector other{1.0 - y, y};
    CHECK(plane[0] * other[0] + plane[1] * other[1] ==
          doctest::Approx(bayesian_regret(mdps, other, best.policy)).epsilon(1e-10));
  }
}

TEST_CASE("plane coefficients are regrets: nonnegative and horizon-bounded") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FiniteMDP> mdps;
    for (int i = 0; i < 3; ++i) {
      mdps.push_back(gen_random_mdp(2, 2, rng.next_u64(), 4));
    }
    std::vector<double> raw{rng.uniform(), rng.uniform(), rng.uniform()};
    const std::vector<double> plane = regret_plane(mdps, simplex_project(raw));
    for (double c : plane) {
      CHECK(c >= -1e-10);
      CHECK(c <= 4.0 + 1e-10);
    }
  }
}

TEST_CASE("a dominated task terminates at the first centroid") {
  // identical MDPs: the best response is optimal everywhere, the plane is 0
  const FiniteMDP mdp = gen_random_mdp(3, 2, 23, 4);
  const std::vector<FiniteMDP> mdps{mdp, mdp};
  const CutPlaneResult run = cutting_plane_run(mdps, 10);
  CHECK(run.iterations_run == 1);
  CHECK(run.cut_norms.front() < 1e-4);
  CHECK(run.best_responses.size() == 1);
}

TEST_CASE("cutting plane localises the grid-certified maximin belief") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  const auto [oracle_belief, oracle_value] = grid_maximin(mdps, 200);
  CutPlaneConfig config;
  config.seed = 3;
  const CutPlaneResult run = cutting_plane_run(mdps, 25, config);
  CHECK(l1_distance(run.beta_star, oracle_belief) <= 0.02);

  // the exact maximin belief (nature's LP strategy over the pure-policy
  // frontier) satisfies every generated cut
  const UtilityFrontier frontier = utility_frontier(mdps);
  const std::vector<double> ustar = optimal_utilities(mdps);
  std::vector<std::vector<double>> loss(frontier.utilities.size(), std::vector<double>(2));
  for (size_t j = 0; j < frontier.utilities.size(); ++j) {
    for (int i = 0; i < 2; ++i) loss[j][i] = ustar[i] - frontier.utilities[j][i];
  }
  const std::vector<double> exact_maximin = solve_matrix_game(loss).col_strategy;
  CHECK(l1_distance(exact_maximin, oracle_belief) <= 0.02);  // routes agree
  for (size_t c = 0; c < run.cuts.size(); ++c) {
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 2; ++i) {
      lhs += run.cuts[c][i] * exact_maximin[i];
      rhs += run.cuts[c][i] * run.centroids[c][i];
    }
    CHECK(lhs >= rhs - 1e-9);
  }
}

TEST_CASE("minimax regret value is concave along the simplex") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  const std::vector<double> ustar = optimal_utilities(mdps);
  std::vector<double> values;
  for (int g = 0; g <= 40; ++g) {
    const double x = g / 40.0;
    const BeliefVector belief{1.0 - x, x};
    values.push_back(belief[0] * ustar[0] + belief[1] * ustar[1] -
                     bayes_optimal_value(mdps, belief));
  }
  for (size_t i = 1; i + 1 < values.size(); ++i) {
    CHECK(values[i] >= 0.5 * (values[i - 1] + values[i + 1]) - 1e-9);
  }
}

TEST_CASE("volume fractions drop by at least a third for most cuts") {
  Rng rng(29);
  std::vector<double> fractions;
  for (int task = 0; task < 3; ++task) {
    std::vector<FiniteMDP> mdps;
    for (int i = 0; i < 3; ++i) {
      mdps.push_back(gen_random_mdp(2, 2, derive_seed(31, task * 10 + i), 4));
    }
    CutPlaneConfig config;
    config.seed = derive_seed(37, task);
    const CutPlaneResult run = cutting_plane_run(mdps, 10, config);
    fractions.insert(fractions.end(), run.volume_fractions.begin(),
                     run.volume_fractions.end());
  }
  int good = 0;
  for (double f : fractions) {
    if (f <= 2.0 / 3.0 + 0.05) ++good;
  }
  CHECK(fractions.size() >= 10);
  CHECK(double(good) / double(fractions.size()) >= 0.9);
}

TEST_CASE("epsilon-suboptimal oracles degrade the value by at most epsilon") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  const auto [oracle_belief, oracle_value] = grid_maximin(mdps, 200);
  for (double eps : {0.01, 0.05}) {
    CutPlaneConfig config;
    config.seed = 41;
    // manufactured oracle: perturb the query belief until the response is
    // within eps of optimal, mixing toward the uniform belief
    config.oracle = [eps](std::span<const FiniteMDP> task, const BeliefVector& belief) {
      const double exact = bayes_optimal_value(task, belief);
      double lo = 0.0, hi = 1.0;  // mixing weight toward uniform
      BayesOptimalResult res = bayes_optimal_tree(task, belief);
      for (int iter = 0; iter < 12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        BeliefVector mixed(belief.size());
        for (size_t i = 0; i < belief.size(); ++i) {
          mixed[i] = (1.0 - mid) * belief[i] + mid / belief.size();
        }
        BayesOptimalResult candidate = bayes_optimal_tree(task, mixed);
        double u = 0.0;
        for (size_t i = 0; i < task.size(); ++i) {
          u += belief[i] * evaluate_policy(task[i], candidate.policy);
        }
        if (exact - u <= eps) {
          lo = mid;
          res = std::move(candidate);
          res.value = u;
        } else {
          hi = mid;
        }
      }
      return res;
    };
    const CutPlaneResult run = cutting_plane_run(mdps, 25, config);
    // certified value at the returned belief, measured with the exact oracle
    const std::vector<double> ustar = optimal_utilities(mdps);
    double certified = run.beta_star[0] * ustar[0] + run.beta_star[1] * ustar[1] -
                       bayes_optimal_value(mdps, run.beta_star);
    CHECK(certified >= oracle_value - eps - 0.02);
  }
}

TEST_CASE("single dominating best response yields a Dirac mixture") {
  const FiniteMDP mdp = gen_random_mdp(3, 2, 47, 4);
  const std::vector<FiniteMDP> mdps{mdp, mdp};
  const BayesOptimalResult best = bayes_optimal_tree(mdps, {0.5, 0.5});
  const std::vector<HistoryPolicyTree> responses{best.policy};
  const MinimaxMixture mix = minimax_mixture(mdps, responses);
  CHECK(mix.policy_weights[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mix.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("symmetric task mixes the two best responses evenly") {
  // mirrored single-state MDPs: pure best responses each fail on the other
  FiniteMDP m1 = make_mdp(1, 2, 3, 1.0);
  m1.p(0, 0, 0) = 1.0;
  m1.p(0, 1, 0) = 1.0;
  m1.r(0, 0) = 1.0;
  FiniteMDP m2 = m1;
  m2.r(0, 0) = 0.0;
  m2.r(0, 1) = 1.0;
  const std::vector<FiniteMDP> mdps{m1, m2};
  const std::vector<HistoryPolicyTree> responses{
      bayes_optimal_tree(mdps, {1.0, 0.0}).policy,
      bayes_optimal_tree(mdps, {0.0, 1.0}).policy,
  };
  const MinimaxMixture mix = minimax_mixture(mdps, responses);
  CHECK(mix.policy_weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(mix.policy_weights[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(mix.value == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("mixture game value matches the grid oracle over collected policies") {
  const std::vector<FiniteMDP> mdps = two_mdp_benchmark();
  CutPlaneConfig config;
  config.seed = 53;
  const CutPlaneResult run = cutting_plane_run(mdps, 20, config);
  const MinimaxMixture mix = minimax_mixture(mdps, run.best_responses);

  // oracle: max over a belief grid of min over collected policies
  std::vector<TaskEvaluation> evals;
  for (const auto& p : run.best_responses) evals.push_back(evaluate_on_task(mdps, p));
  double grid_value = 0.0;
  for (int g = 0; g <= 100; ++g) {
    const double x = g / 100.0;
    const BeliefVector belief{1.0 - x, x};
    double best = 1e18;
    for (const auto& eval : evals) best = std::min(best, bayesian_regret(eval, belief));
    grid_value = std::max(grid_value, best);
  }
  CHECK(std::abs(mix.value - grid_value) <= 0.01);
}

}  // TEST_SUITE
