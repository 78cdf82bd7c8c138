// Command-line runner for the minimax-Bayes experiments. Every subcommand
// writes analysis-ready CSV/JSON plus a manifest that pins the exact
// configuration; rerunning with the same manifest reproduces the bytes.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mbrl/experiments.hpp"
#include "mbrl/parallel.hpp"

namespace fs = std::filesystem;
using namespace mbrl;

namespace {

struct GlobalArgs {
  std::string out_dir = "out";
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

Json load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) return Json::object();
  return load_json_file(args.config_path);
}

void ensure_out_dir(const GlobalArgs& args) { fs::create_directories(args.out_dir); }

std::string out_path(const GlobalArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimax-Bayes reinforcement learning experiment runner"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--out-dir", args.out_dir, "output directory")->capture_default_str();
  app.add_option("--config", args.config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", args.seed, "override the config seed");
  app.add_option("--threads", args.threads, "worker threads for independent cells")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-mdps", "sample random MDPs to JSON");
  int gen_count = 2, gen_states = 3, gen_actions = 2, gen_horizon = 5;
  double gen_discount = 1.0;
  std::string gen_out = "mdps.json";
  gen->add_option("--n", gen_count, "number of MDPs")->capture_default_str();
  gen->add_option("--states", gen_states, "states per MDP")->capture_default_str();
  gen->add_option("--actions", gen_actions, "actions per MDP")->capture_default_str();
  gen->add_option("--horizon", gen_horizon, "horizon")->capture_default_str();
  gen->add_option("--discount", gen_discount, "discount factor")->capture_default_str();
  gen->add_option("--out", gen_out, "output file name")->capture_default_str();

  auto* curve = app.add_subcommand("two-mdp-curve", "Bayesian-regret curves over a 2-MDP belief");
  auto* grid = app.add_subcommand("three-mdp-grid", "regret landscape over a 3-MDP simplex");
  auto* compare = app.add_subcommand("compare16", "minimax vs uniform worst-case regret");

  auto* gda_cmd = app.add_subcommand("gda", "stochastic gradient descent-ascent");
  std::string gda_out = "trace.csv";
  gda_cmd->add_option("--out", gda_out, "trace file name")->capture_default_str();

  auto* cut = app.add_subcommand("cutplane", "cutting-plane search for the maximin belief");
  std::string cut_mdps_file;
  int cut_iters = 30;
  std::string cut_out = "cutplane_run.json";
  cut->add_option("--mdps", cut_mdps_file, "JSON file with the MDP set");
  cut->add_option("--iters", cut_iters, "cutting-plane iterations")->capture_default_str();
  cut->add_option("--out", cut_out, "run record file name")->capture_default_str();

  auto* surface = app.add_subcommand("bandit-surface", "Gittins regret over a prior grid");
  auto* worst = app.add_subcommand("bandit-worstcase", "search for the worst-case bandit prior");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    ensure_out_dir(args);
    Json config = load_config(args);
    if (args.seed_set) config["seed"] = args.seed;

    if (gen->parsed()) {
      const uint64_t seed = config.value("seed", uint64_t(1));
      Json out = Json::array();
      for (int i = 0; i < gen_count; ++i) {
        out.push_back(mdp_to_json(gen_random_mdp(gen_states, gen_actions, derive_seed(seed, i),
                                                 gen_horizon, gen_discount)));
      }
      save_json_file(out_path(args, gen_out), Json{{"mdps", out}});
      write_manifest(args.out_dir, "gen_mdps",
                     Json{{"n", gen_count},
                          {"states", gen_states},
                          {"actions", gen_actions},
                          {"horizon", gen_horizon},
                          {"discount", gen_discount},
                          {"seed", seed}},
                     seed, {gen_out});
      std::cout << "wrote " << out_path(args, gen_out) << "\n";
    } else if (curve->parsed()) {
      TwoMdpCurveConfig cfg = TwoMdpCurveConfig::from_json(config);
      cfg.threads = args.threads;
      const TwoMdpCurveData data = compute_two_mdp_curve(cfg);
      write_csv(out_path(args, "two_mdp_curve.csv"), data.table);
      write_manifest(args.out_dir, "two_mdp_curve", cfg.to_json(), cfg.seed,
                     {"two_mdp_curve.csv"});
      std::cout << "maximin beta2 " << data.maximin_beta2 << ", game value " << data.game_value
                << "\n";
    } else if (grid->parsed()) {
      ThreeMdpGridConfig cfg = ThreeMdpGridConfig::from_json(config);
      cfg.threads = args.threads;
      const ThreeMdpGridData data = compute_three_mdp_grid(cfg);
      write_csv(out_path(args, "three_mdp_grid.csv"), data.table);
      write_manifest(args.out_dir, "three_mdp_grid", cfg.to_json(), cfg.seed,
                     {"three_mdp_grid.csv"});
      std::cout << "wrote " << data.table.rows.size() << " grid points\n";
    } else if (compare->parsed()) {
      Compare16Config cfg = Compare16Config::from_json(config);
      cfg.threads = args.threads;
      const std::vector<Compare16Row> rows = compute_compare16(cfg);
      CsvTable table;
      table.header = {"seed", "minimax_worst_case", "uniform_worst_case", "game_value",
                      "n_best_responses"};
      for (const auto& r : rows) {
        table.rows.push_back({double(r.seed), r.minimax_worst_case, r.uniform_worst_case,
                              r.game_value, double(r.n_best_responses)});
        std::cout << "seed " << r.seed << ": minimax " << r.minimax_worst_case << " vs uniform "
                  << r.uniform_worst_case << "\n";
      }
      write_csv(out_path(args, "compare16.csv"), table);
      write_manifest(args.out_dir, "compare16", cfg.to_json(), cfg.seed, {"compare16.csv"});
    } else if (gda_cmd->parsed()) {
      const std::string kind = config.value("belief_kind", std::string("finite"));
      if (kind == "finite") {
        const int n_states = config.value("n_states", 3);
        const int n_actions = config.value("n_actions", 2);
        const int horizon = config.value("horizon", 5);
        const uint64_t seed = config.value("seed", kTwoMdpBenchmarkSeed);
        GdaConfig cfg;
        cfg.belief_kind = BeliefKind::finite;
        cfg.seed = derive_seed(seed, 42);
        cfg.eta_policy = config.value("eta_policy", cfg.eta_policy);
        cfg.eta_belief = config.value("eta_belief", cfg.eta_belief);
        cfg.iterations = config.value("iterations", cfg.iterations);
        const std::vector<FiniteMDP> mdps = two_mdp_benchmark(n_states, n_actions, horizon, seed);
        const SoftmaxPartitionPolicy init = make_history_policy(n_states, n_actions, horizon);
        const GdaFiniteResult res = gda_run(cfg, init, mdps, uniform_belief(int(mdps.size())));
        write_csv(out_path(args, gda_out), gda_trace_table(res.trace));
        save_json_file(out_path(args, "gda_policy.json"), policy_to_json(res.policy));
        write_manifest(args.out_dir, "gda", config, seed, {gda_out, "gda_policy.json"});
        std::cout << "picked iteration " << res.picked_iteration << ", final belief regret "
                  << res.trace.regret_estimate.back() << "\n";
      } else {
        GdaDirichletStudyConfig cfg = GdaDirichletStudyConfig::from_json(config);
        cfg.threads = args.threads;
        const GdaDirichletStudyData data = compute_gda_dirichlet(cfg);
        write_csv(out_path(args, "gda_dirichlet_robustness.csv"), data.table);
        save_json_file(out_path(args, "gda_maximin_prior.json"),
                       prior_to_json(data.maximin_prior));
        write_manifest(args.out_dir, "gda_dirichlet", cfg.to_json(), cfg.seed,
                       {"gda_dirichlet_robustness.csv", "gda_maximin_prior.json"});
        std::cout << "wrote robustness table with " << data.cells.size() << " cells\n";
      }
    } else if (cut->parsed()) {
      std::vector<FiniteMDP> mdps;
      uint64_t seed = config.value("seed", kTwoMdpBenchmarkSeed);
      if (!cut_mdps_file.empty()) {
        const Json file = load_json_file(cut_mdps_file);
        for (const auto& j : file.at("mdps")) mdps.push_back(mdp_from_json(j));
      } else {
        mdps = two_mdp_benchmark(config.value("n_states", 3), config.value("n_actions", 2),
                                 config.value("horizon", 5), seed);
      }
      CutPlaneConfig cfg;
      cfg.seed = derive_seed(seed, 7);
      const CutPlaneResult run = cutting_plane_run(mdps, cut_iters, cfg);
      save_json_file(out_path(args, cut_out), cutplane_run_to_json(mdps, run));
      write_manifest(args.out_dir, "cutplane",
                     Json{{"iters", cut_iters}, {"seed", seed}, {"mdps_file", cut_mdps_file}},
                     seed, {cut_out});
      std::cout << "beta_star = [";
      for (size_t i = 0; i < run.beta_star.size(); ++i) {
        std::cout << (i ? ", " : "") << run.beta_star[i];
      }
      std::cout << "], best responses " << run.best_responses.size() << "\n";
    } else if (surface->parsed()) {
      const double a1 = config.value("a1", 1.0), b1 = config.value("b1", 1.0);
      const double gamma = config.value("gamma", 0.9);
      const uint64_t seed = config.value("seed", uint64_t(1));
      BanditMcConfig mc;
      mc.horizon = config.value("horizon", 200);
      mc.n_mc = config.value("n_mc", 10000);
      mc.n_max = config.value("n_max", 200);
      std::vector<double> grid_values = config.value(
          "grid", std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0});
      const std::vector<SurfaceCell> cells =
          regret_surface(a1, b1, grid_values, grid_values, gamma, mc, seed, args.threads);
      CsvTable table;
      table.header = {"a2", "b2", "regret", "se"};
      for (const SurfaceCell& c : cells) table.rows.push_back({c.a2, c.b2, c.regret, c.se});
      write_csv(out_path(args, "bandit_surface.csv"), table);
      write_manifest(args.out_dir, "bandit_surface",
                     Json{{"a1", a1},
                          {"b1", b1},
                          {"gamma", gamma},
                          {"horizon", mc.horizon},
                          {"n_mc", mc.n_mc},
                          {"grid", grid_values},
                          {"seed", seed}},
                     seed, {"bandit_surface.csv"});
      std::cout << "wrote " << cells.size() << " surface cells\n";
    } else if (worst->parsed()) {
      const int arms = config.value("arms", 2);
      const double gamma = config.value("gamma", 0.9);
      const uint64_t seed = config.value("seed", uint64_t(1));
      WorstCaseSearchConfig cfg;
      cfg.grid_lo = config.value("grid_lo", cfg.grid_lo);
      cfg.grid_hi = config.value("grid_hi", cfg.grid_hi);
      cfg.grid_step = config.value("grid_step", cfg.grid_step);
      cfg.mc.horizon = config.value("horizon", 200);
      cfg.mc.n_mc = config.value("n_mc", 100000);
      cfg.coordinate_ascent = config.value("coordinate_ascent", false);
      const WorstCasePrior result = worst_case_prior(arms, gamma, cfg, seed, args.threads);
      CsvTable table;
      table.header = {"a", "regret"};
      for (const auto& [a, r] : result.symmetric_curve) table.rows.push_back({a, r});
      write_csv(out_path(args, "bandit_worstcase.csv"), table);
      Json summary;
      summary["a"] = result.prior.a;
      summary["b"] = result.prior.b;
      summary["regret"] = result.regret;
      summary["se"] = result.se;
      save_json_file(out_path(args, "bandit_worstcase.json"), summary);
      write_manifest(args.out_dir, "bandit_worstcase",
                     Json{{"arms", arms},
                          {"gamma", gamma},
                          {"grid_lo", cfg.grid_lo},
                          {"grid_hi", cfg.grid_hi},
                          {"grid_step", cfg.grid_step},
                          {"horizon", cfg.mc.horizon},
                          {"n_mc", cfg.mc.n_mc},
                          {"seed", seed}},
                     seed, {"bandit_worstcase.csv", "bandit_worstcase.json"});
      std::cout << "worst-case symmetric a = " << result.prior.a[0] << ", regret "
                << result.regret << " (se " << result.se << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
