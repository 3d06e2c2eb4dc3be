#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecdn/harness.hpp"
#include "ecdn/log.hpp"
#include "ecdn/neural.hpp"

namespace {

ecdn::ScenarioSpec load_or_default(const std::string& path) {
  if (path.empty()) return ecdn::ScenarioSpec{};
  return ecdn::load_scenario(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge CDN content-migration simulator"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run strategies and emit metrics CSVs");
  std::string sim_config;
  std::string sim_strategies = "drlcm,nomig,firstfit,bestfit,worstfit,random";
  int sim_episodes = 1000;
  uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  std::string sim_out = "out";
  simulate->add_option("--config", sim_config, "Scenario config (JSON, comments allowed)");
  simulate->add_option("--strategies", sim_strategies, "Comma-separated strategy list");
  simulate->add_option("--episodes", sim_episodes, "Episodes per strategy");
  simulate->add_option("--seed", sim_seed, "Run seed (defaults to the scenario seed)")
      ->each([&](const std::string&) { sim_seed_set = true; });
  simulate->add_option("--out", sim_out, "Output directory");

  // gap
  auto* gap = app.add_subcommand("gap", "Optimality-gap trace against the exhaustive oracle");
  std::string gap_config;
  std::string gap_checkpoints = "2000,4000,6000,8000,10000";
  uint64_t gap_seed = 0;
  bool gap_seed_set = false;
  int gap_slots = 8;
  std::string gap_out = "out";
  gap->add_option("--config", gap_config, "Scenario config (small scale)");
  gap->add_option("--checkpoints", gap_checkpoints, "Comma-separated episode checkpoints");
  gap->add_option("--seed", gap_seed, "Run seed (defaults to the scenario seed)")
      ->each([&](const std::string&) { gap_seed_set = true; });
  gap->add_option("--slots", gap_slots, "Frozen slots per checkpoint");
  gap->add_option("--out", gap_out, "Output directory");

  // check-gradients
  auto* check = app.add_subcommand("check-gradients",
                                   "Finite-difference verification of the network gradients");
  int check_configs = 100;
  uint64_t check_seed = 7;
  check->add_option("--configs", check_configs, "Random configurations to test");
  check->add_option("--seed", check_seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ecdn::ScenarioSpec spec = load_or_default(sim_config);
      uint64_t seed = sim_seed_set ? sim_seed : spec.seed;
      std::vector<ecdn::Strategy> strategies;
      std::stringstream ss(sim_strategies);
      std::string token;
      while (std::getline(ss, token, ','))
        if (!token.empty()) strategies.push_back(ecdn::strategy_from_name(token));
      ecdn::ExperimentResult result =
          ecdn::run_experiment(spec, strategies, sim_episodes, seed, sim_out);
      std::printf("strategy          cost       power      delay   improvement%%\n");
      for (const auto& entry : result.summary.entries) {
        std::printf("%-10s %12.2f %10.2f %10.4f %10.2f\n", entry.strategy.c_str(),
                    entry.final_mean_cost, entry.final_mean_power, entry.final_mean_delay,
                    entry.improvement_vs_nomig_pct);
      }
      std::printf("metrics written to %s/metrics.csv\n", sim_out.c_str());
    } else if (gap->parsed()) {
      ecdn::ScenarioSpec spec = load_or_default(gap_config);
      uint64_t seed = gap_seed_set ? gap_seed : spec.seed;
      std::vector<int> checkpoints;
      std::stringstream ss(gap_checkpoints);
      std::string token;
      while (std::getline(ss, token, ','))
        if (!token.empty()) checkpoints.push_back(std::stoi(token));
      auto trace = ecdn::optimality_gap_experiment(spec, checkpoints, seed, gap_slots, gap_out);
      std::printf("episode   mean_gap   agent_cost   optimal_cost\n");
      for (const auto& point : trace)
        std::printf("%7d %10.3f %12.3f %14.3f\n", point.episode, point.mean_gap,
                    point.mean_agent_cost, point.mean_optimal_cost);
    } else if (check->parsed()) {
      ecdn::RngStream rng(check_seed);
      double worst = 0.0;
      for (int c = 0; c < check_configs; ++c) {
        int input = 2 + rng.uniform_int(5);
        int hidden = 2 + rng.uniform_int(4);
        int actions = 2 + rng.uniform_int(4);
        bool lstm = rng.uniform01() < 0.5;
        ecdn::QNetwork net = ecdn::make_q_network(
            lstm ? ecdn::NetworkRole::Evaluation : ecdn::NetworkRole::Selection, input, hidden,
            actions, rng, lstm);
        ecdn::Vector state(input);
        // Central differences are meaningless across a ReLU kink; resample
        // configurations that graze one.
        do {
          ecdn::randomize_parameters(net, rng);
          for (int i = 0; i < input; ++i) state[i] = rng.uniform_range(-1.0, 1.0);
        } while (ecdn::relu_kink_nearby(net, state));
        double target = rng.uniform_range(-2.0, 2.0);
        int action = rng.uniform_int(actions);
        worst = std::max(worst, ecdn::finite_difference_check(net, state, action, target));
      }
      std::printf("max relative gradient error over %d configurations: %.3e\n", check_configs,
                  worst);
      if (worst >= 1e-5) {
        std::fprintf(stderr, "gradient check FAILED (threshold 1e-5)\n");
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
