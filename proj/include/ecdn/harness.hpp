#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecdn/agent.hpp"
#include "ecdn/baselines.hpp"
#include "ecdn/scenario.hpp"

namespace ecdn {

struct MetricsRecord {
  std::string run_id;
  std::string strategy;
  int episode = 0;
  int64_t slot = 0;  // slot index at episode end
  double migration_cost = 0.0;
  double access_cost = 0.0;
  double delivery_cost = 0.0;
  double phi = 0.0;  // cumulative weighted objective
  double power_cost = 0.0;
  double mean_access_delay = 0.0;
  int migrations = 0;
  int cloud_fetches = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);
MetricsRecord parse_metrics_row(const std::string& line);

struct StrategyOutcome {
  Strategy strategy = Strategy::NoMig;
  std::vector<MetricsRecord> rows;
  double final_mean_cost = 0.0;   // mean per-episode weighted cost, final window
  double final_mean_power = 0.0;
  double final_mean_delay = 0.0;  // mean access delay over the final window
  uint64_t stream_digest = 0;
};

struct RunSummary {
  struct Entry {
    std::string strategy;
    double final_mean_cost = 0.0;
    double final_mean_power = 0.0;
    double final_mean_delay = 0.0;
    double improvement_vs_nomig_pct = 0.0;
  };
  std::vector<Entry> entries;
};

struct ExperimentResult {
  std::vector<StrategyOutcome> outcomes;
  RunSummary summary;
};

// Runs every strategy on an identically seeded environment stream (common
// random numbers) and aggregates per-episode metrics. When out_dir is
// nonempty, writes metrics.csv and summary.csv there.
ExperimentResult run_experiment(const ScenarioSpec& spec, const std::vector<Strategy>& strategies,
                                int episodes, uint64_t seed, const std::string& out_dir = "");

struct GapPoint {
  int episode = 0;
  double mean_gap = 0.0;
  double mean_agent_cost = 0.0;
  double mean_optimal_cost = 0.0;
};

// Trains the learning agent, pausing at each checkpoint episode to compare
// the greedy policy against the exhaustive single-slot optimum on a frozen
// copy of the environment. Writes gap.csv when out_dir is nonempty.
std::vector<GapPoint> optimality_gap_experiment(const ScenarioSpec& spec,
                                                const std::vector<int>& checkpoints,
                                                uint64_t seed, int gap_slots = 8,
                                                const std::string& out_dir = "");

// Mean per-slot gap of the greedy policy vs the exhaustive optimum over
// `slots` successive frozen slots.
GapPoint evaluate_gap(const Environment& env, DdqnAgent& agent, int slots);

}  // namespace ecdn
