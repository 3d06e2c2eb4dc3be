#pragma once

#include <cstdint>
#include <string>

#include "ecdn/agent.hpp"
#include "ecdn/mdp.hpp"

namespace ecdn {

// Full experiment description. Field defaults are the evaluation settings:
// 0.25 km^2 cells, 30 km/h, turn probabilities (0.5, 0.25, 0.25), fixed
// caches 1.5 GB / 4 units / 20 requests / 60 m, mobile caches 700 MB /
// 1 unit / 5 requests / 10 m, 40 low contents of 50-120 MB, 8 initially full
// mobile caches, 5 targets, arrival rate 5, cloud/edge delays 0.5/0.2 per
// MB, power 2, bandwidth 3, delay costs 5/10, warmup 700, batch 30.
struct ScenarioSpec {
  // grid
  int grid_n = 4;
  double cell_side_m = 500.0;
  // mobility
  double speed_kmh = 30.0;
  double mu_straight = 0.5;
  double mu_left = 0.25;
  double mu_right = 0.25;
  double t_cap = 30.0;
  std::string trace_file;
  // caches
  int fixed_count = 6;
  int mobile_count = 10;
  double fixed_storage_mb = 1500.0;
  double fixed_processing_units = 4.0;
  double fixed_units_per_request = 0.2;
  double fixed_coverage_m = 60.0;
  double mobile_storage_mb = 700.0;
  double mobile_processing_units = 1.0;
  double mobile_units_per_request = 0.2;
  double mobile_coverage_m = 10.0;
  // contents
  int low_count = 40;
  double low_size_min_mb = 50.0;
  double low_size_max_mb = 120.0;
  int high_count = 4;
  double high_size_min_mb = 50.0;
  double high_size_max_mb = 120.0;
  int initially_full_mobiles = 8;
  int initial_targets = 5;
  // demand
  double zipf_slope = 0.8;
  double request_rate = 25.0;  // beta
  ZipfNormalization zipf_normalization = ZipfNormalization::ReciprocalRank;
  double high_arrival_rate = 5.0;
  // links
  double data_rate_mb = 5.0;  // 0.2 time units per MB between edge caches
  double propagation_delay = 0.0;
  double cloud_delay_per_mb = 0.5;
  // costs
  double upload_cost_per_mb = 2.0;
  double download_cost_per_mb = 2.0;
  double bandwidth_cost_per_mb_hop = 3.0;
  double low_delay_cost = 5.0;
  double high_delay_cost = 10.0;
  CostWeights weights;
  BandwidthMetric bandwidth_metric = BandwidthMetric::Hops;
  // topology
  int sigma = 1;
  // learning
  AgentConfig agent;
  uint64_t seed = 1;
};

// Parses a JSON scenario (comments allowed); unknown keys are rejected and
// invariant violations name the offending key. An empty object yields the
// default scenario.
ScenarioSpec scenario_from_json_text(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);
std::string scenario_to_json_text(const ScenarioSpec& spec);
void save_scenario(const ScenarioSpec& spec, const std::string& path);
void validate_scenario(const ScenarioSpec& spec);

// Materializes catalogs, cache inventory and the environment configuration.
// Content sizes, popularity ranks and initial placement derive from
// spec.seed, so every strategy sees an identical world.
EnvConfig build_env_config(const ScenarioSpec& spec);

}  // namespace ecdn
