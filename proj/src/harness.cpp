#include "ecdn/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ecdn/log.hpp"

namespace ecdn {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_header() {
  return "run_id,strategy,episode,slot,migration_cost,access_cost,delivery_cost,phi,"
         "power_cost,mean_access_delay,migrations,cloud_fetches";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::ostringstream out;
  out << r.run_id << ',' << r.strategy << ',' << r.episode << ',' << r.slot << ','
      << format_double(r.migration_cost) << ',' << format_double(r.access_cost) << ','
      << format_double(r.delivery_cost) << ',' << format_double(r.phi) << ','
      << format_double(r.power_cost) << ',' << format_double(r.mean_access_delay) << ','
      << r.migrations << ',' << r.cloud_fetches;
  return out.str();
}

MetricsRecord parse_metrics_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (fields.size() != 12) throw std::invalid_argument("metrics row: expected 12 fields");
  MetricsRecord r;
  r.run_id = fields[0];
  r.strategy = fields[1];
  r.episode = std::stoi(fields[2]);
  r.slot = std::stoll(fields[3]);
  r.migration_cost = std::stod(fields[4]);
  r.access_cost = std::stod(fields[5]);
  r.delivery_cost = std::stod(fields[6]);
  r.phi = std::stod(fields[7]);
  r.power_cost = std::stod(fields[8]);
  r.mean_access_delay = std::stod(fields[9]);
  r.migrations = std::stoi(fields[10]);
  r.cloud_fetches = std::stoi(fields[11]);
  return r;
}

namespace {

struct EpisodeAccum {
  double migration = 0.0, access = 0.0, delivery = 0.0, power = 0.0, delay = 0.0;
  int delay_events = 0, migrations = 0, cloud = 0;

  void add(const SlotMetrics& m) {
    migration += m.migration.total();
    access += m.access_cost;
    delivery += m.delivery_cost;
    power += m.power_cost;
    delay += m.total_delay;
    delay_events += m.delay_events;
    migrations += m.migrations;
    cloud += m.cloud_fetches;
  }
};

MetricsRecord make_record(const std::string& run_id, Strategy strategy, int episode, int64_t slot,
                          const EpisodeAccum& acc, double phi) {
  MetricsRecord r;
  r.run_id = run_id;
  r.strategy = strategy_name(strategy);
  r.episode = episode;
  r.slot = slot;
  r.migration_cost = acc.migration;
  r.access_cost = acc.access;
  r.delivery_cost = acc.delivery;
  r.phi = phi;
  r.power_cost = acc.power;
  r.mean_access_delay = acc.delay_events > 0 ? acc.delay / acc.delay_events : 0.0;
  r.migrations = acc.migrations;
  r.cloud_fetches = acc.cloud;
  return r;
}

StrategyOutcome run_strategy(const ScenarioSpec& spec, Strategy strategy, int episodes,
                             uint64_t seed, const std::string& run_id) {
  EnvConfig cfg = build_env_config(spec);
  Environment env(cfg, seed, strategy);
  StrategyOutcome outcome;
  outcome.strategy = strategy;
  const int slots = std::max(1, spec.agent.slots_per_episode);

  if (strategy == Strategy::Drlcm) {
    AgentConfig agent_cfg = spec.agent;
    agent_cfg.episodes = episodes;
    ActionSpace space{static_cast<int>(cfg.caches.size()), env.num_fixed(),
                      static_cast<int>(cfg.low_catalog.size()),
                      static_cast<int>(cfg.high_catalog.size())};
    DdqnAgent agent(agent_cfg, cfg.layout.length() ? cfg.layout.length()
                                                   : static_cast<int>(env.state().values.size()),
                    space, seed);
    for (int episode = 0; episode < episodes; ++episode) {
      agent.begin_episode();
      EpisodeAccum acc;
      for (int t = 0; t < slots; ++t) acc.add(agent.train_step(env));
      outcome.rows.push_back(
          make_record(run_id, strategy, episode, env.slot(), acc, env.phi()));
    }
  } else {
    for (int episode = 0; episode < episodes; ++episode) {
      EpisodeAccum acc;
      for (int t = 0; t < slots; ++t) acc.add(env.step_passive());
      outcome.rows.push_back(
          make_record(run_id, strategy, episode, env.slot(), acc, env.phi()));
    }
  }
  outcome.stream_digest = env.stream_digest();

  const int window = std::max(1, episodes / 5);
  double cost = 0.0, power = 0.0, delay = 0.0;
  int n = 0;
  for (int e = episodes - window; e < episodes; ++e) {
    const MetricsRecord& r = outcome.rows[e];
    cost += r.migration_cost + r.access_cost + r.delivery_cost;
    power += r.power_cost;
    delay += r.mean_access_delay;
    ++n;
  }
  outcome.final_mean_cost = cost / n;
  outcome.final_mean_power = power / n;
  outcome.final_mean_delay = delay / n;
  return outcome;
}

}  // namespace

ExperimentResult run_experiment(const ScenarioSpec& spec, const std::vector<Strategy>& strategies,
                                int episodes, uint64_t seed, const std::string& out_dir) {
  if (episodes < 1) throw std::invalid_argument("run_experiment: episodes must be >= 1");
  ExperimentResult result;
  const std::string run_id = "run" + std::to_string(seed);

  for (Strategy strategy : strategies) {
    log_at(LogLevel::Info, "running strategy %s (%d episodes)", strategy_name(strategy), episodes);
    result.outcomes.push_back(run_strategy(spec, strategy, episodes, seed, run_id));
  }

  double nomig_cost = 0.0;
  bool have_nomig = false;
  for (const auto& outcome : result.outcomes) {
    if (outcome.strategy == Strategy::NoMig) {
      nomig_cost = outcome.final_mean_cost;
      have_nomig = true;
    }
  }
  for (const auto& outcome : result.outcomes) {
    RunSummary::Entry entry;
    entry.strategy = strategy_name(outcome.strategy);
    entry.final_mean_cost = outcome.final_mean_cost;
    entry.final_mean_power = outcome.final_mean_power;
    entry.final_mean_delay = outcome.final_mean_delay;
    entry.improvement_vs_nomig_pct =
        have_nomig && nomig_cost != 0.0
            ? 100.0 * (nomig_cost - outcome.final_mean_cost) / nomig_cost
            : 0.0;
    result.summary.entries.push_back(entry);
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream metrics(out_dir + "/metrics.csv");
    metrics << metrics_csv_header() << "\n";
    for (const auto& outcome : result.outcomes)
      for (const auto& row : outcome.rows) metrics << metrics_csv_row(row) << "\n";
    std::ofstream summary(out_dir + "/summary.csv");
    summary << "strategy,final_mean_cost,final_mean_power,final_mean_delay,"
               "improvement_vs_nomig_pct\n";
    for (const auto& entry : result.summary.entries) {
      summary << entry.strategy << ',' << format_double(entry.final_mean_cost) << ','
              << format_double(entry.final_mean_power) << ','
              << format_double(entry.final_mean_delay) << ','
              << format_double(entry.improvement_vs_nomig_pct) << "\n";
    }
  }
  return result;
}

GapPoint evaluate_gap(const Environment& env, DdqnAgent& agent, int slots) {
  Environment probe = env;  // frozen continuation, training state untouched
  GapPoint point;
  for (int k = 0; k < slots; ++k) {
    OptimalPlan plan = exhaustive_optimal(probe, 1);
    StateVector state = probe.state();
    std::vector<uint8_t> mask = probe.legal_mask();
    int action = agent.greedy_action(state, mask);
    SlotMetrics m = probe.step(action);
    double agent_cost = -m.reward;
    point.mean_agent_cost += agent_cost;
    point.mean_optimal_cost += plan.cost;
    point.mean_gap += agent_cost - plan.cost;
  }
  point.mean_agent_cost /= slots;
  point.mean_optimal_cost /= slots;
  point.mean_gap /= slots;
  return point;
}

std::vector<GapPoint> optimality_gap_experiment(const ScenarioSpec& spec,
                                                const std::vector<int>& checkpoints,
                                                uint64_t seed, int gap_slots,
                                                const std::string& out_dir) {
  if (checkpoints.empty())
    throw std::invalid_argument("optimality_gap_experiment: no checkpoints given");
  std::vector<int> sorted = checkpoints;
  std::sort(sorted.begin(), sorted.end());

  EnvConfig cfg = build_env_config(spec);
  Environment env(cfg, seed, Strategy::Drlcm);
  AgentConfig agent_cfg = spec.agent;
  agent_cfg.episodes = sorted.back();
  ActionSpace space{static_cast<int>(cfg.caches.size()), env.num_fixed(),
                    static_cast<int>(cfg.low_catalog.size()),
                    static_cast<int>(cfg.high_catalog.size())};
  DdqnAgent agent(agent_cfg, static_cast<int>(env.state().values.size()), space, seed);

  std::vector<GapPoint> trace;
  size_t next_checkpoint = 0;
  const int slots = std::max(1, spec.agent.slots_per_episode);
  for (int episode = 0; episode < sorted.back(); ++episode) {
    agent.begin_episode();
    for (int t = 0; t < slots; ++t) agent.train_step(env);
    if (next_checkpoint < sorted.size() && episode + 1 == sorted[next_checkpoint]) {
      GapPoint point = evaluate_gap(env, agent, gap_slots);
      point.episode = episode + 1;
      trace.push_back(point);
      log_at(LogLevel::Info, "gap checkpoint %d: mean gap %.3f (agent %.3f, optimal %.3f)",
             point.episode, point.mean_gap, point.mean_agent_cost, point.mean_optimal_cost);
      ++next_checkpoint;
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/gap.csv");
    out << "episode,mean_gap,mean_agent_cost,mean_optimal_cost\n";
    for (const auto& point : trace) {
      out << point.episode << ',' << format_double(point.mean_gap) << ','
          << format_double(point.mean_agent_cost) << ','
          << format_double(point.mean_optimal_cost) << "\n";
    }
  }
  return trace;
}

}  // namespace ecdn
