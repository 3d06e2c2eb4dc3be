#pragma once

// Small scenario fixtures shared by the environment/agent/harness tests.

#include "ecdn/scenario.hpp"

namespace ecdn::fixtures {

// 2 fixed + 2 mobile caches on a 2x2 grid with a small catalog; the scale
// used by oracle-backed checks.
inline ScenarioSpec small_scenario() {
  ScenarioSpec spec;
  spec.grid_n = 2;
  spec.fixed_count = 2;
  spec.mobile_count = 2;
  spec.low_count = 3;
  spec.high_count = 1;
  spec.initially_full_mobiles = 2;
  spec.initial_targets = 2;
  spec.request_rate = 6.0;
  spec.high_arrival_rate = 1.0;
  spec.agent.hidden_width = 16;
  spec.agent.slots_per_episode = 10;
  spec.agent.warmup_steps = 40;
  spec.agent.batch_size = 8;
  spec.agent.replay_capacity = 500;
  spec.agent.sync_period = 50;
  return spec;
}

// Mid-size scenario for behavioral checks (6 fixed + 10 mobile, default
// catalog).
inline ScenarioSpec default_scenario() { return ScenarioSpec{}; }

}  // namespace ecdn::fixtures
