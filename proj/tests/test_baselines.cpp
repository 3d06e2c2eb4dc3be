#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecdn/baselines.hpp"
#include "env_fixtures.hpp"

using namespace ecdn;

namespace {

// Environment with a target cache already packed, so eviction decisions are
// forced deterministically.
Environment packed_env(Strategy strategy, uint64_t seed = 101) {
  ScenarioSpec spec = fixtures::small_scenario();
  spec.high_arrival_rate = 2.0;
  EnvConfig cfg = build_env_config(spec);
  return Environment(cfg, seed, strategy);
}

}  // namespace

TEST_CASE("strategy names round trip") {
  for (Strategy s : {Strategy::Drlcm, Strategy::NoMig, Strategy::FirstFit, Strategy::BestFit,
                     Strategy::WorstFit, Strategy::Random}) {
    CHECK(strategy_from_name(strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(strategy_from_name("lfu"), std::invalid_argument);
}

TEST_CASE("baseline_decide") {
  Environment env = packed_env(Strategy::NoMig);
  RngStream rng(1);
  const auto& low = env.low_catalog();

  // Build a recency ranking by hand: content ids at target in LRU order.
  int target = env.targets().front();
  RecencyTracker tracker;
  tracker.reset(static_cast<int>(env.caches().size()), static_cast<int>(low.size()));
  std::vector<int> residents;
  for (int l = 0; l < static_cast<int>(low.size()); ++l)
    if (env.placement().y_at(target, l)) residents.push_back(l);

  SUBCASE("target with space yields no decisions") {
    Content tiny{0, Priority::High, 0.5, 0};
    if (env.free_storage_mb(target) >= 0.5) {
      auto out = baseline_decide(Strategy::NoMig, env, tiny, target, tracker, rng);
      CHECK(out.empty());
    }
  }

  SUBCASE("NoMig deletes the least recently used victims") {
    if (residents.empty()) return;
    for (size_t i = 0; i < residents.size(); ++i)
      tracker.touch(target, residents[i], 10 + static_cast<int>(i));
    Content incoming{0, Priority::High, env.free_storage_mb(target) + 1.0, 0};
    auto out = baseline_decide(Strategy::NoMig, env, incoming, target, tracker, rng);
    REQUIRE(out.size() >= 1);
    CHECK(out[0].victim == residents[0]);  // oldest access goes first
    CHECK_FALSE(out[0].destination.has_value());
    CHECK(out[0].source == target);
  }

  SUBCASE("LRU order respects the tracker with id tie-breaks") {
    if (residents.size() < 2) return;
    // Same timestamp everywhere: victims must come out in ascending id.
    for (int l : residents) tracker.touch(target, l, 5);
    double need = 0.0;
    for (int l : residents) need += low[l].size_mb;
    Content incoming{0, Priority::High, env.free_storage_mb(target) + need, 0};
    auto out = baseline_decide(Strategy::NoMig, env, incoming, target, tracker, rng);
    REQUIRE(out.size() == residents.size());
    std::vector<int> order;
    for (const auto& d : out) order.push_back(d.victim);
    std::vector<int> expected = residents;
    std::sort(expected.begin(), expected.end());
    CHECK(order == expected);
  }
}

TEST_CASE("destination selection follows each strategy's rule") {
  // Across random worlds, the first decision's destination must beat every
  // other feasible destination under the strategy's own criterion.
  for (uint64_t seed = 400; seed < 412; ++seed) {
    ScenarioSpec spec = fixtures::small_scenario();
    spec.mobile_count = 4;
    spec.low_count = 5;
    spec.initially_full_mobiles = 2;
    spec.initial_targets = 1;
    EnvConfig cfg = build_env_config(spec);
    Environment env(cfg, seed, Strategy::NoMig);
    int target = env.targets().front();
    const auto& placement = env.placement();
    bool target_holds = false;
    for (int l = 0; l < placement.num_low; ++l) target_holds |= placement.y_at(target, l) != 0;
    if (!target_holds) continue;

    RecencyTracker tracker;
    tracker.reset(static_cast<int>(env.caches().size()), placement.num_low);
    RngStream rng(seed);
    Content incoming{0, Priority::High, env.free_storage_mb(target) + 1.0, 0};

    for (Strategy s : {Strategy::FirstFit, Strategy::BestFit, Strategy::WorstFit}) {
      auto out = baseline_decide(s, env, incoming, target, tracker, rng);
      if (out.empty() || !out[0].destination.has_value()) continue;
      int dest = *out[0].destination;
      double dest_room = env.destination_headroom_mb(dest);
      double vsize = env.low_catalog()[out[0].victim].size_mb;
      REQUIRE(dest_room + 1e-9 >= vsize);
      for (int other = 0; other < static_cast<int>(env.caches().size()); ++other) {
        if (other == target || other == dest) continue;
        if (placement.y_at(other, out[0].victim)) continue;
        double room = env.destination_headroom_mb(other);
        if (room + 1e-9 < vsize) continue;
        if (s == Strategy::FirstFit) {
          int dh = env.hops().hops(target, dest);
          int oh = env.hops().hops(target, other);
          if (dh < 0) dh = 1 << 20;
          if (oh < 0) oh = 1 << 20;
          CHECK(dh <= oh);
        } else if (s == Strategy::BestFit) {
          CHECK(dest_room <= room + 1e-9);
        } else {
          CHECK(dest_room + 1e-9 >= room);
        }
      }
    }
  }
}

TEST_CASE("crafted headrooms reproduce the strategy picks") {
  // Target 3 holds a single 100 MB victim; destinations 0,1,2 offer
  // free spaces 150, 110, 400.
  std::vector<EdgeCache> caches(4);
  for (int i = 0; i < 4; ++i) {
    caches[i].id = i;
    caches[i].kind = CacheKind::Mobile;
    caches[i].storage_mb = 700.0;
    caches[i].processing_units = 1.0;
    caches[i].units_per_request = 0.2;
    caches[i].coverage = {{4.0 * i, 0.0}, 10.0};
    caches[i].kinematics.position = {4.0 * i, 0.0};
  }
  std::vector<Content> low{{0, Priority::Low, 100.0, 1}};
  PlacementState placement(4, 0, 1, 0);
  placement.y_at(3, 0) = 1;
  HopTable hops = hop_distances(caches);

  OverflowView view{placement, caches, low, hops, {150.0, 110.0, 400.0, 0.0}, 0.0};
  RecencyTracker tracker;
  tracker.reset(4, 1);
  RngStream rng(1);
  Content incoming{0, Priority::High, 100.0, 0};

  auto decide = [&](Strategy s) { return baseline_decide(s, view, incoming, 3, tracker, rng); };

  auto nomig = decide(Strategy::NoMig);
  REQUIRE(nomig.size() == 1);
  CHECK_FALSE(nomig[0].destination.has_value());

  auto bestfit = decide(Strategy::BestFit);
  REQUIRE(bestfit.size() == 1);
  REQUIRE(bestfit[0].destination.has_value());
  CHECK(*bestfit[0].destination == 1);  // 110 is the tightest feasible fit

  auto worstfit = decide(Strategy::WorstFit);
  REQUIRE(worstfit[0].destination.has_value());
  CHECK(*worstfit[0].destination == 2);  // 400 is the roomiest

  auto firstfit = decide(Strategy::FirstFit);
  REQUIRE(firstfit[0].destination.has_value());
  CHECK(*firstfit[0].destination == 2);  // nearest by hops: chain 3-2-1-0

  auto random_pick = decide(Strategy::Random);
  REQUIRE(random_pick[0].destination.has_value());
  CHECK(*random_pick[0].destination >= 0);
  CHECK(*random_pick[0].destination <= 2);

  // No feasible destination falls back to deletion.
  OverflowView cramped{placement, caches, low, hops, {50.0, 10.0, 99.0, 0.0}, 0.0};
  auto fallback = baseline_decide(Strategy::BestFit, cramped, incoming, 3, tracker, rng);
  REQUIRE(fallback.size() == 1);
  CHECK_FALSE(fallback[0].destination.has_value());
}

TEST_CASE("strategies free the needed bytes across random runs") {
  for (Strategy s : {Strategy::NoMig, Strategy::FirstFit, Strategy::BestFit, Strategy::WorstFit,
                     Strategy::Random}) {
    Environment env = packed_env(s, 300 + static_cast<uint64_t>(s));
    for (int t = 0; t < 40; ++t) {
      env.step_passive();
      // After each slot the pending batch must fit every target: validated
      // by the absence of 15d violations.
      auto violations = env.validate();
      REQUIRE(violations.empty());
    }
  }
}

TEST_CASE("frozen tape is placement independent") {
  ScenarioSpec spec = fixtures::small_scenario();
  EnvConfig cfg = build_env_config(spec);
  Environment a(cfg, 77, Strategy::NoMig);
  Environment b(cfg, 77, Strategy::BestFit);
  // advance differently
  for (int t = 0; t < 5; ++t) {
    a.step_passive();
    b.step_passive();
  }
  FrozenTape ta = record_tape(a, 3);
  FrozenTape tb = record_tape(b, 3);
  REQUIRE(ta.slots.size() == tb.slots.size());
  for (size_t k = 0; k < ta.slots.size(); ++k) {
    CHECK(ta.slots[k].pending_arrivals == tb.slots[k].pending_arrivals);
    REQUIRE(ta.slots[k].requests.items.size() == tb.slots[k].requests.items.size());
    for (size_t i = 0; i < ta.slots[k].requests.items.size(); ++i) {
      CHECK(ta.slots[k].requests.items[i].content == tb.slots[k].requests.items[i].content);
      CHECK(ta.slots[k].requests.items[i].origin == tb.slots[k].requests.items[i].origin);
      CHECK(ta.slots[k].requests.items[i].count == tb.slots[k].requests.items[i].count);
    }
    for (size_t c = 0; c < ta.slots[k].caches.size(); ++c) {
      CHECK(ta.slots[k].caches[c].position().x == tb.slots[k].caches[c].position().x);
      CHECK(ta.slots[k].caches[c].position().y == tb.slots[k].caches[c].position().y);
    }
  }
}

TEST_CASE("exhaustive_optimal") {
  ScenarioSpec spec = fixtures::small_scenario();
  spec.low_count = 2;
  spec.high_count = 1;
  EnvConfig cfg = build_env_config(spec);
  Environment env(cfg, 5, Strategy::Drlcm);

  SUBCASE("bound enforcement") {
    CHECK_THROWS_AS(exhaustive_optimal(env, 1, 16), std::runtime_error);
  }

  SUBCASE("optimal cost is a lower bound for every policy on the frozen slot") {
    OptimalPlan plan = exhaustive_optimal(env, 1);
    CHECK(plan.evaluated > 0);
    // NoOp policy on the identical frozen slot
    Environment probe = env;
    SlotMetrics m = probe.step(probe.noop_index());
    CHECK(plan.cost <= -m.reward + 1e-9);
    // A handful of random legal single actions
    RngStream rng(9);
    for (int k = 0; k < 10; ++k) {
      Environment p2 = env;
      auto mask = p2.legal_mask();
      std::vector<int> legal;
      for (size_t a = 0; a < mask.size(); ++a)
        if (mask[a]) legal.push_back(static_cast<int>(a));
      SlotMetrics mm = p2.step(legal[rng.uniform_int(static_cast<int>(legal.size()))]);
      CHECK(plan.cost <= -mm.reward + 1e-9);
    }
  }

  SUBCASE("matches a direct enumeration over y assignments on a tiny instance") {
    // Same search done inline over the tape scorer, confirming the argmin.
    OptimalPlan plan = exhaustive_optimal(env, 1);
    FrozenTape tape = record_tape(env, 1);
    const PlacementState& current = env.placement();
    double best = std::numeric_limits<double>::infinity();
    const int y_bits = current.num_caches * current.num_low;
    const int x_bits = current.num_fixed * current.num_high;
    for (uint64_t mask = 0; mask < (1ull << (y_bits + x_bits)); ++mask) {
      PlacementState cand(current.num_caches, current.num_fixed, current.num_low,
                          current.num_high);
      for (int b = 0; b < y_bits; ++b)
        if (mask & (1ull << b)) cand.y[b] = 1;
      for (int b = 0; b < x_bits; ++b)
        if (mask & (1ull << (y_bits + b))) cand.x[b] = 1;
      bool feasible = true;
      for (int i = 0; i < cand.num_caches && feasible; ++i) {
        double stored = cand.stored_low_mb(i, env.low_catalog());
        double cap = env.caches()[i].storage_mb;
        if (env.caches()[i].is_fixed())
          stored += cand.stored_high_mb(i, env.high_catalog());
        else if (env.is_target(i))
          cap -= env.pending_high_mb();
        if (stored > cap + 1e-9) feasible = false;
      }
      if (!feasible) continue;
      double cost = plan_cost_on_tape(env, tape, cand);
      if (cost < best) best = cost;
    }
    CHECK(plan.cost == doctest::Approx(best).epsilon(1e-9));
  }
}
