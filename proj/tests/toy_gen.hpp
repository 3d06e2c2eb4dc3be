#pragma once

// Randomized toy snapshots (<= 3 caches, <= 3 contents) shared by the cost
// equivalence tests and the acceptance suite.

#include "cost_oracle.hpp"
#include "ecdn/rng.hpp"

namespace ecdn::oracle {

inline Snapshot make_toy_snapshot(RngStream& rng) {
  Snapshot s;
  s.grid = RoadGrid{2, 500.0};
  s.turns = TurnPolicy{0.5, 0.25, 0.25};
  s.t_cap = 30.0;
  s.links.data_rate = 2.0 + rng.uniform_range(0.0, 8.0);
  s.links.propagation_delay = rng.uniform01() < 0.5 ? 0.0 : rng.uniform_range(0.0, 0.3);
  s.links.cloud_delay_per_mb = 0.5;

  int num_fixed = 1;
  int num_mobile = 1 + rng.uniform_int(2);
  int n = num_fixed + num_mobile;

  for (int f = 0; f < num_fixed; ++f) {
    EdgeCache c;
    c.id = f;
    c.kind = rng.uniform01() < 0.5 ? CacheKind::FixedIntersection : CacheKind::FixedStraight;
    c.storage_mb = 1500.0;
    c.processing_units = 4.0;
    c.units_per_request = 0.2;
    Vec2 pos = c.kind == CacheKind::FixedIntersection
                   ? Vec2{500.0, 500.0}
                   : Vec2{250.0 + rng.uniform_range(0.0, 100.0), 500.0};
    c.coverage = {pos, 60.0};
    s.caches.push_back(c);
  }
  for (int m = 0; m < num_mobile; ++m) {
    EdgeCache c;
    c.id = num_fixed + m;
    c.kind = CacheKind::Mobile;
    c.storage_mb = 700.0;
    c.processing_units = 1.0;
    c.units_per_request = 0.2;
    // On-road position: horizontal road y=500 or vertical x=500.
    bool horizontal = rng.uniform01() < 0.5;
    Vec2 pos = horizontal ? Vec2{rng.uniform_range(420.0, 580.0), 500.0}
                          : Vec2{500.0, rng.uniform_range(420.0, 580.0)};
    c.kinematics.position = pos;
    c.kinematics.speed = rng.uniform01() < 0.15 ? 0.0 : rng.uniform_range(4.0, 16.0);
    c.kinematics.heading = horizontal ? (rng.uniform01() < 0.5 ? Heading::East : Heading::West)
                                      : (rng.uniform01() < 0.5 ? Heading::North : Heading::South);
    c.coverage = {pos, 10.0 + rng.uniform_range(0.0, 60.0)};
    s.caches.push_back(c);
  }

  int num_low = 1 + rng.uniform_int(3);
  for (int l = 0; l < num_low; ++l)
    s.low.push_back({l, Priority::Low, rng.uniform_range(20.0, 120.0), l + 1});
  int num_high = 1 + rng.uniform_int(2);
  for (int h = 0; h < num_high; ++h)
    s.high.push_back({h, Priority::High, rng.uniform_range(20.0, 120.0), 0});

  s.placement = PlacementState(n, num_fixed, num_low, num_high);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < num_low; ++l) s.placement.y_at(i, l) = rng.uniform01() < 0.5 ? 1 : 0;
  for (int f = 0; f < num_fixed; ++f)
    for (int h = 0; h < num_high; ++h) s.placement.x_at(f, h) = rng.uniform01() < 0.6 ? 1 : 0;
  for (int l = 0; l < num_low; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s.placement.z_at(l, i, j) = rng.uniform01() < 0.4 ? rng.uniform_int(3) : 0;

  for (int l = 0; l < num_low; ++l)
    for (int j = 0; j < n; ++j)
      if (rng.uniform01() < 0.5)
        s.requests.items.push_back({l, j, 1 + rng.uniform_int(3)});

  int arrivals = rng.uniform_int(3);
  for (int a = 0; a < arrivals; ++a) s.arrivals.push_back(rng.uniform_int(num_high));

  for (int i = num_fixed; i < n; ++i)
    if (rng.uniform01() < 0.7) s.dominating.members.push_back(i);

  s.params = CostParameters::uniform(n, 2.0, 2.0);
  s.params.bandwidth_cost_per_mb_hop = 3.0;
  s.params.low_delay_cost = 5.0;
  s.params.high_delay_cost = 10.0;
  return s;
}

}  // namespace ecdn::oracle
