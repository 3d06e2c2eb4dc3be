#include <doctest.h>

#include <cmath>

#include "cost_oracle.hpp"
#include "ecdn/cost.hpp"
#include "toy_gen.hpp"

using namespace ecdn;

namespace {

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

TEST_CASE("transmission_delay cases") {
  LinkModel links;
  links.data_rate = 10.0;
  links.propagation_delay = 0.005;
  links.cloud_delay_per_mb = 0.5;
  CHECK(transmission_delay(3, 3, 100.0, links) == 0.0);
  CHECK(transmission_delay(std::nullopt, 2, 1.0, links) == doctest::Approx(0.5));
  CHECK(transmission_delay(0, 1, 40.0, links) == doctest::Approx(4.005));
  CHECK_THROWS_AS(transmission_delay(0, 1, -1.0, links), std::invalid_argument);
}

TEST_CASE("zipf_request_rate") {
  SUBCASE("single content catalog gives beta") {
    DemandModel d{1.0, 7.0, 1, ZipfNormalization::ReciprocalRank};
    CHECK(zipf_request_rate(1, d) == doctest::Approx(7.0));
  }
  SUBCASE("two contents, alpha 1, paper normalizer") {
    DemandModel d{1.0, 1.0, 2, ZipfNormalization::ReciprocalRank};
    CHECK(d.normalizer() == doctest::Approx(1.5));
    CHECK(zipf_request_rate(1, d) == doctest::Approx(2.0 / 3.0));
    CHECK(zipf_request_rate(2, d) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("strictly decreasing in rank") {
    DemandModel d{0.8, 5.0, 10, ZipfNormalization::ReciprocalRank};
    for (int r = 1; r < 10; ++r) CHECK(zipf_request_rate(r, d) > zipf_request_rate(r + 1, d));
  }
  SUBCASE("standard normalization sums to beta") {
    DemandModel d{0.8, 5.0, 12, ZipfNormalization::Standard};
    double sum = 0.0;
    for (int r = 1; r <= 12; ++r) sum += zipf_request_rate(r, d);
    CHECK(sum == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("rank out of range") {
    DemandModel d{0.8, 5.0, 3, ZipfNormalization::ReciprocalRank};
    CHECK_THROWS_AS(zipf_request_rate(0, d), std::out_of_range);
    CHECK_THROWS_AS(zipf_request_rate(4, d), std::out_of_range);
  }
}

TEST_CASE("migration_cost_slot") {
  std::vector<EdgeCache> caches(2);
  caches[0].id = 0;
  caches[0].kind = CacheKind::Mobile;
  caches[0].coverage = {{0, 0}, 10.0};
  caches[0].kinematics.position = {0, 0};
  caches[1].id = 1;
  caches[1].kind = CacheKind::Mobile;
  caches[1].coverage = {{4, 0}, 10.0};
  caches[1].kinematics.position = {4, 0};
  caches[0].storage_mb = caches[1].storage_mb = 700;
  caches[0].processing_units = caches[1].processing_units = 1;
  caches[0].units_per_request = caches[1].units_per_request = 0.2;
  HopTable hops = hop_distances(caches);
  CostParameters params = CostParameters::uniform(2, 2.0, 2.0);
  params.bandwidth_cost_per_mb_hop = 3.0;

  SUBCASE("empty log") {
    MigrationCost c = migration_cost_slot({}, params, hops, caches);
    CHECK(c.c1 == 0.0);
    CHECK(c.c2 == 0.0);
    CHECK(c.c3 == 0.0);
  }
  SUBCASE("one 100 MB transfer over one hop") {
    TransferLog log{{TransferRecord::Kind::Download, Priority::Low, 0, 1, 0, 100.0}};
    MigrationCost c = migration_cost_slot(log, params, hops, caches);
    CHECK(c.c1 == doctest::Approx(200.0));
    CHECK(c.c2 == doctest::Approx(200.0));
    CHECK(c.c3 == doctest::Approx(300.0));
  }
  SUBCASE("eviction costs nothing") {
    TransferLog log{{TransferRecord::Kind::Eviction, Priority::Low, 0, 1, std::nullopt, 100.0}};
    MigrationCost c = migration_cost_slot(log, params, hops, caches);
    CHECK(c.total() == 0.0);
  }
  SUBCASE("cloud download has no upload or bandwidth component") {
    TransferLog log{{TransferRecord::Kind::Download, Priority::Low, 0, 1, std::nullopt, 100.0}};
    MigrationCost c = migration_cost_slot(log, params, hops, caches);
    CHECK(c.c1 == 0.0);
    CHECK(c.c2 == doctest::Approx(200.0));
    CHECK(c.c3 == 0.0);
  }
  SUBCASE("self transfer contributes no bandwidth cost") {
    TransferLog log{{TransferRecord::Kind::Download, Priority::Low, 0, 1, 1, 100.0}};
    MigrationCost c = migration_cost_slot(log, params, hops, caches);
    CHECK(c.c3 == 0.0);
  }
}

TEST_CASE("accumulate_phi recurrence") {
  CostWeights w;
  SlotCost prev;
  prev.phi_cumulative = 1000.0;
  SUBCASE("all zero leaves phi unchanged") {
    SlotCost next = accumulate_phi(prev, {}, 0.0, 0.0, w);
    CHECK(next.phi_cumulative == 1000.0);
  }
  SUBCASE("worked example") {
    MigrationCost m{100.0, 60.0, 40.0};  // total 200
    SlotCost next = accumulate_phi(prev, m, 100.0, 50.0, w);
    CHECK(next.phi_cumulative == doctest::Approx(1350.0));
  }
  SUBCASE("zero weights freeze phi") {
    CostWeights zero{0, 0, 0};
    MigrationCost m{100.0, 60.0, 40.0};
    SlotCost next = accumulate_phi(prev, m, 123.0, 456.0, zero);
    CHECK(next.phi_cumulative == 1000.0);
  }
}

TEST_CASE("low_priority_access_cost basics") {
  // One fixed holder at a road, one mobile requester inside its coverage.
  oracle::Snapshot s;
  s.grid = RoadGrid{2, 500.0};
  s.turns = TurnPolicy{0.5, 0.25, 0.25};
  s.t_cap = 30.0;
  s.links = LinkModel{10.0, 0.0, 0.5};
  EdgeCache fixed;
  fixed.id = 0;
  fixed.kind = CacheKind::FixedStraight;
  fixed.storage_mb = 1500;
  fixed.processing_units = 4;
  fixed.units_per_request = 0.2;
  fixed.coverage = {{250.0, 500.0}, 60.0};
  EdgeCache mobile;
  mobile.id = 1;
  mobile.kind = CacheKind::Mobile;
  mobile.storage_mb = 700;
  mobile.processing_units = 1;
  mobile.units_per_request = 0.2;
  mobile.coverage = {{250.0, 500.0}, 10.0};
  mobile.kinematics.position = {250.0, 500.0};
  mobile.kinematics.speed = 8.3333;
  mobile.kinematics.heading = Heading::East;
  s.caches = {fixed, mobile};
  s.low = {{0, Priority::Low, 50.0, 1}};
  s.high = {{0, Priority::High, 50.0, 0}};
  s.placement = PlacementState(2, 1, 1, 1);
  s.params = CostParameters::uniform(2, 2.0, 2.0);
  s.params.low_delay_cost = 5.0;

  HopTable hops = hop_distances(s.caches);
  NetworkView view{s.caches, s.low, s.high, s.links, hops, {s.grid, s.turns, s.t_cap}};

  SUBCASE("no requests cost nothing") {
    RequestBatch empty;
    AccessReport r = low_priority_access_cost(s.placement, empty, s.params, view);
    CHECK(r.cost == 0.0);
    CHECK(r.requests == 0);
  }
  SUBCASE("local serve has zero delay cost") {
    s.placement.y_at(1, 0) = 1;
    s.placement.z_at(0, 1, 1) = 1;
    RequestBatch batch;
    batch.items.push_back({0, 1, 1});
    AccessReport r = low_priority_access_cost(s.placement, batch, s.params, view);
    CHECK(r.cost == 0.0);
    CHECK(r.cloud_fetches == 0);
  }
  SUBCASE("no holder anywhere falls back to the cloud at gamma*size*d_inf") {
    RequestBatch batch;
    batch.items.push_back({0, 1, 1});
    AccessReport r = low_priority_access_cost(s.placement, batch, s.params, view);
    CHECK(r.cost == doctest::Approx(125.0));  // 5 * 50 * 0.5
    CHECK(r.cloud_fetches == 1);
  }
  SUBCASE("allowance cap sends the overflow to the cloud") {
    s.placement.y_at(1, 0) = 1;
    s.placement.z_at(0, 1, 1) = 1;
    RequestBatch batch;
    batch.items.push_back({0, 1, 3});
    AccessReport r = low_priority_access_cost(s.placement, batch, s.params, view);
    CHECK(r.requests == 3);
    CHECK(r.cloud_fetches == 2);
    CHECK(r.cost == doctest::Approx(2 * 125.0));
  }
}

TEST_CASE("high_priority_delivery_cost basics") {
  oracle::Snapshot s;
  s.grid = RoadGrid{2, 500.0};
  s.turns = TurnPolicy{0.5, 0.25, 0.25};
  s.t_cap = 30.0;
  s.links = LinkModel{10.0, 0.0, 0.5};
  EdgeCache fixed;
  fixed.id = 0;
  fixed.kind = CacheKind::FixedStraight;
  fixed.storage_mb = 1500;
  fixed.processing_units = 4;
  fixed.units_per_request = 0.2;
  fixed.coverage = {{250.0, 500.0}, 60.0};
  EdgeCache mobile;
  mobile.id = 1;
  mobile.kind = CacheKind::Mobile;
  mobile.storage_mb = 700;
  mobile.processing_units = 1;
  mobile.units_per_request = 0.2;
  mobile.coverage = {{250.0, 500.0}, 10.0};
  mobile.kinematics.position = {250.0, 500.0};
  mobile.kinematics.speed = 6.0;  // sojourn 10 s over the 60 m chord
  mobile.kinematics.heading = Heading::East;
  s.caches = {fixed, mobile};
  s.low = {{0, Priority::Low, 50.0, 1}};
  s.high = {{0, Priority::High, 100.0, 0}};
  s.placement = PlacementState(2, 1, 1, 1);
  s.dominating.members = {1};
  s.params = CostParameters::uniform(2, 2.0, 2.0);
  s.params.high_delay_cost = 10.0;

  HopTable hops = hop_distances(s.caches);
  NetworkView view{s.caches, s.low, s.high, s.links, hops, {s.grid, s.turns, s.t_cap}};

  SUBCASE("no arrivals cost nothing") {
    DeliveryReport r =
        high_priority_delivery_cost(s.placement, s.dominating, {}, s.params, view);
    CHECK(r.cost == 0.0);
  }
  SUBCASE("full delivery from a covering fixed cache") {
    s.placement.x_at(0, 0) = 1;
    DeliveryReport r =
        high_priority_delivery_cost(s.placement, s.dominating, {0}, s.params, view);
    // sojourn 10 s at 10 MB/s covers the full 100 MB; delay 100/10 = 10.
    CHECK(r.cost == doctest::Approx(100.0));
    CHECK(r.cloud_fetches == 0);
  }
  SUBCASE("out of all fixed coverage means full cloud delivery") {
    s.placement.x_at(0, 0) = 1;
    s.caches[1].kinematics.position = {250.0, 1000.0};
    s.caches[1].coverage.center = {250.0, 1000.0};
    DeliveryReport r =
        high_priority_delivery_cost(s.placement, s.dominating, {0}, s.params, view);
    CHECK(r.cost == doctest::Approx(10.0 * 100.0 * 0.5));  // Psi * size * d_inf
    CHECK(r.cloud_fetches == 1);
  }
}

TEST_CASE("cost scaling and decomposition invariants") {
  RngStream rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    oracle::Snapshot s = oracle::make_toy_snapshot(rng);
    HopTable hops = hop_distances(s.caches);
    NetworkView view{s.caches, s.low, s.high, s.links, hops, {s.grid, s.turns, s.t_cap}};

    AccessReport access = low_priority_access_cost(s.placement, s.requests, s.params, view);
    DeliveryReport delivery = high_priority_delivery_cost(s.placement, s.dominating, s.arrivals,
                                                          s.params, view);
    CHECK(access.cost >= 0.0);
    CHECK(delivery.cost >= 0.0);

    // Scaling every price by k scales every cost by exactly k.
    const double k = 3.5;
    oracle::Snapshot scaled = s;
    scaled.params.bandwidth_cost_per_mb_hop *= k;
    scaled.params.low_delay_cost *= k;
    scaled.params.high_delay_cost *= k;
    for (auto& g : scaled.params.upload_cost_per_mb) g *= k;
    for (auto& p : scaled.params.download_cost_per_mb) p *= k;
    AccessReport access_k =
        low_priority_access_cost(scaled.placement, scaled.requests, scaled.params, view);
    DeliveryReport delivery_k = high_priority_delivery_cost(
        scaled.placement, scaled.dominating, scaled.arrivals, scaled.params, view);
    CHECK(access_k.cost == doctest::Approx(k * access.cost).epsilon(1e-12));
    CHECK(delivery_k.cost == doctest::Approx(k * delivery.cost).epsilon(1e-12));

    // Weighted slot decomposition.
    CostWeights w{0.7, 1.3, 2.1};
    MigrationCost mig{12.0, 8.0, 5.0};
    SlotCost acc = accumulate_phi(SlotCost{}, mig, access.cost, delivery.cost, w);
    double direct = w.migration * mig.total() + w.access * access.cost + w.delivery * delivery.cost;
    CHECK(rel_diff(acc.phi_cumulative, direct) < 1e-9);
  }
}

TEST_CASE("cost module matches the independent equation oracle on toy snapshots") {
  RngStream rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    oracle::Snapshot s = oracle::make_toy_snapshot(rng);
    HopTable hops = hop_distances(s.caches);
    NetworkView view{s.caches, s.low, s.high, s.links, hops, {s.grid, s.turns, s.t_cap}};

    AccessReport access = low_priority_access_cost(s.placement, s.requests, s.params, view);
    double access_oracle = oracle::access_cost_eq_ca(s, hops);
    CHECK(rel_diff(access.cost, access_oracle) < 1e-9);

    DeliveryReport delivery = high_priority_delivery_cost(s.placement, s.dominating, s.arrivals,
                                                          s.params, view);
    double delivery_oracle = oracle::delivery_cost_eq10_13(s);
    CHECK(rel_diff(delivery.cost, delivery_oracle) < 1e-9);

    // Random placement delta, both accountings over the same realized log.
    PlacementState scratch = s.placement;
    std::vector<PlacementFlip> flips;
    for (int f = 0; f < 3; ++f) {
      if (rng.uniform01() < 0.7) {
        flips.push_back({PlacementFlip::Matrix::Y, rng.uniform_int(scratch.num_caches),
                         rng.uniform_int(scratch.num_low)});
      } else {
        flips.push_back({PlacementFlip::Matrix::X, rng.uniform_int(scratch.num_fixed),
                         rng.uniform_int(scratch.num_high)});
      }
    }
    DeltaContext dctx{s.caches, s.low, s.high, hops};
    TransferLog log = apply_placement_delta(scratch, flips, dctx);
    MigrationCost mig = migration_cost_slot(log, s.params, hops, s.caches);
    oracle::MigrationTotals totals = oracle::migration_eq2_5(s, log, hops);
    CHECK(rel_diff(mig.c1, totals.c1) < 1e-9);
    CHECK(rel_diff(mig.c2, totals.c2) < 1e-9);
    CHECK(rel_diff(mig.c3, totals.c3) < 1e-9);
  }
}
