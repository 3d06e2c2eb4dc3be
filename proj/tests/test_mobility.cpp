#include <doctest.h>

#include <cmath>

#include "ecdn/mobility.hpp"

using namespace ecdn;

namespace {

// Independent chord oracle: solve |p + t d - c|^2 = r^2 and measure the root
// separation.
double chord_by_quadratic(const CoverageDisc& disc, Vec2 point, Vec2 dir) {
  double len = norm(dir);
  Vec2 d = (1.0 / len) * dir;
  Vec2 w = point - disc.center;
  double a = 1.0;
  double b = 2.0 * dot(w, d);
  double c = dot(w, w) - disc.radius() * disc.radius();
  double det = b * b - 4 * a * c;
  if (det <= 0) return 0.0;
  double t1 = (-b - std::sqrt(det)) / 2.0;
  double t2 = (-b + std::sqrt(det)) / 2.0;
  return t2 - t1;
}

RoadGrid grid4() { return RoadGrid{4, 500.0}; }

}  // namespace

TEST_CASE("coverage_contains closed-disc rule") {
  CoverageDisc disc{{10.0, 20.0}, 8.0};
  CHECK(coverage_contains(disc, {10.0, 20.0}));        // center
  CHECK(coverage_contains(disc, {14.0, 20.0}));        // exactly r
  CHECK_FALSE(coverage_contains(disc, {18.0, 20.0}));  // exactly diameter away
  CHECK_FALSE(coverage_contains(disc, {14.0 + 1e-9, 20.0}));
}

TEST_CASE("turn mapping intervals") {
  TurnPolicy policy{0.5, 0.25, 0.25};
  CHECK(resolve_turn(Heading::North, policy, 0.0) == Heading::North);
  CHECK(resolve_turn(Heading::North, policy, 0.49) == Heading::North);
  CHECK(resolve_turn(Heading::North, policy, 0.6) == Heading::West);   // left = +90 deg
  CHECK(resolve_turn(Heading::North, policy, 0.80) == Heading::East);  // right
  CHECK(resolve_turn(Heading::East, policy, 0.6) == Heading::North);
}

TEST_CASE("step_vehicle mid-segment displacement") {
  RngStream rng(1);
  VehicleKinematics kin{{100.0, 500.0}, 30.0 / 3.6, Heading::East};
  VehicleKinematics out = step_vehicle(kin, grid4(), TurnPolicy{}, 1.0, rng);
  CHECK(out.heading == Heading::East);
  CHECK(out.position.x == doctest::Approx(100.0 + 30.0 / 3.6).epsilon(1e-12));
  CHECK(out.position.x == doctest::Approx(108.33).epsilon(1e-3));
  CHECK(out.position.y == doctest::Approx(500.0));
}

TEST_CASE("step_vehicle requires an on-road position") {
  RngStream rng(1);
  VehicleKinematics kin{{100.0, 123.0}, 5.0, Heading::East};
  CHECK_THROWS_AS(step_vehicle(kin, grid4(), TurnPolicy{}, 1.0, rng), std::runtime_error);
}

TEST_CASE("step_vehicle wraps on the torus") {
  RngStream rng(1);
  VehicleKinematics kin{{1990.0, 0.0}, 20.0, Heading::East};
  TurnPolicy always_straight{1.0, 0.0, 0.0};
  VehicleKinematics out = step_vehicle(kin, grid4(), always_straight, 1.0, rng);
  CHECK(out.position.x == doctest::Approx(10.0));
  CHECK(grid4().on_road(out.position));
}

TEST_CASE("step_vehicle stays on roads over long random runs") {
  RoadGrid grid = grid4();
  for (uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed);
    VehicleKinematics kin{{250.0, 1000.0}, 8.333, Heading::West};
    for (int i = 0; i < 2000; ++i) {
      double dt = 0.1 + 3.0 * rng.uniform01();
      kin = step_vehicle(kin, grid, TurnPolicy{}, dt, rng);
      REQUIRE(grid.on_road(kin.position, 1e-6));
    }
  }
}

TEST_CASE("same seed gives an identical trajectory") {
  auto run = [](uint64_t seed) {
    RngStream rng(seed);
    VehicleKinematics kin{{0.0, 500.0}, 8.333, Heading::East};
    std::vector<double> xs;
    for (int i = 0; i < 200; ++i) {
      kin = step_vehicle(kin, grid4(), TurnPolicy{}, 1.7, rng);
      xs.push_back(kin.position.x);
      xs.push_back(kin.position.y);
    }
    return xs;
  };
  CHECK(run(42) == run(42));
  CHECK(run(42) != run(43));
}

TEST_CASE("turn frequencies converge to the policy") {
  TurnPolicy policy{0.5, 0.25, 0.25};
  RngStream rng(7);
  int straight = 0, left = 0, right = 0;
  const int n = 100000;
  Heading h = Heading::North;
  for (int i = 0; i < n; ++i) {
    Heading next = resolve_turn(h, policy, rng.uniform01());
    if (next == h)
      ++straight;
    else if (next == turn_left(h))
      ++left;
    else
      ++right;
    h = next;
  }
  CHECK(std::abs(straight / double(n) - 0.5) < 0.01);
  CHECK(std::abs(left / double(n) - 0.25) < 0.01);
  CHECK(std::abs(right / double(n) - 0.25) < 0.01);
}

TEST_CASE("road_path_lengths") {
  RoadGrid grid = grid4();

  SUBCASE("road through the center, no intersection inside") {
    CoverageDisc disc{{250.0, 500.0}, 60.0};  // mid-segment on y=500
    PathLengths lens = road_path_lengths(disc, {250.0, 500.0}, Heading::East, grid);
    CHECK(lens.straight == doctest::Approx(60.0));
    CHECK(lens.left == 0.0);
    CHECK(lens.right == 0.0);
  }

  SUBCASE("offset road chord matches the quadratic oracle") {
    // Disc centered off the road y=500 by d=20.
    CoverageDisc disc{{250.0, 520.0}, 80.0};
    PathLengths lens = road_path_lengths(disc, {250.0, 500.0}, Heading::East, grid);
    double expect = 2.0 * std::sqrt(40.0 * 40.0 - 20.0 * 20.0);
    CHECK(lens.straight == doctest::Approx(expect).epsilon(1e-12));
    CHECK(lens.straight ==
          doctest::Approx(chord_by_quadratic(disc, {250.0, 500.0}, {1.0, 0.0})).epsilon(1e-12));
  }

  SUBCASE("intersection at the disc center") {
    CoverageDisc disc{{500.0, 500.0}, 60.0};
    PathLengths lens = road_path_lengths(disc, {480.0, 500.0}, Heading::East, grid);
    CHECK(lens.straight == doctest::Approx(60.0));
    CHECK(lens.left == doctest::Approx(60.0));  // entry->center + center->rim
    CHECK(lens.right == doctest::Approx(60.0));
  }

  SUBCASE("disc missed by the vehicle road") {
    CoverageDisc disc{{250.0, 600.0}, 60.0};
    CHECK_THROWS_AS(road_path_lengths(disc, {250.0, 500.0}, Heading::East, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("sojourn_time cases") {
  RoadGrid grid = grid4();
  SojournContext ctx{grid, TurnPolicy{0.5, 0.25, 0.25}, 100.0};

  SUBCASE("outside coverage is zero") {
    SojournBody covering{CacheMotion::Mobile, {{0, 0}, 10.0}, {0, 0}, {0, 0}, Heading::East, 0};
    SojournBody moving{CacheMotion::Mobile, {{100, 0}, 10.0}, {100, 0}, {2, 0}, Heading::East, 2};
    CHECK(sojourn_time(covering, moving, ctx) == 0.0);
  }

  SUBCASE("case 1: both mobile, relative chord over relative speed") {
    // Moving body at the covering disc's center, chord = diameter = 8.
    SojournBody covering{CacheMotion::Mobile, {{0, 0}, 8.0}, {0, 0}, {0, 0}, Heading::East, 0};
    SojournBody moving{CacheMotion::Mobile, {{0, 0}, 1.0}, {0, 0}, {2, 0}, Heading::East, 2};
    CHECK(sojourn_time(covering, moving, ctx) == doctest::Approx(4.0));
  }

  SUBCASE("case 1 equal velocities capped") {
    SojournBody covering{CacheMotion::Mobile, {{0, 0}, 8.0}, {0, 0}, {3, 0}, Heading::East, 3};
    SojournBody moving{CacheMotion::Mobile, {{1, 0}, 1.0}, {1, 0}, {3, 0}, Heading::East, 3};
    CHECK(sojourn_time(covering, moving, ctx) == doctest::Approx(100.0));
  }

  SUBCASE("case 2: fixed straight-segment coverage") {
    SojournBody covering{CacheMotion::FixedStraight,
                         {{250.0, 500.0}, 60.0},
                         {250.0, 500.0},
                         {0, 0},
                         Heading::East,
                         0};
    SojournBody moving{CacheMotion::Mobile,
                       {{250.0, 500.0}, 10.0},
                       {250.0, 500.0},
                       {8.3333, 0},
                       Heading::East,
                       8.3333};
    CHECK(sojourn_time(covering, moving, ctx) == doctest::Approx(60.0 / 8.3333));

    // Doubling the speed halves the sojourn exactly (pre-cap).
    SojournBody faster = moving;
    faster.speed = 2 * moving.speed;
    faster.velocity = {2 * 8.3333, 0};
    CHECK(sojourn_time(covering, faster, ctx) ==
          doctest::Approx(0.5 * sojourn_time(covering, moving, ctx)));
  }

  SUBCASE("case 3: fixed intersection coverage, turn-weighted path") {
    // Geometry chosen so r_straight = 60 and r_left = r_right = 40:
    // intersection at (500, 500), disc center offset so that
    // entry->intersection + turned chord = 40.
    double a = (10.0 - std::sqrt(100.0 + 1600.0)) / 2.0;  // -15.616
    CoverageDisc disc{{500.0 - a, 500.0}, 60.0};
    SojournBody covering{CacheMotion::FixedIntersection, disc, disc.center, {0, 0}, Heading::East,
                         0};
    double v = 30.0 / 3.6;
    SojournBody moving{
        CacheMotion::Mobile, {{505.0, 500.0}, 10.0}, {505.0, 500.0}, {v, 0}, Heading::East, v};
    // (0.5*60 + 0.25*40 + 0.25*40) / (30/3.6) = 50 / 8.333 = 6.0
    CHECK(sojourn_time(covering, moving, ctx) == doctest::Approx(6.0).epsilon(1e-9));
  }

  SUBCASE("positive and capped whenever inside") {
    SojournContext tight = ctx;
    tight.t_cap = 2.0;
    SojournBody covering{CacheMotion::FixedStraight,
                         {{250.0, 500.0}, 60.0},
                         {250.0, 500.0},
                         {0, 0},
                         Heading::East,
                         0};
    SojournBody moving{CacheMotion::Mobile,
                       {{250.0, 500.0}, 10.0},
                       {250.0, 500.0},
                       {8.3333, 0},
                       Heading::East,
                       8.3333};
    double t = sojourn_time(covering, moving, tight);
    CHECK(t > 0.0);
    CHECK(t <= 2.0);
  }
}

TEST_CASE("mobility trace parsing") {
  MobilityTrace trace = parse_mobility_trace(
      "# slot,vehicle,x,y,speed\n"
      "1,2,100.0,500.0,8.3\n"
      "1,3,500.0,250.0,8.3\n"
      "2,2,108.3,500.0,8.3\n");
  REQUIRE(trace.has_slot(1));
  REQUIRE(trace.has_slot(2));
  CHECK(trace.slots.at(1).at(2).position.x == doctest::Approx(100.0));
  CHECK(trace.slots.at(2).at(2).position.x == doctest::Approx(108.3));
  CHECK_THROWS_AS(parse_mobility_trace("garbage line\n"), std::invalid_argument);
}
