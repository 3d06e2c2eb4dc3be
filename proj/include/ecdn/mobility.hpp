#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ecdn/rng.hpp"

namespace ecdn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

enum class Heading { North, East, South, West };

Vec2 heading_vector(Heading h);
Heading turn_left(Heading h);
Heading turn_right(Heading h);

// Bidirectional road grid on a torus: n x n square cells of side cell_side,
// with roads along every grid line. Positions wrap at n*cell_side.
struct RoadGrid {
  int n = 4;
  double cell_side = 500.0;

  double span() const { return n * cell_side; }
  double wrap(double coord) const;
  bool on_road(Vec2 p, double tol = 1e-6) const;
};

struct TurnPolicy {
  double straight = 0.5;
  double left = 0.25;
  double right = 0.25;
};

struct VehicleKinematics {
  Vec2 position;
  double speed = 0.0;  // m/s
  Heading heading = Heading::East;
};

struct CoverageDisc {
  Vec2 center;
  double diameter = 0.0;
  double radius() const { return diameter / 2.0; }
};

struct PathLengths {
  double straight = 0.0;
  double left = 0.0;
  double right = 0.0;
  double plain = 0.0;
};

// Maps a uniform draw u in [0,1) onto a heading change: u < straight keeps
// the heading, u < straight+left turns left (+90 deg), otherwise right.
Heading resolve_turn(Heading h, const TurnPolicy& policy, double u);

// Advances a vehicle by speed*dt along the roads, resampling the heading at
// every intersection crossed. Positions wrap at the grid boundary.
// Throws std::runtime_error if the position is not on a road line.
VehicleKinematics step_vehicle(const VehicleKinematics& kin, const RoadGrid& grid,
                               const TurnPolicy& policy, double dt, RngStream& rng);

// Closed-disc membership: distance(center, point) <= diameter/2.
bool coverage_contains(const CoverageDisc& disc, Vec2 point);

// Length of the chord of `disc` along the line through `point_on_line` in
// `direction`. Zero when the line misses the disc.
double chord_length(const CoverageDisc& disc, Vec2 point_on_line, Vec2 direction);

// Road-path lengths inside a coverage disc for a vehicle at vehicle_pos
// heading entry_heading. `straight` is the chord of the vehicle's road;
// left/right are entry-to-intersection plus the turned chord remainder when
// the nearest intersection ahead lies inside the disc (0 otherwise). All
// results are clamped to the disc diameter.
// Throws std::invalid_argument when the vehicle's road misses the disc or
// the position is off-road.
PathLengths road_path_lengths(const CoverageDisc& disc, Vec2 vehicle_pos,
                              Heading entry_heading, const RoadGrid& grid);

enum class CacheMotion { FixedStraight, FixedIntersection, Mobile };

// Geometric/kinematic view of a cache node for sojourn-time purposes.
struct SojournBody {
  CacheMotion kind = CacheMotion::Mobile;
  CoverageDisc coverage;
  Vec2 position;
  Vec2 velocity;  // zero for fixed caches
  Heading heading = Heading::East;
  double speed = 0.0;
};

struct SojournContext {
  RoadGrid grid;
  TurnPolicy turns;
  double t_cap = 1.0;  // cap for degenerate relative speeds and static pairs
};

// Time `moving` dwells inside `covering`'s disc. Zero when outside; both
// mobile -> chord along the relative motion direction over the relative
// speed; fixed covering a straight segment -> straight chord over speed;
// fixed covering an intersection -> turn-probability-weighted path over
// speed. Degenerate speeds and static pairs return t_cap; all results are
// capped at t_cap.
double sojourn_time(const SojournBody& covering, const SojournBody& moving,
                    const SojournContext& ctx);

// Optional mobility trace: lines "time_s,vehicle_id,x_m,y_m,speed_mps".
// When a trace is supplied the simulator uses recorded positions instead of
// step_vehicle.
struct MobilityTrace {
  struct Record {
    Vec2 position;
    double speed = 0.0;
  };
  // slot -> vehicle id -> record
  std::map<int, std::map<int, Record>> slots;

  bool has_slot(int slot) const { return slots.count(slot) > 0; }
};

MobilityTrace parse_mobility_trace(const std::string& text);
MobilityTrace load_mobility_trace(const std::string& path);

}  // namespace ecdn
