#include "ecdn/mobility.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecdn {

namespace {

constexpr double kRoadTol = 1e-6;

int heading_axis(Heading h) {
  return (h == Heading::East || h == Heading::West) ? 0 : 1;
}

double axis_sign(Heading h) {
  return (h == Heading::East || h == Heading::North) ? 1.0 : -1.0;
}

double& coord(Vec2& v, int axis) { return axis == 0 ? v.x : v.y; }
double coord(const Vec2& v, int axis) { return axis == 0 ? v.x : v.y; }

// Distance to the nearest road line for a coordinate.
double off_line(double c, double cell) {
  double m = std::fmod(c, cell);
  if (m < 0) m += cell;
  return std::min(m, cell - m);
}

double snap_to_line(double c, double cell) {
  return std::round(c / cell) * cell;
}

}  // namespace

Vec2 heading_vector(Heading h) {
  switch (h) {
    case Heading::North: return {0, 1};
    case Heading::East: return {1, 0};
    case Heading::South: return {0, -1};
    case Heading::West: return {-1, 0};
  }
  return {1, 0};
}

Heading turn_left(Heading h) {
  switch (h) {
    case Heading::North: return Heading::West;
    case Heading::West: return Heading::South;
    case Heading::South: return Heading::East;
    case Heading::East: return Heading::North;
  }
  return h;
}

Heading turn_right(Heading h) {
  switch (h) {
    case Heading::North: return Heading::East;
    case Heading::East: return Heading::South;
    case Heading::South: return Heading::West;
    case Heading::West: return Heading::North;
  }
  return h;
}

double RoadGrid::wrap(double c) const {
  double s = span();
  double w = std::fmod(c, s);
  if (w < 0) w += s;
  // fmod can return s when c is a tiny negative number
  if (w >= s) w -= s;
  return w;
}

bool RoadGrid::on_road(Vec2 p, double tol) const {
  return off_line(p.x, cell_side) <= tol || off_line(p.y, cell_side) <= tol;
}

Heading resolve_turn(Heading h, const TurnPolicy& policy, double u) {
  if (u < policy.straight) return h;
  if (u < policy.straight + policy.left) return turn_left(h);
  return turn_right(h);
}

VehicleKinematics step_vehicle(const VehicleKinematics& kin, const RoadGrid& grid,
                               const TurnPolicy& policy, double dt, RngStream& rng) {
  if (dt <= 0) throw std::invalid_argument("step_vehicle: dt must be positive");
  if (!grid.on_road(kin.position, kRoadTol))
    throw std::runtime_error("step_vehicle: vehicle position is off-road");

  VehicleKinematics out = kin;
  int axis = heading_axis(out.heading);
  // Snap the cross coordinate exactly onto its road line to stop fp drift.
  int perp = 1 - axis;
  coord(out.position, perp) = grid.wrap(snap_to_line(coord(out.position, perp), grid.cell_side));

  double remaining = out.speed * dt;
  const double eps = 1e-9 * grid.cell_side;
  while (remaining > eps) {
    axis = heading_axis(out.heading);
    perp = 1 - axis;
    double sign = axis_sign(out.heading);
    double c = coord(out.position, axis);
    // Distance to the next intersection ahead. A vehicle standing exactly on
    // an intersection has already resampled there, so the next one is a full
    // cell away.
    double m = sign > 0 ? std::fmod(c, grid.cell_side) : std::fmod(-c, grid.cell_side);
    if (m < 0) m += grid.cell_side;
    double to_next = grid.cell_side - m;
    if (to_next <= eps) to_next = grid.cell_side;

    if (remaining < to_next - eps) {
      coord(out.position, axis) = grid.wrap(c + sign * remaining);
      remaining = 0;
      break;
    }
    // Arrive at the intersection, snap exactly, resample heading.
    coord(out.position, axis) = grid.wrap(snap_to_line(c + sign * to_next, grid.cell_side));
    remaining -= to_next;
    out.heading = resolve_turn(out.heading, policy, rng.uniform01());
  }
  return out;
}

bool coverage_contains(const CoverageDisc& disc, Vec2 point) {
  return distance(disc.center, point) <= disc.radius();
}

double chord_length(const CoverageDisc& disc, Vec2 point_on_line, Vec2 direction) {
  double len = norm(direction);
  if (len <= 0) return 0.0;
  Vec2 d = (1.0 / len) * direction;
  Vec2 w = point_on_line - disc.center;
  // |w + t d|^2 = r^2  ->  t^2 + 2 (w.d) t + |w|^2 - r^2 = 0
  double b = dot(w, d);
  double c = dot(w, w) - disc.radius() * disc.radius();
  double disc_val = b * b - c;
  if (disc_val <= 0) return 0.0;
  return 2.0 * std::sqrt(disc_val);
}

PathLengths road_path_lengths(const CoverageDisc& disc, Vec2 vehicle_pos,
                              Heading entry_heading, const RoadGrid& grid) {
  if (!grid.on_road(vehicle_pos, kRoadTol))
    throw std::invalid_argument("road_path_lengths: position is off-road");
  int axis = heading_axis(entry_heading);
  int perp = 1 - axis;
  double sign = axis_sign(entry_heading);
  double r = disc.radius();

  double d_perp = std::abs(coord(vehicle_pos, perp) - coord(disc.center, perp));
  if (d_perp > r)
    throw std::invalid_argument("road_path_lengths: vehicle road does not intersect the disc");

  double half = std::sqrt(std::max(0.0, r * r - d_perp * d_perp));
  PathLengths out;
  out.straight = std::min(2.0 * half, disc.diameter);
  out.plain = out.straight;

  // Chord endpoints along the travel axis; entry is the one behind the
  // vehicle with respect to its heading.
  double center_c = coord(disc.center, axis);
  double entry_c = center_c - sign * half;
  double exit_c = center_c + sign * half;

  // Nearest grid intersection strictly ahead of the entry point and inside
  // the disc. Road crossings sit at multiples of cell_side on this axis.
  double cell = grid.cell_side;
  double k = sign > 0 ? std::ceil(entry_c / cell - 1e-9) : std::floor(entry_c / cell + 1e-9);
  double cross_c = k * cell;
  // step toward exit until past it
  bool found = false;
  while (sign > 0 ? cross_c <= exit_c + 1e-9 : cross_c >= exit_c - 1e-9) {
    double t = (cross_c - entry_c) * sign;
    if (t > 1e-9 && t < (exit_c - entry_c) * sign - 1e-9) {
      found = true;
      break;
    }
    cross_c += sign * cell;
  }
  if (found) {
    Vec2 inter = vehicle_pos;
    coord(inter, axis) = cross_c;
    coord(inter, perp) = coord(vehicle_pos, perp);
    double entry_to_inter = std::abs(cross_c - entry_c);
    for (bool left : {true, false}) {
      Heading turned = left ? turn_left(entry_heading) : turn_right(entry_heading);
      Vec2 dir = heading_vector(turned);
      Vec2 w = inter - disc.center;
      double b = dot(w, dir);
      double c = dot(w, w) - r * r;
      double disc_val = b * b - c;
      double ahead = disc_val > 0 ? -b + std::sqrt(disc_val) : 0.0;
      double total = std::min(entry_to_inter + std::max(0.0, ahead), disc.diameter);
      (left ? out.left : out.right) = total;
    }
  }
  return out;
}

double sojourn_time(const SojournBody& covering, const SojournBody& moving,
                    const SojournContext& ctx) {
  if (!coverage_contains(covering.coverage, moving.position)) return 0.0;
  const double cap = ctx.t_cap;

  if (covering.kind == CacheMotion::Mobile) {
    Vec2 rel = moving.velocity - covering.velocity;
    double rel_speed = norm(rel);
    if (rel_speed < 1e-9) return cap;
    double path = chord_length(covering.coverage, moving.position, rel);
    return std::min(path / rel_speed, cap);
  }

  // Fixed covering cache: a static "moving" body never leaves.
  if (moving.speed < 1e-9) return cap;
  PathLengths lens =
      road_path_lengths(covering.coverage, moving.position, moving.heading, ctx.grid);
  double path = 0.0;
  if (covering.kind == CacheMotion::FixedStraight) {
    path = lens.straight;
  } else {
    path = ctx.turns.straight * lens.straight + ctx.turns.left * lens.left +
           ctx.turns.right * lens.right;
  }
  return std::min(path / moving.speed, cap);
}

MobilityTrace parse_mobility_trace(const std::string& text) {
  MobilityTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    double time_s, x, y, speed;
    int vehicle;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf", &time_s, &vehicle, &x, &y, &speed) != 5) {
      throw std::invalid_argument("mobility trace: bad record at line " + std::to_string(lineno));
    }
    int slot = static_cast<int>(std::llround(time_s));
    trace.slots[slot][vehicle] = MobilityTrace::Record{{x, y}, speed};
  }
  return trace;
}

MobilityTrace load_mobility_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("mobility trace: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mobility_trace(buf.str());
}

}  // namespace ecdn
