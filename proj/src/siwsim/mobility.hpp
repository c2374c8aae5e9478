#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "siwsim/errors.hpp"
#include "siwsim/rng.hpp"

namespace siwsim::mobility {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// Piecewise-linear path through timed waypoints. Positions clamp to the
// first/last waypoint outside the recorded span.
class Trajectory {
 public:
  void add(double t, Position p);
  Position at(double t) const;
  const std::vector<std::pair<double, Position>>& waypoints() const {
    return waypoints_;
  }

 private:
  std::vector<std::pair<double, Position>> waypoints_;
};

struct FieldTrajectories {
  double width_m = 0.0;
  double height_m = 0.0;
  std::vector<Trajectory> nodes;
};

struct ManhattanParams {
  double width_m = 820.0;
  double height_m = 620.0;
  int nodes = 15;
  // Streets snap to an even grid: the requested spacing is rounded to a
  // whole number of blocks so the grid tiles the field exactly.
  double street_spacing_m = 200.0;
  double speed_min_mps = 8.0;
  double speed_max_mps = 14.0;
  double pause_fraction = 0.25;
  double pause_max_s = 30.0;

  void validate() const;
};

// Random street-grid movement: nodes start at intersections, travel one
// block per leg at a per-leg speed, never reverse unless at a dead end, and
// sometimes pause at intersections. Consumes rng in node order, so results
// are a pure function of (params, duration, rng state).
FieldTrajectories generate_manhattan(const ManhattanParams& params,
                                     double duration_s, RngStream& rng);

// Trace file format:
//   # comment
//   bounds <width_m> <height_m>
//   <time_s> <node_id> <x_m> <y_m>
// Waypoint times must be strictly increasing per node, ids contiguous from
// zero, positions inside the bounds, and implied speeds at most
// max_speed_mps.
FieldTrajectories parse_trace(std::string_view text, const std::string& origin,
                              double max_speed_mps);
FieldTrajectories load_trace(const std::string& path, double max_speed_mps);
std::string serialize_trace(const FieldTrajectories& field);

}  // namespace siwsim::mobility
