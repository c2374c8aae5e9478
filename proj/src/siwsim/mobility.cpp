#include "siwsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "siwsim/kvdoc.hpp"

namespace siwsim::mobility {

void Trajectory::add(double t, Position p) {
  if (!waypoints_.empty() && t <= waypoints_.back().first) {
    throw RuntimeFailure("trajectory waypoints must have increasing times");
  }
  waypoints_.emplace_back(t, p);
}

Position Trajectory::at(double t) const {
  if (waypoints_.empty()) {
    throw RuntimeFailure("trajectory has no waypoints");
  }
  if (t <= waypoints_.front().first) return waypoints_.front().second;
  if (t >= waypoints_.back().first) return waypoints_.back().second;
  auto it = std::upper_bound(
      waypoints_.begin(), waypoints_.end(), t,
      [](double value, const auto& wp) { return value < wp.first; });
  const auto& [t1, p1] = *std::prev(it);
  const auto& [t2, p2] = *it;
  double u = (t - t1) / (t2 - t1);
  return {p1.x + u * (p2.x - p1.x), p1.y + u * (p2.y - p1.y)};
}

void ManhattanParams::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0)) {
    throw ValidationError("mobility field dimensions must be positive");
  }
  if (nodes < 1) {
    throw ValidationError("mobility needs at least one node");
  }
  if (!(street_spacing_m > 0.0)) {
    throw ValidationError("street spacing must be positive");
  }
  if (!(speed_min_mps > 0.0) || !(speed_max_mps >= speed_min_mps)) {
    throw ValidationError("speed range must satisfy 0 < min <= max");
  }
  if (!(pause_fraction >= 0.0) || !(pause_fraction <= 1.0)) {
    throw ValidationError("pause fraction must lie in [0, 1]");
  }
  if (!(pause_max_s > 0.0)) {
    throw ValidationError("maximum pause must be positive");
  }
}

namespace {

// Street axes: +x, -x, +y, -y.
constexpr int kReverse[4] = {1, 0, 3, 2};

}  // namespace

FieldTrajectories generate_manhattan(const ManhattanParams& params,
                                     double duration_s, RngStream& rng) {
  params.validate();
  if (!(duration_s > 0.0)) {
    throw ValidationError("duration must be positive");
  }

  int nx = std::max(1, (int)std::lround(params.width_m / params.street_spacing_m));
  int ny = std::max(1, (int)std::lround(params.height_m / params.street_spacing_m));
  double sx = params.width_m / nx;
  double sy = params.height_m / ny;

  FieldTrajectories field;
  field.width_m = params.width_m;
  field.height_m = params.height_m;
  field.nodes.resize(params.nodes);

  for (int node = 0; node < params.nodes; ++node) {
    Trajectory& traj = field.nodes[node];
    int ix = (int)rng.uniform_int(nx + 1);
    int iy = (int)rng.uniform_int(ny + 1);
    double t = 0.0;
    traj.add(t, {ix * sx, iy * sy});

    int prev_dir = -1;
    while (t < duration_s) {
      int options[4];
      int count = 0;
      if (ix < nx) options[count++] = 0;
      if (ix > 0) options[count++] = 1;
      if (iy < ny) options[count++] = 2;
      if (iy > 0) options[count++] = 3;

      // Never double back mid-route; a dead end is the only exception.
      if (prev_dir >= 0) {
        int kept = 0;
        for (int i = 0; i < count; ++i) {
          if (options[i] != kReverse[prev_dir]) options[kept++] = options[i];
        }
        if (kept > 0) count = kept;
      }

      int dir = options[rng.uniform_int(count)];
      double leg = (dir < 2) ? sx : sy;
      double speed = rng.uniform(params.speed_min_mps, params.speed_max_mps);
      switch (dir) {
        case 0: ++ix; break;
        case 1: --ix; break;
        case 2: ++iy; break;
        case 3: --iy; break;
      }
      t += leg / speed;
      traj.add(t, {ix * sx, iy * sy});
      prev_dir = dir;

      if (t < duration_s && rng.uniform01() < params.pause_fraction) {
        // Pause length is uniform over (0, max]: never zero, so waypoint
        // times stay strictly increasing.
        t += params.pause_max_s * (1.0 - rng.uniform01());
        traj.add(t, {ix * sx, iy * sy});
      }
    }
  }
  return field;
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  std::ostringstream os;
  os << (origin.empty() ? "trace" : origin) << ":" << line << ": " << what;
  throw ValidationError(os.str());
}

}  // namespace

FieldTrajectories parse_trace(std::string_view text, const std::string& origin,
                              double max_speed_mps) {
  if (!(max_speed_mps > 0.0)) {
    throw ValidationError("maximum trace speed must be positive");
  }

  FieldTrajectories field;
  bool have_bounds = false;
  std::vector<std::vector<std::pair<double, Position>>> per_node;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream is(line);
    std::string first;
    if (!(is >> first)) continue;

    if (!have_bounds) {
      double w = 0.0, h = 0.0;
      std::string extra;
      if (first != "bounds" || !(is >> w >> h) || (is >> extra)) {
        fail(origin, line_no, "expected 'bounds <width> <height>' header");
      }
      if (!(w > 0.0) || !(h > 0.0)) {
        fail(origin, line_no, "bounds must be positive");
      }
      field.width_m = w;
      field.height_m = h;
      have_bounds = true;
      continue;
    }

    double t = 0.0, x = 0.0, y = 0.0;
    long id = -1;
    std::string extra;
    std::istringstream rec(line);
    if (!(rec >> t >> id >> x >> y) || (rec >> extra)) {
      fail(origin, line_no, "expected '<time> <node> <x> <y>', got '" + line + "'");
    }
    if (id < 0) {
      fail(origin, line_no, "node ids must be non-negative");
    }
    if (t < 0.0) {
      fail(origin, line_no, "times must be non-negative");
    }
    if (x < 0.0 || x > field.width_m || y < 0.0 || y > field.height_m) {
      fail(origin, line_no, "position outside the declared bounds");
    }
    if (per_node.size() <= (std::size_t)id) {
      per_node.resize(id + 1);
    }
    auto& wps = per_node[id];
    if (!wps.empty()) {
      auto [t0, p0] = wps.back();
      if (t <= t0) {
        fail(origin, line_no, "waypoint times must increase per node");
      }
      double speed = std::hypot(x - p0.x, y - p0.y) / (t - t0);
      if (speed > max_speed_mps) {
        std::ostringstream os;
        os << "implied speed " << speed << " m/s exceeds the limit "
           << max_speed_mps << " m/s";
        fail(origin, line_no, os.str());
      }
    }
    wps.emplace_back(t, Position{x, y});
  }

  if (!have_bounds) {
    throw ValidationError((origin.empty() ? "trace" : origin) +
                          ": missing 'bounds' header");
  }
  if (per_node.empty()) {
    throw ValidationError((origin.empty() ? "trace" : origin) +
                          ": no waypoints");
  }
  for (std::size_t id = 0; id < per_node.size(); ++id) {
    if (per_node[id].empty()) {
      throw ValidationError((origin.empty() ? "trace" : origin) + ": node " +
                            std::to_string(id) + " has no waypoints");
    }
    Trajectory traj;
    for (auto& [t, p] : per_node[id]) {
      traj.add(t, p);
    }
    field.nodes.push_back(std::move(traj));
  }
  return field;
}

FieldTrajectories load_trace(const std::string& path, double max_speed_mps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open trace '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str(), path, max_speed_mps);
}

std::string serialize_trace(const FieldTrajectories& field) {
  std::ostringstream os;
  os << "bounds " << kvdoc::format_double(field.width_m) << " "
     << kvdoc::format_double(field.height_m) << "\n";
  for (std::size_t id = 0; id < field.nodes.size(); ++id) {
    for (const auto& [t, p] : field.nodes[id].waypoints()) {
      os << kvdoc::format_double(t) << " " << id << " "
         << kvdoc::format_double(p.x) << " " << kvdoc::format_double(p.y)
         << "\n";
    }
  }
  return os.str();
}

}  // namespace siwsim::mobility
