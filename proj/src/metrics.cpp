#include <algorithm>
#include <cmath>
#include <limits>

#include "nsbavoid/simulator.hpp"

namespace nsbavoid {

Metrics metrics(const TrajectoryLog& log, const Scenario& scenario, std::size_t robot_index,
                const MetricsOptions& options) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const RobotSpec& robot = scenario.robots.at(robot_index);
  Metrics m;
  m.min_clearance = kInf;
  if (log.rows.empty()) return m;

  std::vector<Vec3> planned = robot.path.waypoints;
  if (robot.path.hold) planned.resize(1);

  std::ptrdiff_t last_outside = -1;
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const TrajectoryRow& row = log.rows[k];
    for (Eigen::Index i = 0; i < row.d.size(); ++i) {
      if (!std::isnan(row.d[i])) m.min_clearance = std::min(m.min_clearance, row.d[i]);
    }
    const double dev = distance_to_polyline(planned, row.x);
    m.max_path_deviation = std::max(m.max_path_deviation, dev);
    if (dev > options.return_tolerance) last_outside = static_cast<std::ptrdiff_t>(k);
    if (k > 0) m.chattering += (row.qdot - log.rows[k - 1].qdot).norm();
  }

  if (last_outside < 0) {
    m.return_time = 0.0;
  } else if (static_cast<std::size_t>(last_outside) + 1 < log.rows.size()) {
    m.return_time = log.rows[static_cast<std::size_t>(last_outside) + 1].t;
  }
  m.final_goal_error = (log.rows.back().x_d - log.rows.back().x).norm();

  // Geometric clearance of every sensor point (suppressed or not) per obstacle.
  for (const auto& o : scenario.scene.obstacles) m.min_clearance_by_obstacle[o.id] = kInf;
  if (!scenario.scene.obstacles.empty()) {
    for (const auto& row : log.rows) {
      const LinkFrames frames = compute_frames(robot.chain, row.q);
      for (const auto& mount : robot.chain.sensors) {
        const Vec3 p = point_on_link(frames, mount.link_index, mount.offset);
        for (const auto& o : scenario.scene.obstacles) {
          double& best = m.min_clearance_by_obstacle[o.id];
          best = std::min(best, closest_point(o, p, row.t).distance);
        }
      }
    }
  }
  return m;
}

}  // namespace nsbavoid
