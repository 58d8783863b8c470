#pragma once

// Velocity-level kinematic scenario execution with explicit Euler integration.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsbavoid/baseline_apf.hpp"
#include "nsbavoid/controller.hpp"
#include "nsbavoid/geometry.hpp"
#include "nsbavoid/kinematics.hpp"

namespace nsbavoid {

/// Desired trajectory of the task point: a constant-speed polyline, or a
/// fixed hold point when `hold` is set.
struct ReferencePath {
  TaskPoint task_point;
  std::vector<Vec3> waypoints;
  double speed = 0.0;
  bool hold = false;

  void validate() const;
};

struct PathSample {
  Vec3 x_d = Vec3::Zero();
  Vec3 xdot_d = Vec3::Zero();
};

PathSample sample_path(const ReferencePath& path, double t);

enum class ControllerKind { Nsb, Apf };

/// The volume other robots perceive: a cylinder attached to one of this
/// robot's links.
struct Envelope {
  TaskPoint anchor;
  Vec3 axis = Vec3::UnitZ();  // in the anchor link frame
  double radius = 0.35;
  double half_height = 0.1;
};

struct RobotSpec {
  std::string name = "robot";
  KinematicChain chain;
  ReferencePath path;
  ControllerGains gains;
  ControllerKind controller = ControllerKind::Nsb;
  std::optional<ApfGains> apf;
  VecX initial_q;
  std::optional<Envelope> envelope;
};

struct Scenario {
  std::string name;
  Scene scene;
  std::vector<RobotSpec> robots;
  double duration = 0.0;
  ValidationOverrides overrides;

  /// Throws ValidationError. All robots must share the sampling time.
  void validate() const;
  double t_s() const { return robots.front().gains.t_s; }
  std::size_t tick_count() const;  // ceil(duration / t_s)
};

struct TrajectoryRow {
  double t = 0.0;
  VecX q;
  Vec3 x = Vec3::Zero();
  Vec3 x_d = Vec3::Zero();
  double sigma = 0.0;
  double lambda = 0.0;
  double d_min = 0.0;
  VecX qdot;
  /// Per-sensor distance; +inf when out of range, NaN when suppressed.
  VecX d;
  // Controller diagnostics, written only to the trace file.
  VecX qdot_goal;
  VecX qdot_avoid;
  double x_err = 0.0;
  bool e0_flag = false;
};

struct TrajectoryLog {
  std::string robot;
  std::size_t dof = 0;
  std::size_t sensors = 0;
  std::vector<TrajectoryRow> rows;
};

class NonFiniteStateError : public std::runtime_error {
 public:
  NonFiniteStateError(const std::string& robot, std::size_t tick, double t, double sigma,
                      double lambda, double d_min);
  std::size_t tick() const noexcept { return tick_; }

 private:
  std::size_t tick_;
};

struct RunOptions {
  /// Called once per joint the first time the integrator clamps it.
  std::function<void(const std::string& robot, std::size_t joint, double t)> on_limit;
};

/// Runs every robot in lockstep; one log per robot, in scenario order.
std::vector<TrajectoryLog> run(const Scenario& scenario, const RunOptions& options = {});

/// One controller evaluation for robot `index` against an explicit scene.
ControlTick evaluate_controller(const RobotSpec& robot, const VecX& q, const Scene& scene,
                                double t, bool previously_engaged);

std::string csv_header(const TrajectoryLog& log);
void write_csv(std::ostream& os, const TrajectoryLog& log);
void write_trace_csv(std::ostream& os, const TrajectoryLog& log);

struct MetricsOptions {
  double return_tolerance = 0.05;  // m
};

struct Metrics {
  double min_clearance = 0.0;
  double max_path_deviation = 0.0;
  /// Time at which the task point re-entered the return tolerance for good;
  /// 0 when it never left, absent when it was still outside at the end.
  std::optional<double> return_time;
  double chattering = 0.0;
  double final_goal_error = 0.0;
  std::map<std::string, double> min_clearance_by_obstacle;
};

Metrics metrics(const TrajectoryLog& log, const Scenario& scenario, std::size_t robot_index = 0,
                const MetricsOptions& options = {});

}  // namespace nsbavoid
