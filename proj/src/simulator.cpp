#include "nsbavoid/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace nsbavoid {

void ReferencePath::validate() const {
  if (waypoints.empty()) throw ValidationError("path.waypoints", "at least one waypoint required");
  if (!hold && waypoints.size() > 1 && !(speed > 0.0)) {
    throw ValidationError("path.speed", "must be positive unless holding");
  }
}

PathSample sample_path(const ReferencePath& path, double t) {
  if (path.hold || path.waypoints.size() == 1) return {path.waypoints.front(), Vec3::Zero()};
  const PolylineSample s = sample_polyline(path.waypoints, path.speed, t);
  return {s.position, s.velocity};
}

void Scenario::validate() const {
  if (robots.empty()) throw ValidationError("robots", "scenario needs at least one robot");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw ValidationError("duration", "must be a finite non-negative number");
  }
  scene.validate();
  std::set<std::string> names;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const RobotSpec& r = robots[i];
    const std::string prefix = robots.size() > 1 ? "robots[" + std::to_string(i) + "]." : "";
    try {
      if (!names.insert(r.name).second) throw ValidationError("name", "duplicate robot name");
      r.chain.validate(overrides);
      if (r.chain.sensors.empty()) throw ValidationError("sensors", "at least one sensor required");
      r.path.validate();
      if (r.path.task_point.link_index >= r.chain.dof()) {
        throw ValidationError("path.task_point.link", "link index out of range");
      }
      r.gains.validate();
      if (r.gains.max_joint_velocity &&
          static_cast<std::size_t>(r.gains.max_joint_velocity->size()) != r.chain.dof()) {
        throw ValidationError("gains.max_joint_velocity", "needs one cap per joint");
      }
      if (r.gains.t_s != robots.front().gains.t_s) {
        throw ValidationError("gains.t_s", "all robots must share the sampling time");
      }
      if (static_cast<std::size_t>(r.initial_q.size()) != r.chain.dof()) {
        throw ValidationError("initial_q", "expected " + std::to_string(r.chain.dof()) + " values");
      }
      if (!r.initial_q.allFinite()) throw ValidationError("initial_q", "values must be finite");
      if (r.controller == ControllerKind::Apf) {
        if (!r.apf) throw ValidationError("gains.apf", "required when controller is apf");
        r.apf->validate();
      }
      if (r.envelope && r.envelope->anchor.link_index >= r.chain.dof()) {
        throw ValidationError("envelope.link", "link index out of range");
      }
    } catch (const ValidationError& e) {
      if (prefix.empty()) throw;
      throw ValidationError(prefix + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
  }
}

std::size_t Scenario::tick_count() const {
  const double ratio = duration / t_s();
  return static_cast<std::size_t>(std::max(0.0, std::ceil(ratio - 1e-9)));
}

NonFiniteStateError::NonFiniteStateError(const std::string& robot, std::size_t tick, double t,
                                         double sigma, double lambda, double d_min)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "non-finite joint velocity for robot '" << robot << "' at tick " << tick
           << " (t=" << t << " s, sigma=" << sigma << ", lambda=" << lambda
           << ", d_min=" << d_min << ")";
        return os.str();
      }()),
      tick_(tick) {}

ControlTick evaluate_controller(const RobotSpec& robot, const VecX& q, const Scene& scene,
                                double t, bool previously_engaged) {
  const PathSample ref = sample_path(robot.path, t);
  const GoalTarget goal{robot.path.task_point, ref.x_d, ref.xdot_d};
  if (robot.controller == ControllerKind::Apf) {
    return apf_reference(robot.chain, q, scene, t, goal, robot.gains, *robot.apf,
                         previously_engaged);
  }
  return control_step(robot.chain, q, scene, t, goal, robot.gains, previously_engaged);
}

namespace {

Obstacle envelope_obstacle(const RobotSpec& robot, const VecX& q) {
  const Envelope& env = *robot.envelope;
  const LinkFrames frames = compute_frames(robot.chain, q);
  const FramePose& F = frames.link(env.anchor.link_index);
  Cylinder c;
  c.center = F.apply(env.anchor.offset);
  c.axis = (F.rotation * env.axis).normalized();
  c.radius = env.radius;
  c.half_height = env.half_height;
  return {robot.name, c, std::nullopt};
}

TrajectoryRow make_row(double t, const VecX& q, const ControlTick& tick) {
  TrajectoryRow row;
  row.t = t;
  row.q = q;
  row.x = tick.x;
  row.x_d = tick.x_d;
  row.sigma = tick.sigma;
  row.lambda = tick.lambda;
  row.d_min = tick.d_min;
  row.qdot = tick.qdot;
  row.d.resize(static_cast<Eigen::Index>(tick.readings.size()));
  for (std::size_t k = 0; k < tick.readings.size(); ++k) {
    const auto& r = tick.readings[k];
    row.d[static_cast<Eigen::Index>(k)] =
        r.suppressed ? std::numeric_limits<double>::quiet_NaN()
        : r.hit      ? r.hit->distance
                     : std::numeric_limits<double>::infinity();
  }
  row.qdot_goal = tick.qdot_goal;
  row.qdot_avoid = tick.qdot_avoid;
  row.x_err = tick.x_err;
  row.e0_flag = tick.e0_flag;
  return row;
}

}  // namespace

std::vector<TrajectoryLog> run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  const std::size_t ticks = scenario.tick_count();
  const double ts = scenario.t_s();
  const std::size_t m = scenario.robots.size();

  std::vector<TrajectoryLog> logs(m);
  std::vector<VecX> q(m);
  std::vector<bool> engaged(m, false);
  std::vector<std::set<std::size_t>> warned(m);
  for (std::size_t i = 0; i < m; ++i) {
    const RobotSpec& r = scenario.robots[i];
    logs[i].robot = r.name;
    logs[i].dof = r.chain.dof();
    logs[i].sensors = r.chain.sensors.size();
    logs[i].rows.reserve(ticks + 1);
    q[i] = r.initial_q;
    for (std::size_t j : clamp_to_limits(r.chain, q[i])) {
      if (warned[i].insert(j).second && options.on_limit) options.on_limit(r.name, j, 0.0);
    }
  }

  const bool mutual = m > 1;
  std::vector<ControlTick> ticks_now(m);
  for (std::size_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * ts;

    std::vector<Obstacle> envelopes;
    if (mutual) {
      for (std::size_t i = 0; i < m; ++i) {
        if (scenario.robots[i].envelope) envelopes.push_back(envelope_obstacle(scenario.robots[i], q[i]));
      }
    }

    for (std::size_t i = 0; i < m; ++i) {
      const RobotSpec& r = scenario.robots[i];
      if (mutual) {
        Scene local = scenario.scene;
        for (const auto& e : envelopes) {
          if (e.id != r.name) local.obstacles.push_back(e);
        }
        ticks_now[i] = evaluate_controller(r, q[i], local, t, engaged[i]);
      } else {
        ticks_now[i] = evaluate_controller(r, q[i], scenario.scene, t, engaged[i]);
      }
      const ControlTick& tick = ticks_now[i];
      if (!tick.qdot.allFinite()) {
        throw NonFiniteStateError(r.name, k, t, tick.sigma, tick.lambda, tick.d_min);
      }
      engaged[i] = tick.engaged;
      logs[i].rows.push_back(make_row(t, q[i], tick));
    }

    if (k == ticks) break;
    for (std::size_t i = 0; i < m; ++i) {
      const RobotSpec& r = scenario.robots[i];
      q[i] += ts * ticks_now[i].qdot;
      for (std::size_t j : clamp_to_limits(r.chain, q[i])) {
        if (warned[i].insert(j).second && options.on_limit) options.on_limit(r.name, j, t + ts);
      }
    }
  }
  return logs;
}

namespace {

void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  line += ',';
  line += buf;
}

void put_vec(std::string& line, const VecX& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(line, v[i]);
}

}  // namespace

std::string csv_header(const TrajectoryLog& log) {
  std::string h = "t";
  for (std::size_t i = 1; i <= log.dof; ++i) h += ",q" + std::to_string(i);
  h += ",x,y,z,xd,yd,zd,sigma,lambda,d_min";
  for (std::size_t i = 1; i <= log.dof; ++i) h += ",qdot" + std::to_string(i);
  for (std::size_t k = 1; k <= log.sensors; ++k) h += ",d" + std::to_string(k);
  return h;
}

void write_csv(std::ostream& os, const TrajectoryLog& log) {
  os << csv_header(log) << '\n';
  std::string line;
  for (const auto& row : log.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", row.t);
    line = buf;
    put_vec(line, row.q);
    put_vec(line, row.x);
    put_vec(line, row.x_d);
    put(line, row.sigma);
    put(line, row.lambda);
    put(line, row.d_min);
    put_vec(line, row.qdot);
    put_vec(line, row.d);
    os << line << '\n';
  }
}

void write_trace_csv(std::ostream& os, const TrajectoryLog& log) {
  os << "t,x_err,e0_flag";
  for (std::size_t i = 1; i <= log.dof; ++i) os << ",qdot_goal" << i;
  for (std::size_t i = 1; i <= log.dof; ++i) os << ",qdot_avoid" << i;
  os << '\n';
  std::string line;
  for (const auto& row : log.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", row.t);
    line = buf;
    put(line, row.x_err);
    line += row.e0_flag ? ",1" : ",0";
    put_vec(line, row.qdot_goal);
    put_vec(line, row.qdot_avoid);
    os << line << '\n';
  }
}

}  // namespace nsbavoid
