#include "nsbavoid/controller.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nsbavoid {

void ControllerGains::validate() const {
  if (!(gamma_o > 0.0)) throw ValidationError("gains.gamma_o", "must be positive");
  if (!(gamma_g > 0.0)) throw ValidationError("gains.gamma_g", "must be positive");
  if (!(t_s > 0.0)) throw ValidationError("gains.t_s", "must be positive");
  if (!(damping >= 0.0)) throw ValidationError("gains.damping", "must be non-negative");
  if (const auto* a = std::get_if<ArctanSupervisor>(&supervisor); a && !(a->K > 0.0)) {
    throw ValidationError("gains.supervisor.K", "must be positive");
  }
  if (const auto* p = std::get_if<PiecewiseSupervisor>(&supervisor); p && !(p->eps > 0.0)) {
    throw ValidationError("gains.supervisor.eps", "must be positive");
  }
  if (max_joint_velocity && !(max_joint_velocity->minCoeff() > 0.0)) {
    throw ValidationError("gains.max_joint_velocity", "caps must be positive");
  }
}

double pseudo_energy(double d, double rest_length) {
  if (d > rest_length) return 0.0;
  const double s = d - rest_length;
  return 0.5 * s * s;
}

double sigma(std::span<const SensorReading> readings, std::span<const SensorMount> mounts) {
  double total = 0.0;
  for (const auto& r : readings) {
    if (!r.hit) continue;
    total += pseudo_energy(r.hit->distance, mounts[r.sensor_index].rest_length);
  }
  return total;
}

RowVecX jacobian_obstacle(const KinematicChain& chain, const LinkFrames& frames,
                          std::span<const SensorReading> readings) {
  RowVecX Jo = RowVecX::Zero(static_cast<Eigen::Index>(chain.dof()));
  for (const auto& r : readings) {
    if (!r.active) continue;
    const SensorMount& mount = chain.sensors[r.sensor_index];
    const Jacobian3 Js = point_jacobian(chain, frames, mount.link_index, r.position);
    const double stretch = r.hit->distance - mount.rest_length;
    Jo.noalias() -= stretch * (r.hit->direction.transpose() * Js);
  }
  return Jo;
}

RowVecX jacobian_obstacle(const KinematicChain& chain, const VecX& q,
                          std::span<const SensorReading> readings) {
  return jacobian_obstacle(chain, compute_frames(chain, q), readings);
}

double lambda_arctan(double d, double f, double K) {
  return std::atan(-K * (d - f)) / std::numbers::pi + 0.5;
}

double lambda_piecewise(double d, double f, double eps) {
  if (d < f - eps) return 1.0;
  if (d > f + eps) return 0.0;
  return -(d - f - eps) / (2.0 * eps);
}

double lambda_crisp(double d, double f) { return d <= f ? 1.0 : 0.0; }

double supervisor_weight(const Supervisor& supervisor, double d, double f) {
  if (std::isinf(d)) return 0.0;
  if (const auto* a = std::get_if<ArctanSupervisor>(&supervisor)) return lambda_arctan(d, f, a->K);
  if (const auto* p = std::get_if<PiecewiseSupervisor>(&supervisor)) {
    return lambda_piecewise(d, f, p->eps);
  }
  return lambda_crisp(d, f);
}

VecX goal_velocity(const MatX& goal_jacobian, const Vec3& x, const Vec3& x_d, const Vec3& xdot_d,
                   double gamma_g, double damping) {
  const Vec3 task = xdot_d + gamma_g * (x_d - x);
  return damped_pseudo_inverse(goal_jacobian, damping) * task;
}

VecX row_pseudo_inverse(const RowVecX& row, double damping) {
  const double gram = row.squaredNorm() + damping * damping;
  if (gram == 0.0) return VecX::Zero(row.size());
  return row.transpose() / gram;
}

VecX project_out_row(const RowVecX& row, const VecX& v) {
  const double gram = row.squaredNorm();
  if (gram == 0.0) return v;
  return v - row.transpose() * (row.dot(v) / gram);
}

VecX saturate(const VecX& qdot, const VecX& cap) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < qdot.size(); ++i) {
    const double a = std::abs(qdot[i]);
    if (a > cap[i]) scale = std::min(scale, cap[i] / a);
  }
  return qdot * scale;
}

ControlTick control_step(const KinematicChain& chain, const VecX& q, const Scene& scene, double t,
                         const GoalTarget& goal, const ControllerGains& gains,
                         bool previously_engaged) {
  const LinkFrames frames = compute_frames(chain, q);

  ControlTick tick;
  tick.readings = sense_all(chain, frames, scene, t);
  tick.sigma = sigma(tick.readings, chain.sensors);

  const SensorReading* nearest = nearest_reading(tick.readings);
  tick.d_min = nearest ? nearest->hit->distance : std::numeric_limits<double>::infinity();
  tick.threshold = nearest ? chain.sensors[nearest->sensor_index].threshold
                           : (chain.sensors.empty() ? 0.0 : chain.sensors.front().threshold);
  tick.lambda = supervisor_weight(gains.supervisor, tick.d_min, tick.threshold);
  tick.engaged = tick.d_min <= tick.threshold;
  tick.e0_flag = tick.engaged && !previously_engaged;

  tick.x = point_on_link(frames, goal.point.link_index, goal.point.offset);
  tick.x_d = goal.position;
  tick.x_err = (goal.position - tick.x).norm();
  const Jacobian3 Jg = point_jacobian(chain, frames, goal.point.link_index, tick.x);
  tick.qdot_goal = goal_velocity(Jg, tick.x, goal.position, goal.velocity, gains.gamma_g,
                                 gains.damping);

  const RowVecX Jo = jacobian_obstacle(chain, frames, tick.readings);
  // sigma_d = 0 and sigmadot_d = 0.
  tick.qdot_avoid = row_pseudo_inverse(Jo, gains.damping) * (gains.gamma_o * (0.0 - tick.sigma)) +
                    project_out_row(Jo, tick.qdot_goal);

  tick.qdot = tick.lambda * tick.qdot_avoid + (1.0 - tick.lambda) * tick.qdot_goal;
  if (gains.max_joint_velocity) tick.qdot = saturate(tick.qdot, *gains.max_joint_velocity);
  return tick;
}

}  // namespace nsbavoid
