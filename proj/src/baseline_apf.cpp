#include "nsbavoid/baseline_apf.hpp"

#include <limits>

namespace nsbavoid {

namespace {

std::vector<TaskPoint> effective_control_points(const KinematicChain& chain, const ApfGains& g) {
  if (!g.control_points.empty()) return g.control_points;
  std::vector<TaskPoint> pts;
  pts.reserve(chain.sensors.size());
  for (const auto& s : chain.sensors) pts.push_back({s.link_index, s.offset});
  return pts;
}

struct ApfTerms {
  VecX repulsion;
  VecX attraction;
};

ApfTerms apf_terms(const KinematicChain& chain, const LinkFrames& frames, const Scene& scene,
                   double t, const GoalTarget& goal, const ApfGains& gains) {
  const auto n = static_cast<Eigen::Index>(chain.dof());
  ApfTerms out{VecX::Zero(n), VecX::Zero(n)};

  for (const auto& cp : effective_control_points(chain, gains)) {
    const Vec3 p = point_on_link(frames, cp.link_index, cp.offset);
    const auto hit = scene_nearest(scene, p, t, gains.rho_0);
    if (!hit) continue;
    const Vec3 force = repulsive_gradient(hit->distance, gains.rho_0, gains.eta, -hit->direction,
                                          gains.max_force);
    out.repulsion.noalias() += point_jacobian(chain, frames, cp.link_index, p).transpose() * force;
  }

  const Vec3 x = point_on_link(frames, goal.point.link_index, goal.point.offset);
  const Jacobian3 Jp = point_jacobian(chain, frames, goal.point.link_index, x);
  out.attraction = Jp.transpose() * (gains.k_p * (goal.position - x));
  return out;
}

}  // namespace

void ApfGains::validate() const {
  if (!(eta > 0.0)) throw ValidationError("gains.apf.eta", "must be positive");
  if (!(rho_0 > 0.0)) throw ValidationError("gains.apf.rho_0", "must be positive");
  if (!(k_p > 0.0)) throw ValidationError("gains.apf.k_p", "must be positive");
  if (!(max_force > 0.0)) throw ValidationError("gains.apf.max_force", "must be positive");
}

Vec3 repulsive_gradient(double rho, double rho_0, double eta, const Vec3& dir, double max_force) {
  if (rho >= rho_0) return Vec3::Zero();
  if (rho <= 0.0) return max_force * dir;
  const double magnitude = eta * (1.0 / rho - 1.0 / rho_0) / (rho * rho);
  return std::min(magnitude, max_force) * dir;
}

VecX apf_velocity(const KinematicChain& chain, const VecX& q, const Scene& scene, double t,
                  const GoalTarget& goal, const ApfGains& gains) {
  const auto terms = apf_terms(chain, compute_frames(chain, q), scene, t, goal, gains);
  return terms.repulsion + terms.attraction;
}

ControlTick apf_reference(const KinematicChain& chain, const VecX& q, const Scene& scene,
                          double t, const GoalTarget& goal, const ControllerGains& gains,
                          const ApfGains& apf, bool previously_engaged) {
  const LinkFrames frames = compute_frames(chain, q);
  ControlTick tick;
  tick.readings = sense_all(chain, frames, scene, t);
  tick.sigma = sigma(tick.readings, chain.sensors);
  const SensorReading* nearest = nearest_reading(tick.readings);
  tick.d_min = nearest ? nearest->hit->distance : std::numeric_limits<double>::infinity();
  tick.threshold = nearest ? chain.sensors[nearest->sensor_index].threshold : 0.0;
  tick.engaged = tick.d_min <= apf.rho_0;
  tick.e0_flag = tick.engaged && !previously_engaged;
  tick.lambda = 0.0;

  tick.x = point_on_link(frames, goal.point.link_index, goal.point.offset);
  tick.x_d = goal.position;
  tick.x_err = (goal.position - tick.x).norm();

  const auto terms = apf_terms(chain, frames, scene, t, goal, apf);
  tick.qdot_avoid = terms.repulsion;
  tick.qdot_goal = terms.attraction;
  tick.qdot = terms.repulsion + terms.attraction;
  if (gains.max_joint_velocity) tick.qdot = saturate(tick.qdot, *gains.max_joint_velocity);
  return tick;
}

}  // namespace nsbavoid
