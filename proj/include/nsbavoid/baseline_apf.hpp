#pragma once

// Velocity-level artificial potential field baseline: repulsive gradients at
// control points and an attraction on the task point, both mapped to joint
// space through transposed position Jacobians.

#include <vector>

#include "nsbavoid/controller.hpp"

namespace nsbavoid {

struct ApfGains {
  double eta = 0.05;    // repulsion gain
  double rho_0 = 0.9;   // influence distance, m
  double k_p = 2.0;     // attraction gain, 1/s
  double max_force = 1e3;
  /// Points subject to the repulsive field. Empty means the chain's sensor mounts.
  std::vector<TaskPoint> control_points;

  void validate() const;
};

/// Repulsion eta (1/rho - 1/rho_0) / rho^2 * dir inside rho_0, zero outside.
/// `dir` is the unit gradient of rho, pointing away from the obstacle. The
/// magnitude is capped at max_force.
Vec3 repulsive_gradient(double rho, double rho_0, double eta, const Vec3& dir,
                        double max_force = 1e3);

VecX apf_velocity(const KinematicChain& chain, const VecX& q, const Scene& scene, double t,
                  const GoalTarget& goal, const ApfGains& gains);

/// Same contract as control_step; qdot_avoid holds the repulsive part,
/// qdot_goal the attraction, and lambda is 0. sigma, readings and d_min are
/// filled in from the chain's sensors for side-by-side logging.
ControlTick apf_reference(const KinematicChain& chain, const VecX& q, const Scene& scene,
                          double t, const GoalTarget& goal, const ControllerGains& gains,
                          const ApfGains& apf, bool previously_engaged = false);

}  // namespace nsbavoid
