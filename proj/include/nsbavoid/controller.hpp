#pragma once

// Null-space-based obstacle avoidance from distributed proximity sensing.
//
// Every sensor k carries a virtual spring of rest length r_k. Its energy
// eps_k = 1/2 (d_k - r_k)^2 (zero beyond r_k) is summed into the task
// variable sigma(q). The avoidance task drives sigma to zero with a CLIK law
// on the 1 x n gradient J_o, and the goal task (end-effector or base point
// tracking) is projected into the null space of J_o. A supervisor weight
// lambda(d) in [0, 1], evaluated at the minimum sensed distance d, blends the
// prioritised composition with the bare goal velocity:
//
//   qdot = lambda * (J_o^+ gamma_o (0 - sigma) + (I - J_o^+ J_o) qdot_g)
//        + (1 - lambda) * qdot_g
//   qdot_g = J_g^+ (xdot_d + gamma_g (x_d - x))

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nsbavoid/geometry.hpp"
#include "nsbavoid/kinematics.hpp"
#include "nsbavoid/sensing.hpp"

namespace nsbavoid {

using RowVecX = Eigen::RowVectorXd;

/// lambda(d) = atan(-K (d - f)) / pi + 1/2
struct ArctanSupervisor {
  double K = 20.0;  // 1/m
};

/// Linear ramp from 1 at d = f - eps to 0 at d = f + eps.
struct PiecewiseSupervisor {
  double eps = 0.08;  // m
};

/// Finite-state switch: lambda = 1 when d <= f, 0 otherwise. Discontinuous;
/// kept to reproduce the chattering it causes.
struct CrispSupervisor {};

using Supervisor = std::variant<ArctanSupervisor, PiecewiseSupervisor, CrispSupervisor>;

struct ControllerGains {
  double gamma_o = 1.0;  // 1/s
  double gamma_g = 2.0;  // 1/s
  double t_s = 1e-3;     // s
  Supervisor supervisor = ArctanSupervisor{};
  double damping = kDefaultDamping;
  /// Per-joint |qdot_i| cap. The whole vector is scaled down uniformly so the
  /// direction is preserved.
  std::optional<VecX> max_joint_velocity;

  void validate() const;
};

/// A point rigidly attached to a link, tracked by the goal task.
struct TaskPoint {
  std::size_t link_index = 0;
  Vec3 offset = Vec3::Zero();
};

struct GoalTarget {
  TaskPoint point;
  Vec3 position = Vec3::Zero();  // x_d
  Vec3 velocity = Vec3::Zero();  // xdot_d
};

struct ControlTick {
  double sigma = 0.0;
  double lambda = 0.0;
  double d_min = 0.0;
  double threshold = 0.0;  // f of the sensor that produced d_min
  VecX qdot_goal;
  VecX qdot_avoid;
  VecX qdot;
  Vec3 x = Vec3::Zero();
  Vec3 x_d = Vec3::Zero();
  double x_err = 0.0;
  bool engaged = false;  // d_min <= f
  bool e0_flag = false;  // first engaged tick of an activation
  std::vector<SensorReading> readings;
};

double pseudo_energy(double d, double rest_length);

/// Sum of pseudo-energies over present, unsuppressed hits.
double sigma(std::span<const SensorReading> readings, std::span<const SensorMount> mounts);

/// Analytic gradient of sigma: sum over active k of -(d_k - r_k) v_k^T J_sk.
RowVecX jacobian_obstacle(const KinematicChain& chain, const LinkFrames& frames,
                          std::span<const SensorReading> readings);
RowVecX jacobian_obstacle(const KinematicChain& chain, const VecX& q,
                          std::span<const SensorReading> readings);

double lambda_arctan(double d, double f, double K);
double lambda_piecewise(double d, double f, double eps);
double lambda_crisp(double d, double f);
double supervisor_weight(const Supervisor& supervisor, double d, double f);

/// J_g^+ (xdot_d + gamma_g (x_d - x)) with a damped pseudo-inverse.
VecX goal_velocity(const MatX& goal_jacobian, const Vec3& x, const Vec3& x_d, const Vec3& xdot_d,
                   double gamma_g, double damping = kDefaultDamping);

/// (I - J^+ J) v for a single task row, using the exact row inverse
/// J^T / (J J^T). A zero row projects onto the identity.
VecX project_out_row(const RowVecX& row, const VecX& v);

/// J^T / (J J^T + damping^2); the zero row maps to the zero column.
VecX row_pseudo_inverse(const RowVecX& row, double damping);

/// One controller evaluation. `previously_engaged` is the previous tick's
/// `engaged` flag and only feeds e0_flag.
ControlTick control_step(const KinematicChain& chain, const VecX& q, const Scene& scene, double t,
                         const GoalTarget& goal, const ControllerGains& gains,
                         bool previously_engaged = false);

/// Scales qdot uniformly so that |qdot_i| <= cap_i.
VecX saturate(const VecX& qdot, const VecX& cap);

}  // namespace nsbavoid
