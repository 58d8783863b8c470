#pragma once

// Denavit-Hartenberg chain model, forward kinematics and position Jacobians
// for points rigidly attached to links.

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nsbavoid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Jacobian3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

inline constexpr double kDefaultDamping = 1e-4;

/// Thrown when a configuration vector does not match the chain's joint count.
class ConfigurationSizeError : public std::invalid_argument {
 public:
  ConfigurationSizeError(std::size_t expected, std::size_t got);
};

/// Thrown by the undamped pseudo-inverse when J J^T cannot be inverted.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invariant violation in a model description; `field` names the offending entry.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class JointKind { Revolute, Prismatic };

struct JointLimits {
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
};

/// Standard DH joint: A = Rz(theta) Tz(d) Tx(a) Rx(alpha). The joint variable
/// is added to theta (revolute) or to d (prismatic); the stored value is the
/// constant offset.
struct DHJoint {
  JointKind kind = JointKind::Revolute;
  double theta = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double a = 0.0;
  JointLimits limits;

  Eigen::Isometry3d transform(double q) const;
};

/// Turns a sensor off while a reference point is within `distance` of the
/// named obstacle. Without `reference_link` the sensor point itself is used.
struct SuppressionRule {
  std::string obstacle_id;
  double distance = 0.0;
  std::optional<std::size_t> reference_link;
  Vec3 reference_offset = Vec3::Zero();
};

/// A proximity sensor rigidly attached to a link.
///
/// `link_index` is zero-based: link i moves with joints 0..i and carries the
/// frame produced by joint i. `offset` is expressed in that frame.
struct SensorMount {
  std::size_t link_index = 0;
  Vec3 offset = Vec3::Zero();
  double field_of_view = 1.0;  // f_s
  double rest_length = 0.9;    // r_k
  double threshold = 0.4;      // f
  std::optional<SuppressionRule> suppression;
};

struct FramePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 origin = Vec3::Zero();

  Vec3 apply(const Vec3& local) const { return origin + rotation * local; }
  FramePose operator*(const FramePose& child) const {
    return {rotation * child.rotation, origin + rotation * child.origin};
  }
};

/// Relaxations of the sensor-mount invariants, set per scenario.
struct ValidationOverrides {
  bool allow_rest_length_beyond_fov = false;
};

struct KinematicChain {
  std::string name;
  /// World pose of DH frame 0.
  FramePose base;
  std::vector<DHJoint> joints;
  std::vector<SensorMount> sensors;

  std::size_t dof() const { return joints.size(); }

  /// Throws ValidationError naming the first broken invariant.
  void validate(const ValidationOverrides& overrides = {}) const;
};

/// Frames 0..n of a chain at one configuration. frame(0) is the base,
/// frame(i + 1) is the frame carried by link i.
struct LinkFrames {
  std::vector<FramePose> frames;

  const FramePose& frame(std::size_t i) const { return frames[i]; }
  const FramePose& link(std::size_t link_index) const { return frames[link_index + 1]; }
  std::size_t dof() const { return frames.size() - 1; }
};

/// Clamps q into the joint limits. Returns the indices that were clamped.
std::vector<std::size_t> clamp_to_limits(const KinematicChain& chain, VecX& q);

/// Frames 0..n including the base. q is clamped to the joint limits first.
LinkFrames compute_frames(const KinematicChain& chain, const VecX& q);

/// One pose per joint frame (frames 1..n) in world coordinates.
std::vector<FramePose> forward_kinematics(const KinematicChain& chain, const VecX& q);

Vec3 point_on_link(const LinkFrames& frames, std::size_t link_index, const Vec3& offset);
Vec3 point_on_link(const KinematicChain& chain, const VecX& q, const SensorMount& mount);

/// Position Jacobian (3 x n) of world point P rigidly attached to `link_index`.
/// Columns beyond the link are zero.
Jacobian3 point_jacobian(const KinematicChain& chain, const LinkFrames& frames,
                         std::size_t link_index, const Vec3& point);
Jacobian3 point_jacobian(const KinematicChain& chain, const VecX& q, std::size_t link_index,
                         const Vec3& point);

/// J^T (J J^T + damping^2 I)^-1. With damping == 0 the Gram matrix must be
/// invertible, otherwise SingularityError is thrown.
MatX damped_pseudo_inverse(const MatX& jacobian, double damping);

/// Eight-joint omnidirectional mobile manipulator: two prismatic base joints,
/// base yaw and a five-joint arm. Frame 0 is rotated so that the prismatic
/// joints translate along world x and y and the yaw axis is world z.
KinematicChain youbot_chain();

}  // namespace nsbavoid
