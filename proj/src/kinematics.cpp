#include "nsbavoid/kinematics.hpp"

#include <cmath>
#include <string>

namespace nsbavoid {

ConfigurationSizeError::ConfigurationSizeError(std::size_t expected, std::size_t got)
    : std::invalid_argument("configuration has " + std::to_string(got) +
                            " entries, chain has " + std::to_string(expected) + " joints") {}

ValidationError::ValidationError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

Eigen::Isometry3d DHJoint::transform(double q) const {
  const double th = kind == JointKind::Revolute ? theta + q : theta;
  const double dd = kind == JointKind::Prismatic ? d + q : d;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(alpha), sa = std::sin(alpha);

  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() << ct, -st * ca, st * sa,
                st, ct * ca, -ct * sa,
                0.0, sa, ca;
  T.translation() << a * ct, a * st, dd;
  return T;
}

void KinematicChain::validate(const ValidationOverrides& overrides) const {
  if (joints.empty()) throw ValidationError("chain.joints", "chain needs at least one joint");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto& lim = joints[i].limits;
    if (std::isnan(lim.min) || std::isnan(lim.max) || lim.min > lim.max) {
      throw ValidationError("chain.joints[" + std::to_string(i) + "].limits",
                            "limits must satisfy min <= max");
    }
  }
  const Mat3 RtR = base.rotation.transpose() * base.rotation;
  if ((RtR - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(base.rotation.determinant() - 1.0) > 1e-9) {
    throw ValidationError("chain.base.rotation", "base rotation must be a proper rotation");
  }
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    const auto& s = sensors[k];
    const std::string field = "sensors[" + std::to_string(k) + "]";
    if (s.link_index >= joints.size()) {
      throw ValidationError(field + ".link", "link index out of range");
    }
    if (!(s.threshold > 0.0)) throw ValidationError(field + ".threshold", "must be positive");
    // Activation must start with nonzero energy, so f < r_k strictly.
    if (!(s.threshold < s.rest_length)) {
      throw ValidationError(field + ".rest_length", "threshold must be strictly below rest length");
    }
    if (!(s.threshold <= s.field_of_view)) {
      throw ValidationError(field + ".threshold", "threshold exceeds field of view");
    }
    if (!overrides.allow_rest_length_beyond_fov && !(s.rest_length <= s.field_of_view)) {
      throw ValidationError(field + ".rest_length", "rest length exceeds field of view");
    }
    if (s.suppression && !(s.suppression->distance > 0.0)) {
      throw ValidationError(field + ".suppress_near.distance", "must be positive");
    }
    if (s.suppression && s.suppression->reference_link && *s.suppression->reference_link >= dof()) {
      throw ValidationError(field + ".suppress_near.from.link", "link index out of range");
    }
  }
}

std::vector<std::size_t> clamp_to_limits(const KinematicChain& chain, VecX& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof()) {
    throw ConfigurationSizeError(chain.dof(), static_cast<std::size_t>(q.size()));
  }
  std::vector<std::size_t> clamped;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& lim = chain.joints[i].limits;
    const auto idx = static_cast<Eigen::Index>(i);
    if (q[idx] < lim.min) {
      q[idx] = lim.min;
      clamped.push_back(i);
    } else if (q[idx] > lim.max) {
      q[idx] = lim.max;
      clamped.push_back(i);
    }
  }
  return clamped;
}

LinkFrames compute_frames(const KinematicChain& chain, const VecX& q) {
  VecX qc = q;
  clamp_to_limits(chain, qc);

  LinkFrames out;
  out.frames.reserve(chain.dof() + 1);
  out.frames.push_back(chain.base);
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Eigen::Isometry3d A = chain.joints[i].transform(qc[static_cast<Eigen::Index>(i)]);
    out.frames.push_back(out.frames.back() * FramePose{A.linear(), A.translation()});
  }
  return out;
}

std::vector<FramePose> forward_kinematics(const KinematicChain& chain, const VecX& q) {
  auto frames = compute_frames(chain, q).frames;
  frames.erase(frames.begin());
  return frames;
}

Vec3 point_on_link(const LinkFrames& frames, std::size_t link_index, const Vec3& offset) {
  return frames.link(link_index).apply(offset);
}

Vec3 point_on_link(const KinematicChain& chain, const VecX& q, const SensorMount& mount) {
  return point_on_link(compute_frames(chain, q), mount.link_index, mount.offset);
}

Jacobian3 point_jacobian(const KinematicChain& chain, const LinkFrames& frames,
                         std::size_t link_index, const Vec3& point) {
  const std::size_t n = chain.dof();
  if (link_index >= n) {
    throw std::out_of_range("link index " + std::to_string(link_index) + " out of range for " +
                            std::to_string(n) + "-joint chain");
  }
  Jacobian3 J = Jacobian3::Zero(3, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j <= link_index; ++j) {
    // Joint j moves along / about the z axis of frame j.
    const FramePose& F = frames.frame(j);
    const Vec3 z = F.rotation.col(2);
    const auto col = static_cast<Eigen::Index>(j);
    if (chain.joints[j].kind == JointKind::Prismatic) {
      J.col(col) = z;
    } else {
      J.col(col) = z.cross(point - F.origin);
    }
  }
  return J;
}

Jacobian3 point_jacobian(const KinematicChain& chain, const VecX& q, std::size_t link_index,
                         const Vec3& point) {
  return point_jacobian(chain, compute_frames(chain, q), link_index, point);
}

MatX damped_pseudo_inverse(const MatX& jacobian, double damping) {
  if (damping < 0.0) throw std::invalid_argument("damping must be non-negative");
  const auto m = jacobian.rows();
  MatX gram = jacobian * jacobian.transpose();
  gram.diagonal().array() += damping * damping;

  if (damping == 0.0) {
    Eigen::FullPivLU<MatX> lu(gram);
    lu.setThreshold(1e-12);
    if (lu.rank() < m) {
      throw SingularityError("J J^T is rank deficient; use a positive damping");
    }
    return jacobian.transpose() * lu.inverse();
  }
  return jacobian.transpose() * gram.ldlt().solve(MatX::Identity(m, m));
}

}  // namespace nsbavoid
