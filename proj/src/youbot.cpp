#include <numbers>

#include "nsbavoid/kinematics.hpp"

namespace nsbavoid {

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double v) { return v * kPi / 180.0; }

DHJoint prismatic(double theta, double alpha, double a, JointLimits lim) {
  return {JointKind::Prismatic, theta, 0.0, alpha, a, lim};
}

DHJoint revolute(double d, double alpha, double a, JointLimits lim) {
  return {JointKind::Revolute, 0.0, d, alpha, a, lim};
}

}  // namespace

KinematicChain youbot_chain() {
  KinematicChain chain;
  chain.name = "youbot";
  // DH frame 0: x0 = world z, y0 = -world y, z0 = world x.
  chain.base.rotation << 0.0, 0.0, 1.0,
                         0.0, -1.0, 0.0,
                         1.0, 0.0, 0.0;

  const JointLimits floor_travel{-50.0, 50.0};
  chain.joints = {
      prismatic(0.0, kPi / 2, 0.0, floor_travel),
      prismatic(kPi / 2, kPi / 2, 0.0, floor_travel),
      revolute(0.0, 0.0, 0.167, {-4 * kPi, 4 * kPi}),
      revolute(0.147, kPi / 2, 0.033, {deg(-169), deg(169)}),
      // Published ranges for the two arm pitch joints are asymmetric and their
      // zero offsets relative to this table are unknown.
      revolute(0.0, 0.0, 0.155, {-kPi, kPi}),
      revolute(0.0, 0.0, 0.135, {-kPi, kPi}),
      revolute(0.0, kPi / 2, 0.0, {deg(-102.5), deg(102.5)}),
      revolute(0.2175, 0.0, 0.0, {deg(-165), deg(165)}),
  };
  return chain;
}

}  // namespace nsbavoid
