#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nsbavoid/geometry.hpp"
#include "nsbavoid/kinematics.hpp"

namespace nsbavoid {

/// What sensor k reports at one instant.
struct SensorReading {
  std::size_t sensor_index = 0;
  Vec3 position = Vec3::Zero();       // P_s
  std::optional<ProximityHit> hit;    // absent beyond the field of view
  bool active = false;                // hit within rest length
  bool suppressed = false;            // switched off by its suppression rule
};

std::vector<SensorReading> sense_all(const KinematicChain& chain, const LinkFrames& frames,
                                     const Scene& scene, double t);
std::vector<SensorReading> sense_all(const KinematicChain& chain, const VecX& q,
                                     const Scene& scene, double t);

/// min_k d_k over present hits, +inf when nothing is in range.
double min_distance(std::span<const SensorReading> readings);

/// Reading with the smallest distance (first on ties), or nullptr.
const SensorReading* nearest_reading(std::span<const SensorReading> readings);

}  // namespace nsbavoid
