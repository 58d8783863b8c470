#pragma once

// Obstacle primitives, exact closest-point queries and waypoint motion.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nsbavoid/kinematics.hpp"

namespace nsbavoid {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Oriented box; `orientation` columns are the box axes in world coordinates.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  Mat3 orientation = Mat3::Identity();
};

/// Solid capped cylinder centered at `center`, extending half_height along +-axis.
struct Cylinder {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double radius = 1.0;
  double half_height = 1.0;
};

using Shape = std::variant<Sphere, Box, Cylinder>;

Shape translated(const Shape& shape, const Vec3& displacement);
Vec3 shape_center(const Shape& shape);

struct PolylineSample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Constant-speed traversal of a polyline starting at t = 0. Before t = 0 and
/// after the last vertex the position holds and the velocity is zero.
PolylineSample sample_polyline(std::span<const Vec3> waypoints, double speed, double t);

/// Euclidean distance from `point` to the polyline (a single vertex is a point).
double distance_to_polyline(std::span<const Vec3> waypoints, const Vec3& point);

/// Rigid translation following waypoints at constant speed; the waypoints are
/// displacements added to the obstacle's nominal pose.
struct WaypointMotion {
  std::vector<Vec3> waypoints;
  double speed = 0.0;
  double start_time = 0.0;

  Vec3 displacement(double t) const;
};

struct Obstacle {
  std::string id;
  Shape shape;
  std::optional<WaypointMotion> motion;

  Shape shape_at(double t) const;
};

struct ProximityHit {
  std::string obstacle_id;
  Vec3 point = Vec3::Zero();      // P_o, closest point on the obstacle
  double distance = 0.0;          // d >= 0
  Vec3 direction = Vec3::UnitX();  // unit vector from the query toward P_o
  bool penetration = false;
};

/// Exact closest point on the surface of `shape`. For a query inside the solid
/// the hit has distance 0, point == query, penetration set and a direction
/// pointing from the query toward the shape's center (or axis), which is the
/// limit of the outside convention as the query crosses the surface.
ProximityHit closest_point(const Shape& shape, const Vec3& query);
ProximityHit closest_point(const Obstacle& obstacle, const Vec3& query, double t);

struct Scene {
  std::vector<Obstacle> obstacles;

  const Obstacle* find(const std::string& id) const;
  void validate() const;
};

/// Nearest obstacle within max_range (inclusive). Ties keep the earlier obstacle.
std::optional<ProximityHit> scene_nearest(const Scene& scene, const Vec3& query, double t,
                                          double max_range);

void validate_shape(const Shape& shape, const std::string& field);

}  // namespace nsbavoid
