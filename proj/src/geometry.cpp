#include "nsbavoid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nsbavoid {

namespace {

constexpr double kTiny = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ProximityHit make_hit(const Vec3& query, const Vec3& surface) {
  ProximityHit hit;
  hit.point = surface;
  const Vec3 delta = surface - query;
  hit.distance = delta.norm();
  hit.direction = hit.distance > kTiny ? Vec3(delta / hit.distance) : Vec3::UnitZ();
  return hit;
}

ProximityHit make_penetration(const Vec3& query, const Vec3& inward) {
  ProximityHit hit;
  hit.point = query;
  hit.distance = 0.0;
  hit.penetration = true;
  const double n = inward.norm();
  hit.direction = n > kTiny ? Vec3(inward / n) : Vec3(-Vec3::UnitZ());
  return hit;
}

ProximityHit closest_sphere(const Sphere& s, const Vec3& query) {
  const Vec3 rel = query - s.center;
  const double r = rel.norm();
  if (r <= s.radius) return make_penetration(query, -rel);
  return make_hit(query, s.center + rel * (s.radius / r));
}

ProximityHit closest_box(const Box& b, const Vec3& query) {
  const Vec3 local = b.orientation.transpose() * (query - b.center);
  const Vec3 clamped = local.cwiseMax(-b.half_extents).cwiseMin(b.half_extents);
  if (clamped == local) return make_penetration(query, b.center - query);
  return make_hit(query, b.center + b.orientation * clamped);
}

ProximityHit closest_cylinder(const Cylinder& c, const Vec3& query) {
  const Vec3 rel = query - c.center;
  const double h = rel.dot(c.axis);
  const Vec3 radial = rel - h * c.axis;
  const double rho = radial.norm();
  if (rho <= c.radius && std::abs(h) <= c.half_height) {
    // Push toward the axis; on the axis itself, toward the center.
    return make_penetration(query, rho > kTiny ? Vec3(-radial) : Vec3(-h * c.axis));
  }
  const double hc = std::clamp(h, -c.half_height, c.half_height);
  const Vec3 rc = rho > c.radius ? Vec3(radial * (c.radius / rho)) : radial;
  return make_hit(query, c.center + hc * c.axis + rc);
}

}  // namespace

Shape translated(const Shape& shape, const Vec3& displacement) {
  return std::visit(
      [&](auto s) -> Shape {
        s.center += displacement;
        return s;
      },
      shape);
}

Vec3 shape_center(const Shape& shape) {
  return std::visit([](const auto& s) -> Vec3 { return s.center; }, shape);
}

PolylineSample sample_polyline(std::span<const Vec3> waypoints, double speed, double t) {
  PolylineSample out;
  if (waypoints.empty()) return out;
  out.position = waypoints.front();
  if (waypoints.size() == 1 || t <= 0.0 || speed <= 0.0) return out;

  double travel = speed * t;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec3 seg = waypoints[i + 1] - waypoints[i];
    const double len = seg.norm();
    if (len <= 0.0) continue;
    if (travel < len) {
      out.position = waypoints[i] + seg * (travel / len);
      out.velocity = seg * (speed / len);
      return out;
    }
    travel -= len;
  }
  out.position = waypoints.back();
  return out;
}

double distance_to_polyline(std::span<const Vec3> waypoints, const Vec3& point) {
  if (waypoints.empty()) return std::numeric_limits<double>::infinity();
  double best = (point - waypoints.front()).norm();
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec3 seg = waypoints[i + 1] - waypoints[i];
    const double len2 = seg.squaredNorm();
    double s = len2 > 0.0 ? (point - waypoints[i]).dot(seg) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    best = std::min(best, (point - (waypoints[i] + s * seg)).norm());
  }
  return best;
}

Vec3 WaypointMotion::displacement(double t) const {
  return sample_polyline(waypoints, speed, t - start_time).position;
}

Shape Obstacle::shape_at(double t) const {
  if (!motion) return shape;
  return translated(shape, motion->displacement(t));
}

ProximityHit closest_point(const Shape& shape, const Vec3& query) {
  return std::visit(Overloaded{
                        [&](const Sphere& s) { return closest_sphere(s, query); },
                        [&](const Box& b) { return closest_box(b, query); },
                        [&](const Cylinder& c) { return closest_cylinder(c, query); },
                    },
                    shape);
}

ProximityHit closest_point(const Obstacle& obstacle, const Vec3& query, double t) {
  ProximityHit hit = closest_point(obstacle.shape_at(t), query);
  hit.obstacle_id = obstacle.id;
  return hit;
}

const Obstacle* Scene::find(const std::string& id) const {
  for (const auto& o : obstacles) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

void validate_shape(const Shape& shape, const std::string& field) {
  std::visit(Overloaded{
                 [&](const Sphere& s) {
                   if (!(s.radius > 0.0)) throw ValidationError(field + ".radius", "must be positive");
                 },
                 [&](const Box& b) {
                   if (!(b.half_extents.minCoeff() > 0.0)) {
                     throw ValidationError(field + ".half_extents", "must be positive");
                   }
                   const Mat3 RtR = b.orientation.transpose() * b.orientation;
                   if ((RtR - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
                     throw ValidationError(field + ".orientation", "must be orthonormal");
                   }
                 },
                 [&](const Cylinder& c) {
                   if (!(c.radius > 0.0)) throw ValidationError(field + ".radius", "must be positive");
                   if (!(c.half_height > 0.0)) {
                     throw ValidationError(field + ".half_height", "must be positive");
                   }
                   if (std::abs(c.axis.norm() - 1.0) > 1e-9) {
                     throw ValidationError(field + ".axis", "must be a unit vector");
                   }
                 },
             },
             shape);
}

void Scene::validate() const {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string field = "scene.obstacles[" + std::to_string(i) + "]";
    if (!ids.insert(obstacles[i].id).second) {
      throw ValidationError(field + ".id", "duplicate obstacle id '" + obstacles[i].id + "'");
    }
    validate_shape(obstacles[i].shape, field);
    if (const auto& m = obstacles[i].motion) {
      if (m->waypoints.empty()) throw ValidationError(field + ".motion.waypoints", "empty");
      if (m->waypoints.size() > 1 && !(m->speed > 0.0)) {
        throw ValidationError(field + ".motion.speed", "must be positive");
      }
    }
  }
}

std::optional<ProximityHit> scene_nearest(const Scene& scene, const Vec3& query, double t,
                                          double max_range) {
  std::optional<ProximityHit> best;
  for (const auto& o : scene.obstacles) {
    ProximityHit hit = closest_point(o, query, t);
    if (hit.distance > max_range) continue;
    if (!best || hit.distance < best->distance) best = std::move(hit);
  }
  return best;
}

}  // namespace nsbavoid
