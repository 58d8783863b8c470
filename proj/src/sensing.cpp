#include "nsbavoid/sensing.hpp"

#include <limits>

namespace nsbavoid {

std::vector<SensorReading> sense_all(const KinematicChain& chain, const LinkFrames& frames,
                                     const Scene& scene, double t) {
  std::vector<SensorReading> out;
  out.reserve(chain.sensors.size());
  for (std::size_t k = 0; k < chain.sensors.size(); ++k) {
    const SensorMount& mount = chain.sensors[k];
    SensorReading r;
    r.sensor_index = k;
    r.position = point_on_link(frames, mount.link_index, mount.offset);

    if (mount.suppression) {
      const SuppressionRule& rule = *mount.suppression;
      if (const Obstacle* o = scene.find(rule.obstacle_id)) {
        const Vec3 reference = rule.reference_link
                                   ? point_on_link(frames, *rule.reference_link, rule.reference_offset)
                                   : r.position;
        if (closest_point(*o, reference, t).distance < rule.distance) {
          r.suppressed = true;
          out.push_back(std::move(r));
          continue;
        }
      }
    }

    r.hit = scene_nearest(scene, r.position, t, mount.field_of_view);
    r.active = r.hit && r.hit->distance <= mount.rest_length;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SensorReading> sense_all(const KinematicChain& chain, const VecX& q,
                                     const Scene& scene, double t) {
  return sense_all(chain, compute_frames(chain, q), scene, t);
}

const SensorReading* nearest_reading(std::span<const SensorReading> readings) {
  const SensorReading* best = nullptr;
  for (const auto& r : readings) {
    if (!r.hit) continue;
    if (!best || r.hit->distance < best->hit->distance) best = &r;
  }
  return best;
}

double min_distance(std::span<const SensorReading> readings) {
  const SensorReading* r = nearest_reading(readings);
  return r ? r->hit->distance : std::numeric_limits<double>::infinity();
}

}  // namespace nsbavoid
