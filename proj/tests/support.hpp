#pragma once

// Shared fixtures: random active sensing states on the bundled sensor layout.

#include <cmath>
#include <random>
#include <vector>

#include "nsbavoid/controller.hpp"
#include "nsbavoid/scenario_io.hpp"

namespace nsbavoid::fixtures {

/// Base and arm sensors from the fly-by scenario.
inline KinematicChain sensorised_youbot() {
  return load_scenario(bundled_scenario("case4.json")).robots.front().chain;
}

struct ActiveState {
  VecX q;
  Scene scene;
  std::vector<SensorReading> readings;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline VecX random_configuration(const KinematicChain& chain, std::mt19937_64& rng) {
  VecX q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const JointLimits& l = chain.joints[i].limits;
    const double lo = std::isfinite(l.min) ? l.min + 1e-3 : -2.0;
    const double hi = std::isfinite(l.max) ? l.max - 1e-3 : 2.0;
    q[static_cast<Eigen::Index>(i)] = uniform(rng, lo, hi);
  }
  return q;
}

/// A configuration plus one sphere that is within rest length of a randomly
/// picked sensor. States where a sensor sits at a kink of sigma (penetration,
/// the rest length or the field-of-view edge) are redrawn so that finite
/// differences stay meaningful.
inline ActiveState random_active_state(const KinematicChain& chain, std::mt19937_64& rng) {
  for (;;) {
    ActiveState s;
    s.q = random_configuration(chain, rng);
    const LinkFrames frames = compute_frames(chain, s.q);
    const auto k = std::uniform_int_distribution<std::size_t>(0, chain.sensors.size() - 1)(rng);
    const SensorMount& mount = chain.sensors[k];
    const Vec3 p = point_on_link(frames, mount.link_index, mount.offset);

    Vec3 u(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    if (u.norm() < 1e-3) continue;
    u.normalize();
    const double d = uniform(rng, 0.02, mount.rest_length - 0.02);
    const double radius = uniform(rng, 0.03, 0.3);
    s.scene.obstacles.push_back({"ball", Sphere{p + (d + radius) * u, radius}, std::nullopt});

    s.readings = sense_all(chain, frames, s.scene, 0.0);
    bool clean = s.readings[k].active;
    for (const auto& r : s.readings) {
      if (!r.hit) continue;
      const SensorMount& m = chain.sensors[r.sensor_index];
      const double dist = r.hit->distance;
      if (dist < 1e-3 || std::abs(dist - m.rest_length) < 1e-4 ||
          std::abs(dist - m.field_of_view) < 1e-4) {
        clean = false;
      }
    }
    if (clean) return s;
  }
}

inline double sigma_at(const KinematicChain& chain, const VecX& q, const Scene& scene) {
  return sigma(sense_all(chain, q, scene, 0.0), chain.sensors);
}

/// Central differences of sigma with step h.
inline RowVecX sigma_gradient_fd(const KinematicChain& chain, const VecX& q, const Scene& scene,
                                 double h = 1e-6) {
  RowVecX g(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    VecX qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    g[i] = (sigma_at(chain, qp, scene) - sigma_at(chain, qm, scene)) / (2.0 * h);
  }
  return g;
}

}  // namespace nsbavoid::fixtures
