#include <gtest/gtest.h>

#include <cmath>

#include "nsbavoid/sensing.hpp"

using namespace nsbavoid;

namespace {

// Two sensors on a single prismatic joint sliding along world z.
KinematicChain slider() {
  KinematicChain c;
  c.joints = {{JointKind::Prismatic, 0.0, 0.0, 0.0, 0.0, {}}};
  SensorMount a;
  a.offset = Vec3(0.1, 0, 0);
  a.field_of_view = 1.0;
  a.rest_length = 0.5;
  a.threshold = 0.2;
  SensorMount b = a;
  b.offset = Vec3(-0.1, 0, 0);
  c.sensors = {a, b};
  return c;
}

Scene ball_at(const Vec3& c, double r) {
  Scene s;
  s.obstacles.push_back({"ball", Sphere{c, r}, std::nullopt});
  return s;
}

}  // namespace

TEST(Sensing, ReadingsFollowRangeAndRestLength) {
  const auto chain = slider();
  const VecX q = VecX::Zero(1);

  auto r = sense_all(chain, q, ball_at(Vec3(0.5, 0, 0), 0.1), 0.0);
  ASSERT_EQ(r.size(), 2u);
  ASSERT_TRUE(r[0].hit);
  EXPECT_NEAR(r[0].hit->distance, 0.3, 1e-15);
  EXPECT_TRUE(r[0].active);
  ASSERT_TRUE(r[1].hit);
  EXPECT_NEAR(r[1].hit->distance, 0.5, 1e-15);
  EXPECT_TRUE(r[1].active);  // rest length is inclusive

  r = sense_all(chain, q, ball_at(Vec3(1.05, 0, 0), 0.1), 0.0);
  ASSERT_TRUE(r[0].hit);
  EXPECT_NEAR(r[0].hit->distance, 0.85, 1e-15);
  EXPECT_FALSE(r[0].active);
  EXPECT_FALSE(r[1].hit);  // 1.05 > field of view
}

TEST(Sensing, PositionsMoveWithJoint) {
  const auto chain = slider();
  VecX q(1);
  q << 0.4;
  const auto r = sense_all(chain, q, Scene{}, 0.0);
  EXPECT_EQ(r[0].position, Vec3(0.1, 0, 0.4));
  EXPECT_FALSE(r[0].hit);
}

TEST(Sensing, MinDistanceAndNearest) {
  const auto chain = slider();
  const auto r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(-0.6, 0, 0), 0.1), 0.0);
  const SensorReading* n = nearest_reading(r);
  ASSERT_NE(n, nullptr);
  EXPECT_EQ(n->sensor_index, 1u);
  EXPECT_NEAR(min_distance(r), 0.4, 1e-15);

  const auto none = sense_all(chain, VecX::Zero(1), Scene{}, 0.0);
  EXPECT_EQ(nearest_reading(none), nullptr);
  EXPECT_TRUE(std::isinf(min_distance(none)));
}

TEST(Sensing, NearestKeepsFirstOnTie) {
  const auto chain = slider();
  const auto r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(0, 0.5, 0), 0.1), 0.0);
  EXPECT_EQ(nearest_reading(r)->sensor_index, 0u);
}

TEST(Sensing, SuppressionAtSensorPoint) {
  auto chain = slider();
  chain.sensors[0].suppression = SuppressionRule{"ball", 0.35, std::nullopt, Vec3::Zero()};
  const auto r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(0.5, 0, 0), 0.1), 0.0);
  EXPECT_TRUE(r[0].suppressed);
  EXPECT_FALSE(r[0].hit);
  EXPECT_FALSE(r[0].active);
  EXPECT_FALSE(r[1].suppressed);
  EXPECT_NEAR(min_distance(r), 0.5, 1e-15);

  chain.sensors[0].suppression->distance = 0.3;  // strict comparison
  EXPECT_FALSE(sense_all(chain, VecX::Zero(1), ball_at(Vec3(0.5, 0, 0), 0.1), 0.0)[0].suppressed);
}

TEST(Sensing, SuppressionFromReferencePoint) {
  auto chain = slider();
  // Sensor 1 is switched off by the distance measured at sensor 0's side.
  chain.sensors[1].suppression = SuppressionRule{"ball", 0.35, 0, Vec3(0.1, 0, 0)};
  auto r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(0.5, 0, 0), 0.1), 0.0);
  EXPECT_TRUE(r[1].suppressed);
  EXPECT_FALSE(r[0].suppressed);

  chain.sensors[1].suppression->reference_offset = Vec3(-0.1, 0, 0);
  r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(0.5, 0, 0), 0.1), 0.0);
  EXPECT_FALSE(r[1].suppressed);
}

TEST(Sensing, SuppressionIgnoresUnknownObstacle) {
  auto chain = slider();
  chain.sensors[0].suppression = SuppressionRule{"missing", 10.0, std::nullopt, Vec3::Zero()};
  const auto r = sense_all(chain, VecX::Zero(1), ball_at(Vec3(0.5, 0, 0), 0.1), 0.0);
  EXPECT_FALSE(r[0].suppressed);
  EXPECT_TRUE(r[0].hit);
}

TEST(Sensing, SuppressionOnlyMatchesItsObstacle) {
  auto chain = slider();
  chain.sensors[0].suppression = SuppressionRule{"ball", 0.35, std::nullopt, Vec3::Zero()};
  Scene s = ball_at(Vec3(5, 0, 0), 0.1);
  s.obstacles.push_back({"table", Box{Vec3(0.4, 0, 0), Vec3::Constant(0.1), Mat3::Identity()},
                         std::nullopt});
  const auto r = sense_all(chain, VecX::Zero(1), s, 0.0);
  EXPECT_FALSE(r[0].suppressed);
  EXPECT_EQ(r[0].hit->obstacle_id, "table");
}

TEST(Sensing, MovingObstacleUsesTime) {
  const auto chain = slider();
  Scene s;
  s.obstacles.push_back(
      {"m", Sphere{Vec3(3, 0, 0), 0.1}, WaypointMotion{{Vec3::Zero(), Vec3(-2.5, 0, 0)}, 1.0, 0.0}});
  EXPECT_FALSE(sense_all(chain, VecX::Zero(1), s, 0.0)[0].hit);
  const auto r = sense_all(chain, VecX::Zero(1), s, 2.5);
  ASSERT_TRUE(r[0].hit);
  EXPECT_NEAR(r[0].hit->distance, 0.3, 1e-12);
}
