#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "nsbavoid/scenario_io.hpp"

using namespace nsbavoid;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "comment": "two sensors, one sphere",
    "chain": "youbot",
    "sensors": [
      {"link": 2, "offset": [0.123, 0.19, -0.05], "field_of_view": 1.0, "rest_length": 0.9, "threshold": 0.4},
      {"link": 2, "offset": [0.123, -0.19, -0.05], "field_of_view": 1.0, "rest_length": 0.9, "threshold": 0.4,
       "suppress_near": {"obstacle": "ball", "distance": 0.05, "from": {"link": 7, "offset": [0, 0, 0]}}}
    ],
    "scene": {"obstacles": [
      {"id": "ball", "type": "sphere", "center": [2.5, 2.9, -0.05], "radius": 0.15},
      {"id": "desk", "type": "box", "center": [1, 1, 0], "half_extents": [0.3, 0.2, 0.4],
       "motion": {"waypoints": [[0, 0, 0], [1, 0, 0]], "speed": 0.1, "start_time": 2}},
      {"id": "post", "type": "cylinder", "center": [0, 3, 0], "axis": [0, 0, 1], "radius": 0.2, "half_height": 0.9}
    ]},
    "path": {"task_point": {"link": 1}, "waypoints": [[0, 2.8, 0], [5, 2.8, 0]], "speed": 0.2},
    "gains": {"gamma_o": 1, "gamma_g": 2, "t_s": 0.001, "supervisor": {"type": "arctan", "K": 20},
              "apf": {"eta": 0.05, "rho_0": 0.9, "k_p": 2}},
    "controller": "nsb",
    "duration": 1.5,
    "initial_q": [0, 2.8, 0, 0, 0, 0, 0, 0]
  })");
}

std::string error_field(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(ScenarioIo, ParsesMinimalDocument) {
  const Scenario s = parse_scenario(minimal());
  ASSERT_EQ(s.robots.size(), 1u);
  const RobotSpec& r = s.robots[0];
  EXPECT_EQ(r.chain.dof(), 8u);
  ASSERT_EQ(r.chain.sensors.size(), 2u);
  EXPECT_EQ(r.chain.sensors[0].link_index, 2u);
  EXPECT_EQ(r.chain.sensors[0].offset, Vec3(0.123, 0.19, -0.05));
  ASSERT_TRUE(r.chain.sensors[1].suppression);
  EXPECT_EQ(r.chain.sensors[1].suppression->obstacle_id, "ball");
  EXPECT_EQ(r.chain.sensors[1].suppression->reference_link, std::optional<std::size_t>(7));
  EXPECT_FALSE(r.chain.sensors[0].suppression);
  EXPECT_EQ(s.scene.obstacles.size(), 3u);
  EXPECT_TRUE(std::holds_alternative<Box>(s.scene.obstacles[1].shape));
  ASSERT_TRUE(s.scene.obstacles[1].motion);
  EXPECT_EQ(s.scene.obstacles[1].motion->start_time, 2.0);
  EXPECT_TRUE(std::holds_alternative<Cylinder>(s.scene.obstacles[2].shape));
  EXPECT_EQ(r.path.task_point.link_index, 1u);
  EXPECT_EQ(r.path.speed, 0.2);
  EXPECT_EQ(std::get<ArctanSupervisor>(r.gains.supervisor).K, 20.0);
  ASSERT_TRUE(r.apf);
  EXPECT_EQ(r.apf->rho_0, 0.9);
  EXPECT_EQ(r.controller, ControllerKind::Nsb);
  EXPECT_EQ(s.duration, 1.5);
  EXPECT_EQ(s.tick_count(), 1500u);
}

TEST(ScenarioIo, UnknownKeysNameTheirPath) {
  json d = minimal();
  d["colour"] = "red";
  EXPECT_EQ(error_field(d), "colour");
  d = minimal();
  d["gains"]["supervisor"]["k"] = 3;
  EXPECT_EQ(error_field(d), "gains.supervisor.k");
  d = minimal();
  d["sensors"][1]["suppress_near"]["from"]["offest"] = json::array({0, 0, 0});
  EXPECT_EQ(error_field(d), "sensors[1].suppress_near.from.offest");
  d = minimal();
  d["scene"]["obstacles"][0]["half_extents"] = json::array({1, 1, 1});
  EXPECT_EQ(error_field(d), "scene.obstacles[0].half_extents");
}

TEST(ScenarioIo, CommentsAllowedEverywhere) {
  json d = minimal();
  d["gains"]["comment"] = "tuned";
  d["path"]["task_point"]["comment"] = "base";
  d["scene"]["obstacles"][1]["motion"]["comment"] = "slides";
  EXPECT_EQ(error_field(d), "");
  d["gains"]["comment"] = 3;
  EXPECT_EQ(error_field(d), "gains.comment");
}

TEST(ScenarioIo, TypeAndRangeErrors) {
  json d = minimal();
  d["gains"]["t_s"] = "fast";
  EXPECT_EQ(error_field(d), "gains.t_s");
  d = minimal();
  d["gains"]["t_s"] = -0.1;
  EXPECT_EQ(error_field(d), "gains.t_s");
  d = minimal();
  d["gains"]["supervisor"] = {{"type", "piecewise"}};
  EXPECT_EQ(error_field(d), "gains.supervisor.eps");
  d = minimal();
  d["sensors"][0]["threshold"] = 0.95;
  EXPECT_EQ(error_field(d), "sensors[0].rest_length");
  d = minimal();
  d["initial_q"] = json::array({0, 0});
  EXPECT_EQ(error_field(d), "initial_q");
  d = minimal();
  d["controller"] = "pid";
  EXPECT_EQ(error_field(d), "controller");
  d = minimal();
  d.erase("duration");
  EXPECT_EQ(error_field(d), "duration");
  d = minimal();
  d["scene"]["obstacles"][0]["type"] = "cone";
  EXPECT_EQ(error_field(d), "scene.obstacles[0].type");
  d = minimal();
  d["path"]["hold"] = json::array({0, 0, 0});
  EXPECT_NE(error_field(d), "");
  d = minimal();
  d["sensors"][1]["suppress_near"]["from"]["link"] = 8;
  EXPECT_EQ(error_field(d), "sensors[1].suppress_near.from.link");
  EXPECT_EQ(error_field(json::array()), "<document>");
}

TEST(ScenarioIo, RestLengthOverride) {
  json d = minimal();
  d["sensors"][0]["rest_length"] = 5.0;
  EXPECT_EQ(error_field(d), "sensors[0].rest_length");
  d["overrides"] = {{"allow_rest_length_beyond_fov", true}};
  EXPECT_EQ(error_field(d), "");
}

TEST(ScenarioIo, CustomChain) {
  json d = minimal();
  d["chain"] = json::parse(R"({
    "name": "slider",
    "base": {"origin": [1, 2, 3], "rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
    "joints": [
      {"type": "prismatic", "alpha": 1.5707963267948966, "limits": [-5, 5]},
      {"type": "revolute", "a": 0.5}
    ]
  })");
  d["sensors"] = json::parse(
      R"([{"link": 1, "field_of_view": 1.0, "rest_length": 0.9, "threshold": 0.4}])");
  d["initial_q"] = json::array({0, 0});
  const Scenario s = parse_scenario(d);
  const auto& c = s.robots[0].chain;
  EXPECT_EQ(c.name, "slider");
  EXPECT_EQ(c.base.origin, Vec3(1, 2, 3));
  EXPECT_EQ(c.joints[0].kind, JointKind::Prismatic);
  EXPECT_EQ(c.joints[0].limits.max, 5.0);
  EXPECT_EQ(c.joints[1].a, 0.5);

  d["chain"]["joints"][1]["type"] = "spherical";
  EXPECT_EQ(error_field(d), "chain.joints[1].type");
}

TEST(ScenarioIo, MultiRobotLayout) {
  json robot = minimal();
  json d = {{"duration", 1.0}, {"scene", robot["scene"]}};
  for (const char* k : {"chain", "sensors", "path", "gains", "controller", "initial_q"}) {
    d["robots"][0][k] = robot[k];
  }
  d["robots"][1] = d["robots"][0];
  d["robots"][1]["name"] = "second";
  d["robots"][0]["envelope"] = {{"link", 1}, {"radius", 0.35}, {"half_height", 0.1}};
  const Scenario s = parse_scenario(d);
  ASSERT_EQ(s.robots.size(), 2u);
  EXPECT_EQ(s.robots[0].name, "robot0");
  EXPECT_EQ(s.robots[1].name, "second");
  ASSERT_TRUE(s.robots[0].envelope);
  EXPECT_EQ(s.robots[0].envelope->anchor.link_index, 1u);

  d["robots"][1]["gains"]["t_s"] = 0.01;
  EXPECT_EQ(error_field(d), "robots[1].gains.t_s");
  d["robots"][1]["gains"]["t_s"] = 0.001;
  d["robots"][1]["bogus"] = 1;
  EXPECT_EQ(error_field(d), "robots[1].bogus");
  d["robots"][1].erase("bogus");
  d["chain"] = "youbot";
  EXPECT_EQ(error_field(d), "chain");
}

TEST(ScenarioIo, LoadJsonReportsSyntaxErrors) {
  const auto path = std::filesystem::temp_directory_path() / "nsbavoid_bad.json";
  std::ofstream(path) << "{\"duration\": 1,";
  try {
    load_json(path);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.field(), "<document>");
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_json("/nonexistent/nowhere.json"), std::runtime_error);
}

TEST(ScenarioIo, BundledScenariosLoad) {
  for (const char* f : {"case1.json", "case2.json", "case3.json", "case4.json", "case5_ball.json",
                        "case5_table.json", "case5_table_box.json", "line_tracking.json"}) {
    EXPECT_NO_THROW(load_scenario(bundled_scenario(f))) << f;
  }
  const Scenario case1 = load_scenario(bundled_scenario("case1.json"));
  EXPECT_EQ(case1.robots[0].chain.sensors.size(), 8u);
  const Scenario case5 = load_scenario(bundled_scenario("case5_table_box.json"));
  EXPECT_EQ(case5.robots[0].chain.sensors.size(), 17u);
  EXPECT_EQ(load_scenario(bundled_scenario("case2.json")).robots.size(), 2u);
}
