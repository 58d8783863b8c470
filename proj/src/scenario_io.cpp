#include "nsbavoid/scenario_io.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

namespace nsbavoid {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ScenarioError(field, message);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<document>" : path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  ok.insert("comment");
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) fail(join(path, key), "unknown key");
    if (key == "comment" && !value.is_string()) fail(join(path, key), "expected a string");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(join(path, key), "missing required key");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(path, key)) : fallback;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
  return {number(v[0], index(path, 0)), number(v[1], index(path, 1)), number(v[2], index(path, 2))};
}

VecX vecx(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  VecX out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], index(path, i));
  return out;
}

/// Row-major 3x3 matrix.
Mat3 mat3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected 3 rows of 3 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(v[static_cast<std::size_t>(r)], index(path, static_cast<std::size_t>(r))).transpose();
  return m;
}

std::vector<Vec3> points(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of points");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(vec3(v[i], index(path, i)));
  return out;
}

TaskPoint task_point(const json& v, const std::string& path) {
  check_keys(v, path, {"link", "offset"});
  TaskPoint tp;
  tp.link_index = count(require(v, path, "link"), join(path, "link"));
  if (v.contains("offset")) tp.offset = vec3(v.at("offset"), join(path, "offset"));
  return tp;
}

KinematicChain parse_chain(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "youbot") return youbot_chain();
    fail(path, "unknown built-in chain '" + v.get<std::string>() + "'");
  }
  check_keys(v, path, {"name", "base", "joints"});
  KinematicChain chain;
  if (v.contains("name")) chain.name = text(v.at("name"), join(path, "name"));
  if (v.contains("base")) {
    const std::string bp = join(path, "base");
    const json& b = v.at("base");
    check_keys(b, bp, {"origin", "rotation"});
    if (b.contains("origin")) chain.base.origin = vec3(b.at("origin"), join(bp, "origin"));
    if (b.contains("rotation")) chain.base.rotation = mat3(b.at("rotation"), join(bp, "rotation"));
  }
  const std::string jp = join(path, "joints");
  const json& joints = require(v, path, "joints");
  if (!joints.is_array() || joints.empty()) fail(jp, "expected a non-empty array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string p = index(jp, i);
    const json& j = joints[i];
    check_keys(j, p, {"type", "theta", "d", "alpha", "a", "limits"});
    DHJoint joint;
    const std::string type = text(require(j, p, "type"), join(p, "type"));
    if (type == "revolute") {
      joint.kind = JointKind::Revolute;
    } else if (type == "prismatic") {
      joint.kind = JointKind::Prismatic;
    } else {
      fail(join(p, "type"), "expected 'revolute' or 'prismatic'");
    }
    joint.theta = number_or(j, p, "theta", 0.0);
    joint.d = number_or(j, p, "d", 0.0);
    joint.alpha = number_or(j, p, "alpha", 0.0);
    joint.a = number_or(j, p, "a", 0.0);
    if (j.contains("limits")) {
      const json& lim = j.at("limits");
      if (!lim.is_array() || lim.size() != 2) fail(join(p, "limits"), "expected [min, max]");
      joint.limits = {number(lim[0], join(p, "limits[0]")), number(lim[1], join(p, "limits[1]"))};
    }
    chain.joints.push_back(joint);
  }
  return chain;
}

std::vector<SensorMount> parse_sensors(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  std::vector<SensorMount> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = index(path, i);
    const json& s = v[i];
    check_keys(s, p, {"link", "offset", "field_of_view", "rest_length", "threshold", "suppress_near"});
    SensorMount m;
    m.link_index = count(require(s, p, "link"), join(p, "link"));
    if (s.contains("offset")) m.offset = vec3(s.at("offset"), join(p, "offset"));
    m.field_of_view = number(require(s, p, "field_of_view"), join(p, "field_of_view"));
    m.rest_length = number(require(s, p, "rest_length"), join(p, "rest_length"));
    m.threshold = number(require(s, p, "threshold"), join(p, "threshold"));
    if (s.contains("suppress_near")) {
      const std::string sp = join(p, "suppress_near");
      const json& r = s.at("suppress_near");
      check_keys(r, sp, {"obstacle", "distance", "from"});
      SuppressionRule rule;
      rule.obstacle_id = text(require(r, sp, "obstacle"), join(sp, "obstacle"));
      rule.distance = number(require(r, sp, "distance"), join(sp, "distance"));
      if (r.contains("from")) {
        const TaskPoint from = task_point(r.at("from"), join(sp, "from"));
        rule.reference_link = from.link_index;
        rule.reference_offset = from.offset;
      }
      m.suppression = rule;
    }
    out.push_back(m);
  }
  return out;
}

Scene parse_scene(const json& v, const std::string& path) {
  check_keys(v, path, {"obstacles"});
  Scene scene;
  if (!v.contains("obstacles")) return scene;
  const std::string op = join(path, "obstacles");
  const json& obs = v.at("obstacles");
  if (!obs.is_array()) fail(op, "expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string p = index(op, i);
    const json& o = obs[i];
    if (!o.is_object()) fail(p, "expected an object");
    Obstacle obstacle;
    obstacle.id = text(require(o, p, "id"), join(p, "id"));
    const std::string type = text(require(o, p, "type"), join(p, "type"));
    if (type == "sphere") {
      check_keys(o, p, {"id", "type", "center", "radius", "motion"});
      obstacle.shape = Sphere{vec3(require(o, p, "center"), join(p, "center")),
                              number(require(o, p, "radius"), join(p, "radius"))};
    } else if (type == "box") {
      check_keys(o, p, {"id", "type", "center", "half_extents", "orientation", "motion"});
      Box b;
      b.center = vec3(require(o, p, "center"), join(p, "center"));
      b.half_extents = vec3(require(o, p, "half_extents"), join(p, "half_extents"));
      if (o.contains("orientation")) b.orientation = mat3(o.at("orientation"), join(p, "orientation"));
      obstacle.shape = b;
    } else if (type == "cylinder") {
      check_keys(o, p, {"id", "type", "center", "axis", "radius", "half_height", "motion"});
      Cylinder c;
      c.center = vec3(require(o, p, "center"), join(p, "center"));
      if (o.contains("axis")) c.axis = vec3(o.at("axis"), join(p, "axis"));
      c.radius = number(require(o, p, "radius"), join(p, "radius"));
      c.half_height = number(require(o, p, "half_height"), join(p, "half_height"));
      obstacle.shape = c;
    } else {
      fail(join(p, "type"), "expected 'sphere', 'box' or 'cylinder'");
    }
    if (o.contains("motion")) {
      const std::string mp = join(p, "motion");
      const json& m = o.at("motion");
      check_keys(m, mp, {"waypoints", "speed", "start_time"});
      WaypointMotion motion;
      motion.waypoints = points(require(m, mp, "waypoints"), join(mp, "waypoints"));
      motion.speed = number_or(m, mp, "speed", 0.0);
      motion.start_time = number_or(m, mp, "start_time", 0.0);
      obstacle.motion = motion;
    }
    scene.obstacles.push_back(std::move(obstacle));
  }
  return scene;
}

ReferencePath parse_path(const json& v, const std::string& path) {
  check_keys(v, path, {"task_point", "waypoints", "speed", "hold"});
  ReferencePath rp;
  rp.task_point = task_point(require(v, path, "task_point"), join(path, "task_point"));
  if (v.contains("hold")) {
    if (v.contains("waypoints")) fail(join(path, "hold"), "'hold' and 'waypoints' are exclusive");
    rp.hold = true;
    rp.waypoints = {vec3(v.at("hold"), join(path, "hold"))};
  } else {
    rp.waypoints = points(require(v, path, "waypoints"), join(path, "waypoints"));
    rp.speed = number_or(v, path, "speed", 0.0);
  }
  return rp;
}

Supervisor parse_supervisor(const json& v, const std::string& path) {
  check_keys(v, path, {"type", "K", "eps"});
  const std::string type = text(require(v, path, "type"), join(path, "type"));
  if (type == "arctan") return ArctanSupervisor{number(require(v, path, "K"), join(path, "K"))};
  if (type == "piecewise") {
    return PiecewiseSupervisor{number(require(v, path, "eps"), join(path, "eps"))};
  }
  if (type == "crisp") return CrispSupervisor{};
  fail(join(path, "type"), "expected 'arctan', 'piecewise' or 'crisp'");
}

ApfGains parse_apf(const json& v, const std::string& path) {
  check_keys(v, path, {"eta", "rho_0", "k_p", "max_force", "control_points"});
  ApfGains g;
  g.eta = number(require(v, path, "eta"), join(path, "eta"));
  g.rho_0 = number(require(v, path, "rho_0"), join(path, "rho_0"));
  g.k_p = number(require(v, path, "k_p"), join(path, "k_p"));
  g.max_force = number_or(v, path, "max_force", g.max_force);
  if (v.contains("control_points")) {
    const std::string cp = join(path, "control_points");
    const json& pts = v.at("control_points");
    if (!pts.is_array()) fail(cp, "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) g.control_points.push_back(task_point(pts[i], index(cp, i)));
  }
  return g;
}

void parse_gains(const json& v, const std::string& path, RobotSpec& robot) {
  check_keys(v, path, {"gamma_o", "gamma_g", "t_s", "supervisor", "damping", "max_joint_velocity", "apf"});
  ControllerGains& g = robot.gains;
  g.gamma_o = number(require(v, path, "gamma_o"), join(path, "gamma_o"));
  g.gamma_g = number(require(v, path, "gamma_g"), join(path, "gamma_g"));
  g.t_s = number(require(v, path, "t_s"), join(path, "t_s"));
  g.supervisor = parse_supervisor(require(v, path, "supervisor"), join(path, "supervisor"));
  g.damping = number_or(v, path, "damping", kDefaultDamping);
  if (v.contains("max_joint_velocity") && !v.at("max_joint_velocity").is_null()) {
    g.max_joint_velocity = vecx(v.at("max_joint_velocity"), join(path, "max_joint_velocity"));
  }
  if (v.contains("apf")) robot.apf = parse_apf(v.at("apf"), join(path, "apf"));
}

Envelope parse_envelope(const json& v, const std::string& path) {
  check_keys(v, path, {"link", "offset", "axis", "radius", "half_height"});
  Envelope e;
  e.anchor.link_index = count(require(v, path, "link"), join(path, "link"));
  if (v.contains("offset")) e.anchor.offset = vec3(v.at("offset"), join(path, "offset"));
  if (v.contains("axis")) e.axis = vec3(v.at("axis"), join(path, "axis"));
  e.radius = number(require(v, path, "radius"), join(path, "radius"));
  e.half_height = number(require(v, path, "half_height"), join(path, "half_height"));
  if (!(e.radius > 0.0) || !(e.half_height > 0.0)) fail(path, "radius and half_height must be positive");
  return e;
}

RobotSpec parse_robot(const json& v, const std::string& prefix) {
  RobotSpec robot;
  if (v.contains("name")) robot.name = text(v.at("name"), join(prefix, "name"));
  robot.chain = parse_chain(require(v, prefix, "chain"), join(prefix, "chain"));
  robot.chain.sensors = parse_sensors(require(v, prefix, "sensors"), join(prefix, "sensors"));
  robot.path = parse_path(require(v, prefix, "path"), join(prefix, "path"));
  parse_gains(require(v, prefix, "gains"), join(prefix, "gains"), robot);
  const std::string controller = text(require(v, prefix, "controller"), join(prefix, "controller"));
  if (controller == "nsb") {
    robot.controller = ControllerKind::Nsb;
  } else if (controller == "apf") {
    robot.controller = ControllerKind::Apf;
  } else {
    fail(join(prefix, "controller"), "expected 'nsb' or 'apf'");
  }
  robot.initial_q = vecx(require(v, prefix, "initial_q"), join(prefix, "initial_q"));
  if (v.contains("envelope")) robot.envelope = parse_envelope(v.at("envelope"), join(prefix, "envelope"));
  return robot;
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("<document>", e.what());
  }
}

Scenario parse_scenario(const json& doc) {
  Scenario s;
  const bool multi = doc.is_object() && doc.contains("robots");
  if (multi) {
    check_keys(doc, "", {"name", "scene", "duration", "overrides", "robots"});
  } else {
    check_keys(doc, "", {"name", "chain", "sensors", "scene", "path", "gains", "controller",
                         "duration", "initial_q", "overrides", "envelope"});
  }
  if (doc.contains("name")) s.name = text(doc.at("name"), "name");
  s.scene = doc.contains("scene") ? parse_scene(doc.at("scene"), "scene") : Scene{};
  s.duration = number(require(doc, "", "duration"), "duration");
  if (doc.contains("overrides")) {
    const json& o = doc.at("overrides");
    check_keys(o, "overrides", {"allow_rest_length_beyond_fov"});
    if (o.contains("allow_rest_length_beyond_fov")) {
      s.overrides.allow_rest_length_beyond_fov =
          boolean(o.at("allow_rest_length_beyond_fov"), "overrides.allow_rest_length_beyond_fov");
    }
  }

  if (multi) {
    const json& robots = doc.at("robots");
    if (!robots.is_array() || robots.empty()) fail("robots", "expected a non-empty array");
    for (std::size_t i = 0; i < robots.size(); ++i) {
      const std::string p = index("robots", i);
      check_keys(robots[i], p, {"name", "chain", "sensors", "path", "gains", "controller",
                                "initial_q", "envelope"});
      RobotSpec r = parse_robot(robots[i], p);
      if (!robots[i].contains("name")) r.name = "robot" + std::to_string(i);
      s.robots.push_back(std::move(r));
    }
  } else {
    s.robots.push_back(parse_robot(doc, ""));
  }

  try {
    s.validate();
  } catch (const ScenarioError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ScenarioError(e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(load_json(path)); }

std::filesystem::path bundled_scenario(const std::string& file_name) {
  if (const char* dir = std::getenv("NSBAVOID_SCENARIO_DIR")) return std::filesystem::path(dir) / file_name;
  return std::filesystem::path(NSBAVOID_SCENARIO_DIR) / file_name;
}

}  // namespace nsbavoid
