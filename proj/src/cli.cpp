#include "nsbavoid/cli.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>

#include "nsbavoid/scenario_io.hpp"

namespace nsbavoid {

using nlohmann::json;

namespace {

double parse_positive(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw ScenarioError(flag, "expected a number, got '" + text + "'");
  if (!(v > 0.0)) throw ScenarioError(flag, "must be positive");
  return v;
}

std::vector<json*> robot_docs(json& doc) {
  std::vector<json*> out;
  if (doc.contains("robots") && doc["robots"].is_array()) {
    for (auto& r : doc["robots"]) out.push_back(&r);
  } else {
    out.push_back(&doc);
  }
  return out;
}

json* gains_of(json& robot, const std::string& flag) {
  if (!robot.is_object() || !robot.contains("gains") || !robot["gains"].is_object()) {
    throw ScenarioError("gains", "missing; cannot apply " + flag);
  }
  return &robot["gains"];
}

void set_supervisor(json& doc, const std::string& type) {
  for (json* r : robot_docs(doc)) {
    json& g = *gains_of(*r, "--supervisor");
    json& s = g["supervisor"];
    if (!s.is_object()) s = json::object();
    s["type"] = type;
    if (type == "arctan" && !s.contains("K")) s["K"] = ArctanSupervisor{}.K;
    if (type == "piecewise" && !s.contains("eps")) s["eps"] = PiecewiseSupervisor{}.eps;
  }
}

void set_controller(json& doc, const std::string& kind) {
  for (json* r : robot_docs(doc)) (*r)["controller"] = kind;
}

struct OutputFile {
  std::filesystem::path path;
  std::string content;
};

/// Writes every file or none: content goes to temporaries first, which are
/// renamed into place once all writes succeeded.
void write_all(const std::vector<OutputFile>& files) {
  std::vector<std::filesystem::path> temps;
  try {
    for (const auto& f : files) {
      std::filesystem::create_directories(f.path.parent_path());
      std::filesystem::path tmp = f.path;
      tmp += ".partial";
      std::ofstream os(tmp, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
      temps.push_back(tmp);
      os << f.content;
      os.close();
      if (!os) throw std::runtime_error("failed writing " + tmp.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(temps[i], files[i].path);
}

std::string csv_text(const TrajectoryLog& log) {
  std::ostringstream os;
  write_csv(os, log);
  return os.str();
}

std::string trace_text(const TrajectoryLog& log) {
  std::ostringstream os;
  write_trace_csv(os, log);
  return os.str();
}

std::string trajectory_name(std::size_t i, const TrajectoryLog& log) {
  return i == 0 ? "trajectory.csv" : "trajectory_" + log.robot + ".csv";
}

struct Job {
  std::string label;
  json doc;
};

struct JobResult {
  Scenario scenario;
  std::vector<TrajectoryLog> logs;
  std::vector<Metrics> metrics;
  std::vector<std::string> warnings;
};

JobResult execute(const json& doc) {
  JobResult r;
  r.scenario = parse_scenario(doc);
  RunOptions options;
  options.on_limit = [&r](const std::string& robot, std::size_t joint, double t) {
    std::ostringstream os;
    os << "warning: robot '" << robot << "' joint q" << joint + 1 << " clamped to its limit at t="
       << t << " s";
    r.warnings.push_back(os.str());
  };
  r.logs = run(r.scenario, options);
  for (std::size_t i = 0; i < r.logs.size(); ++i) r.metrics.push_back(metrics(r.logs[i], r.scenario, i));
  return r;
}

void add_run_files(std::vector<OutputFile>& files, const std::filesystem::path& dir,
                   const JobResult& r, const json& config, bool trace) {
  json robots = json::array();
  for (std::size_t i = 0; i < r.logs.size(); ++i) {
    const std::string name = trajectory_name(i, r.logs[i]);
    files.push_back({dir / name, csv_text(r.logs[i])});
    if (trace) {
      const std::string tname = i == 0 ? "controller_trace.csv" : "controller_trace_" + r.logs[i].robot + ".csv";
      files.push_back({dir / tname, trace_text(r.logs[i])});
    }
    robots.push_back({{"name", r.logs[i].robot}, {"trajectory", name}, {"metrics", metrics_json(r.metrics[i])}});
  }
  json m = {{"scenario", r.scenario.name}, {"effective_config", config}, {"robots", robots}};
  files.push_back({dir / "metrics.json", m.dump(2) + "\n"});
  files.push_back({dir / "plot.gp", plot_script(r.scenario, r.logs.front())});
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NonFiniteStateError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonFinite;
  } catch (const ValidationError& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

json apply_overrides(json doc, const RunFlags& flags) {
  if (!doc.is_object()) throw ScenarioError("<document>", "expected an object");
  if (flags.supervisor) {
    const std::string& s = *flags.supervisor;
    if (s != "arctan" && s != "piecewise" && s != "crisp") {
      throw ScenarioError("--supervisor", "expected arctan, piecewise or crisp");
    }
    set_supervisor(doc, s);
  }
  if (flags.controller) {
    const std::string& c = *flags.controller;
    if (c != "nsb" && c != "apf") throw ScenarioError("--controller", "expected nsb or apf");
    set_controller(doc, c);
  }
  if (flags.ts) {
    const double ts = parse_positive(*flags.ts, "--ts");
    for (json* r : robot_docs(doc)) (*gains_of(*r, "--ts"))["t_s"] = ts;
  }
  if (flags.duration) doc["duration"] = parse_positive(*flags.duration, "--duration");
  return doc;
}

json effective_config(const json& doc, const RunFlags& flags) {
  json f = json::object();
  f["scenario"] = flags.scenario.string();
  if (flags.supervisor) f["supervisor"] = *flags.supervisor;
  if (flags.controller) f["controller"] = *flags.controller;
  if (flags.ts) f["ts"] = *flags.ts;
  if (flags.duration) f["duration"] = *flags.duration;
  if (flags.seed) f["seed"] = *flags.seed;
  return {{"flags", f}, {"scenario", doc}};
}

json metrics_json(const Metrics& m) {
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json by_obstacle = json::object();
  for (const auto& [id, d] : m.min_clearance_by_obstacle) by_obstacle[id] = finite(d);
  return {{"min_clearance", finite(m.min_clearance)},
          {"max_path_deviation", m.max_path_deviation},
          {"return_time", m.return_time ? json(*m.return_time) : json(nullptr)},
          {"chattering", m.chattering},
          {"final_goal_error", m.final_goal_error},
          {"min_clearance_by_obstacle", by_obstacle}};
}

std::string plot_script(const Scenario& scenario, const TrajectoryLog& log) {
  const std::size_t n = log.dof;
  const std::size_t x = n + 2, y = n + 3, xd = n + 5, yd = n + 6, sig = n + 8, lam = n + 9;
  const std::size_t v1 = n + 11, v2 = n + 12;
  std::ostringstream os;
  os << std::setprecision(9);
  os << "# gnuplot script; run with `gnuplot plot.gp` next to trajectory.csv\n"
     << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,700\n"
     << "set grid\n\n";

  os << "set output 'path.png'\n"
     << "set title '" << scenario.name << ": planned and executed path'\n"
     << "set xlabel 'x [m]'\nset ylabel 'y [m]'\nset size ratio -1\n";
  int object = 1;
  for (const auto& o : scenario.scene.obstacles) {
    const Shape shape = o.shape_at(0.0);
    if (const auto* s = std::get_if<Sphere>(&shape)) {
      os << "set object " << object++ << " circle at " << s->center.x() << "," << s->center.y()
         << " size " << s->radius << " fc rgb 'gray' fs solid 0.4\n";
    } else if (const auto* c = std::get_if<Cylinder>(&shape)) {
      os << "set object " << object++ << " circle at " << c->center.x() << "," << c->center.y()
         << " size " << c->radius << " fc rgb 'gray' fs solid 0.4\n";
    } else if (const auto* b = std::get_if<Box>(&shape)) {
      const Vec3 h = (b->orientation.cwiseAbs() * b->half_extents);
      os << "set object " << object++ << " rect from " << b->center.x() - h.x() << ","
         << b->center.y() - h.y() << " to " << b->center.x() + h.x() << "," << b->center.y() + h.y()
         << " fc rgb 'gray' fs solid 0.4\n";
    }
  }
  os << "plot 'trajectory.csv' every ::1 using " << xd << ":" << yd
     << " with lines dt 2 lw 2 title 'planned', \\\n"
     << "     '' every ::1 using " << x << ":" << y << " with lines lw 2 title 'executed'\n"
     << "unset object\nset size noratio\n\n";

  os << "set output 'sigma.png'\n"
     << "set title 'avoidance task'\nset xlabel 't [s]'\nset ylabel 'sigma [m^2]'\n"
     << "set y2label 'lambda'\nset y2tics\n"
     << "plot 'trajectory.csv' every ::1 using 1:" << sig << " with lines lw 2 title 'sigma', \\\n"
     << "     '' every ::1 using 1:" << lam << " axes x1y2 with lines title 'lambda'\n"
     << "unset y2tics\nunset y2label\n\n";

  os << "set output 'velocity.png'\n"
     << "set title 'joint velocity components'\nset xlabel 't [s]'\nset ylabel 'qdot'\n"
     << "plot 'trajectory.csv' every ::1 using 1:" << v1 << " with lines title 'qdot1'";
  if (n > 1) os << ", \\\n     '' every ::1 using 1:" << v2 << " with lines title 'qdot2'";
  os << "\n";
  return os.str();
}

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json doc = apply_overrides(load_json(flags.scenario), flags);
    const JobResult r = execute(doc);
    if (!flags.quiet) {
      for (const auto& w : r.warnings) err << w << '\n';
    }
    std::vector<OutputFile> files;
    add_run_files(files, flags.out, r, effective_config(doc, flags), flags.trace);
    write_all(files);
    if (!flags.quiet) {
      for (const auto& f : files) out << "wrote " << f.path.string() << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_compare(const RunFlags& flags, const std::vector<std::string>& controllers,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (controllers.size() < 2) throw std::invalid_argument("compare needs at least two controllers");
    const json base = apply_overrides(load_json(flags.scenario), flags);

    std::vector<Job> jobs;
    for (const auto& label : controllers) {
      json doc = base;
      if (label == "nsb") {
        set_controller(doc, "nsb");
      } else if (label == "nsb-arctan" || label == "nsb-piecewise" || label == "nsb-crisp") {
        set_controller(doc, "nsb");
        set_supervisor(doc, label.substr(4));
      } else if (label == "apf") {
        set_controller(doc, "apf");
      } else {
        throw std::invalid_argument("unknown controller '" + label +
                                    "' (expected nsb, nsb-arctan, nsb-piecewise, nsb-crisp or apf)");
      }
      jobs.push_back({label, std::move(doc)});
    }

    std::vector<std::future<JobResult>> futures;
    for (const auto& job : jobs) {
      futures.push_back(std::async(std::launch::async, [&job] { return execute(job.doc); }));
    }
    std::vector<JobResult> results;
    for (auto& f : futures) results.push_back(f.get());

    std::vector<OutputFile> files;
    std::ostringstream table;
    table << std::setprecision(9);
    table << "controller,robot,min_clearance,max_path_deviation,return_time,chattering,final_goal_error\n";
    json summary = json::array();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const std::string dir = std::to_string(j + 1) + "_" + jobs[j].label;
      add_run_files(files, flags.out / dir, results[j], effective_config(jobs[j].doc, flags), flags.trace);
      for (std::size_t i = 0; i < results[j].logs.size(); ++i) {
        const Metrics& m = results[j].metrics[i];
        table << jobs[j].label << ',' << results[j].logs[i].robot << ',' << m.min_clearance << ','
              << m.max_path_deviation << ',';
        if (m.return_time) table << *m.return_time;
        table << ',' << m.chattering << ',' << m.final_goal_error << '\n';
        summary.push_back({{"controller", jobs[j].label},
                           {"directory", dir},
                           {"robot", results[j].logs[i].robot},
                           {"metrics", metrics_json(m)}});
      }
      if (!flags.quiet) {
        for (const auto& w : results[j].warnings) err << jobs[j].label << ": " << w << '\n';
      }
    }
    files.push_back({flags.out / "comparison.csv", table.str()});
    json cmp = {{"effective_config", effective_config(base, flags)}, {"runs", summary}};
    files.push_back({flags.out / "comparison.json", cmp.dump(2) + "\n"});
    write_all(files);
    if (!flags.quiet) out << table.str();
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Null-space-based obstacle avoidance simulator"};
  app.require_subcommand(1);

  RunFlags flags;
  std::vector<std::string> controllers;
  std::string supervisor, controller, ts, duration, seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", flags.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
    sub->add_option("--ts", ts, "Sampling time override [s]");
    sub->add_option("--duration", duration, "Duration override [s]");
    sub->add_option("--seed", seed, "Reserved; scenarios are deterministic");
    sub->add_flag("--quiet", flags.quiet, "Suppress progress output and warnings");
    sub->add_flag("--trace", flags.trace, "Also write controller_trace.csv");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  add_common(run_cmd);
  run_cmd->add_option("--supervisor", supervisor, "Supervisor override")
      ->check(CLI::IsMember({"arctan", "piecewise", "crisp"}));
  run_cmd->add_option("--controller", controller, "Controller override")
      ->check(CLI::IsMember({"nsb", "apf"}));

  CLI::App* compare_cmd = app.add_subcommand("compare", "Run one scenario under several controllers");
  add_common(compare_cmd);
  compare_cmd->add_option("--controllers", controllers, "nsb, nsb-arctan, nsb-piecewise, nsb-crisp, apf")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitFailure);
  }

  auto set = [](std::optional<std::string>& dst, const std::string& v, CLI::App* sub, const char* name) {
    if (sub->count(name) > 0) dst = v;
  };
  CLI::App* active = run_cmd->parsed() ? run_cmd : compare_cmd;
  set(flags.ts, ts, active, "--ts");
  set(flags.duration, duration, active, "--duration");
  set(flags.seed, seed, active, "--seed");
  if (active == run_cmd) {
    set(flags.supervisor, supervisor, active, "--supervisor");
    set(flags.controller, controller, active, "--controller");
    return cmd_run(flags, out, err);
  }
  return cmd_compare(flags, controllers, out, err);
}

}  // namespace nsbavoid
