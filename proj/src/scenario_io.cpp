#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "rcwbc/errors.hpp"
#include "rcwbc/sim.hpp"
#include "yaml_util.hpp"

namespace rcwbc {

namespace {

using namespace rcwbc::yaml;

PhaseKind parse_phase_kind(const YAML::Node& n, const std::string& ctx) {
  const std::string k = as_string(n, ctx);
  if (k == "initialize") return PhaseKind::kInitialize;
  if (k == "balance") return PhaseKind::kBalance;
  if (k == "swing_com") return PhaseKind::kSwingCom;
  if (k == "squat") return PhaseKind::kSquat;
  throw ParseError(ctx + ": unknown phase '" + k + "'", line_of(n));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  const YAML::Node n = parse_document(text);
  const std::string ctx = "scenario";
  check_keys(n,
             {"name", "model", "controller", "initial", "phases", "pushes", "sim_dt", "control_dt", "total_time",
              "baumgarte", "base_frame", "lateral_frame"},
             ctx);
  Scenario s;
  s.name = n["name"] ? as_string(n["name"], ctx + ".name") : "scenario";
  s.model_path = resolve(base_dir, as_string(require(n, "model", ctx), ctx + ".model"));
  s.controller_path = resolve(base_dir, as_string(require(n, "controller", ctx), ctx + ".controller"));
  if (n["sim_dt"]) s.sim_dt = as_double(n["sim_dt"], ctx + ".sim_dt");
  if (n["control_dt"]) s.control_dt = as_double(n["control_dt"], ctx + ".control_dt");
  if (n["total_time"]) s.total_time = as_double(n["total_time"], ctx + ".total_time");
  if (n["baumgarte"]) s.baumgarte = as_double(n["baumgarte"], ctx + ".baumgarte");
  if (n["base_frame"]) s.base_frame = as_string(n["base_frame"], ctx + ".base_frame");
  if (n["lateral_frame"]) s.lateral_frame = as_string(n["lateral_frame"], ctx + ".lateral_frame");
  if (n["initial"]) {
    const YAML::Node in = n["initial"];
    check_keys(in, {"knee_bend", "joint_angles"}, ctx + ".initial");
    if (in["knee_bend"]) s.initial.knee_bend = as_double(in["knee_bend"], ctx + ".initial.knee_bend");
    if (in["joint_angles"]) {
      require_map(in["joint_angles"], ctx + ".initial.joint_angles");
      for (const auto& kv : in["joint_angles"])
        s.initial.joint_angles[kv.first.as<std::string>()] = as_double(kv.second, ctx + ".initial.joint_angles");
    }
  }
  const YAML::Node phases = require(n, "phases", ctx);
  require_sequence(phases, ctx + ".phases");
  int i = 0;
  for (const auto& p : phases) {
    const std::string pc = ctx + ".phases[" + std::to_string(i++) + "]";
    check_keys(p, {"kind", "duration", "amplitude", "period"}, pc);
    Phase ph;
    ph.kind = parse_phase_kind(require(p, "kind", pc), pc + ".kind");
    ph.duration = as_double(require(p, "duration", pc), pc + ".duration");
    if (p["amplitude"]) ph.amplitude = as_double(p["amplitude"], pc + ".amplitude");
    if (p["period"]) ph.period = as_double(p["period"], pc + ".period");
    s.phases.push_back(ph);
  }
  if (n["pushes"]) {
    require_sequence(n["pushes"], ctx + ".pushes");
    i = 0;
    for (const auto& p : n["pushes"]) {
      const std::string pc = ctx + ".pushes[" + std::to_string(i++) + "]";
      check_keys(p, {"time", "duration", "frame", "force"}, pc);
      Push push;
      push.time = as_double(require(p, "time", pc), pc + ".time");
      push.duration = as_double(require(p, "duration", pc), pc + ".duration");
      push.frame = as_string(require(p, "frame", pc), pc + ".frame");
      push.force = as_vec3(require(p, "force", pc), pc + ".force");
      s.pushes.push_back(push);
    }
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line_of(n));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

void write_log_csv(const TrajectoryLog& log, const std::filesystem::path& path, int log_every) {
  if (log_every < 1) throw ValidationError("log decimation must be at least 1");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out.precision(12);
  out << "time,phase,com_x,com_y,com_z,com_ref_x,com_ref_y,com_ref_z,roll,pitch,yaw,roll_ref,pitch_ref,yaw_ref,"
         "base_z,base_z_ref,internal_velocity,internal_position,cone_margin,qp_status,qp_iterations,kkt_residual,"
         "push_force";
  for (const auto& n : log.q_names) out << ",q_" << n;
  for (const auto& n : log.v_names) out << ",v_" << n;
  for (const auto& n : log.v_names) out << ",qdd_" << n;
  for (const auto& f : log.contact_frames)
    for (const char* c : {"nx", "ny", "nz", "fx", "fy", "fz"}) out << ",F_" << f << "_" << c;
  for (const auto& n : log.actuated_names) out << ",tau_" << n;
  out << '\n';
  const auto vec = [&](const auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << v(i);
  };
  for (std::size_t i = 0; i < log.rows.size(); i += log_every) {
    const LogRow& r = log.rows[i];
    out << r.time << ',' << log.phase_names[r.phase];
    vec(r.com);
    vec(r.com_ref);
    vec(r.rpy);
    vec(r.rpy_ref);
    out << ',' << r.base_height << ',' << r.base_height_ref << ',' << r.internal_velocity << ','
        << r.internal_position << ',' << r.cone_margin << ',' << to_string(r.status) << ',' << r.iterations << ','
        << r.kkt_residual << ',' << r.push;
    vec(r.q);
    vec(r.v);
    vec(r.qdd);
    vec(r.forces);
    vec(r.tau);
    out << '\n';
  }
}

void write_summary(const TrajectoryLog& log, const RunSummary& s, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  YAML::Emitter e;
  e.SetDoublePrecision(8);
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << log.scenario;
  e << YAML::Key << "ticks" << YAML::Value << s.ticks;
  e << YAML::Key << "completed" << YAML::Value << !log.failed;
  if (log.failed) {
    e << YAML::Key << "failure" << YAML::Value << log.failure;
    if (!log.failure_block.empty()) e << YAML::Key << "failure_block" << YAML::Value << log.failure_block;
  }
  e << YAML::Key << "phases" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : s.phases) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << p.name;
    e << YAML::Key << "start" << YAML::Value << p.start;
    e << YAML::Key << "end" << YAML::Value << p.end;
    e << YAML::Key << "com_rms" << YAML::Value << p.com_rms;
    e << YAML::Key << "base_height_rms" << YAML::Value << p.height_rms;
    e << YAML::Key << "rpy_max_error_deg" << YAML::Value << p.rpy_max_deg;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "constraints" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_internal_velocity" << YAML::Value << s.max_internal_velocity;
  e << YAML::Key << "max_internal_position" << YAML::Value << s.max_internal_position;
  e << YAML::Key << "min_cone_margin" << YAML::Value << s.min_cone_margin;
  e << YAML::EndMap;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "non_optimal_ticks" << YAML::Value << s.non_optimal_ticks;
  e << YAML::Key << "mean_iterations" << YAML::Value << s.mean_iterations;
  e << YAML::Key << "max_iterations" << YAML::Value << s.max_iterations;
  e << YAML::EndMap;
  e << YAML::EndMap;
  std::ofstream out(path);
  out << e.c_str() << '\n';
}

}  // namespace rcwbc
