#include <fstream>
#include <sstream>

#include "rcwbc/errors.hpp"
#include "rcwbc/wbc.hpp"
#include "yaml_util.hpp"

namespace rcwbc {

namespace {

using namespace rcwbc::yaml;

double optional_double(const YAML::Node& n, const char* key, double fallback, const std::string& ctx) {
  return n[key] ? as_double(n[key], ctx + "." + key) : fallback;
}

WbcConfig parse_wbc(const YAML::Node& n) {
  const std::string ctx = "wbc";
  check_keys(n, {"lambda_q", "lambda_f", "dt", "velocity_time_constant", "position_time_constant", "velocity_clamp",
                 "gravity", "qp"},
             ctx);
  WbcConfig c;
  c.lambda_q = optional_double(n, "lambda_q", c.lambda_q, ctx);
  c.lambda_f = optional_double(n, "lambda_f", c.lambda_f, ctx);
  c.dt = optional_double(n, "dt", c.dt, ctx);
  const double tv = optional_double(n, "velocity_time_constant", 1.0 / c.velocity_decay, ctx);
  const double tp = optional_double(n, "position_time_constant", 1.0 / c.position_decay, ctx);
  if (tv < 0.0 || tp < 0.0) throw ParseError(ctx + ": time constants must be non-negative", line_of(n));
  c.velocity_decay = tv > 0.0 ? 1.0 / tv : 0.0;
  c.position_decay = tp > 0.0 ? 1.0 / tp : 0.0;
  c.velocity_clamp = optional_double(n, "velocity_clamp", c.velocity_clamp, ctx);
  if (n["gravity"]) c.gravity = as_vec3(n["gravity"], ctx + ".gravity");
  if (n["qp"]) {
    const YAML::Node q = n["qp"];
    check_keys(q, {"tolerance", "max_iterations"}, ctx + ".qp");
    c.qp.tolerance = optional_double(q, "tolerance", c.qp.tolerance, ctx + ".qp");
    if (q["max_iterations"]) c.qp.max_iterations = as<int>(q["max_iterations"], ctx + ".qp.max_iterations");
  }
  if (!(c.lambda_q > 0.0) || !(c.lambda_f > 0.0))
    throw ParseError(ctx + ": lambda_q and lambda_f must be positive", line_of(n));
  if (!(c.dt > 0.0)) throw ParseError(ctx + ": dt must be positive", line_of(n));
  return c;
}

TaskKind parse_kind(const YAML::Node& n, const std::string& ctx) {
  const std::string k = as_string(n, ctx);
  if (k == "frame") return TaskKind::kFrame;
  if (k == "com") return TaskKind::kCom;
  if (k == "icp") return TaskKind::kIcp;
  if (k == "joint") return TaskKind::kJoint;
  throw ParseError(ctx + ": unknown task kind '" + k + "'", line_of(n));
}

TaskSpec parse_task(const YAML::Node& n, const std::string& ctx) {
  check_keys(n, {"name", "kind", "frame", "joints", "rows", "weight", "kp", "kd"}, ctx);
  TaskSpec t;
  t.name = as_string(require(n, "name", ctx), ctx + ".name");
  t.kind = parse_kind(require(n, "kind", ctx), ctx + ".kind");
  if (t.kind == TaskKind::kFrame) t.frame = as_string(require(n, "frame", ctx), ctx + ".frame");
  if (t.kind == TaskKind::kJoint) {
    const YAML::Node j = require(n, "joints", ctx);
    require_sequence(j, ctx + ".joints");
    for (const auto& e : j) t.joints.push_back(as_string(e, ctx + ".joints"));
  }
  if (n["rows"]) {
    require_sequence(n["rows"], ctx + ".rows");
    for (const auto& e : n["rows"]) t.rows.push_back(as<int>(e, ctx + ".rows"));
  }
  t.weight = optional_double(n, "weight", t.weight, ctx);
  t.kp = optional_double(n, "kp", t.kp, ctx);
  t.kd = optional_double(n, "kd", t.kd, ctx);
  if (t.weight < 0.0) throw ParseError(ctx + ": weight must be non-negative", line_of(n));
  return t;
}

ContactSpec parse_contact(const YAML::Node& n, const std::string& ctx) {
  check_keys(n, {"frame", "dim", "unilateral", "mu", "half_lengths", "max_normal_force", "weight", "desired",
                 "hold_motion"},
             ctx);
  ContactSpec c;
  c.frame = as_string(require(n, "frame", ctx), ctx + ".frame");
  if (n["dim"]) c.dim = as<int>(n["dim"], ctx + ".dim");
  if (c.dim != 3 && c.dim != 6) throw ParseError(ctx + ": dim must be 3 or 6", line_of(n["dim"]));
  if (n["unilateral"]) c.unilateral = as<bool>(n["unilateral"], ctx + ".unilateral");
  if (n["hold_motion"]) c.hold_motion = as<bool>(n["hold_motion"], ctx + ".hold_motion");
  c.mu = optional_double(n, "mu", c.mu, ctx);
  if (n["half_lengths"]) {
    const auto h = as_doubles(n["half_lengths"], ctx + ".half_lengths", 2);
    c.half_length_x = h[0];
    c.half_length_y = h[1];
  }
  c.max_normal_force = optional_double(n, "max_normal_force", c.max_normal_force, ctx);
  c.weight = optional_double(n, "weight", c.weight, ctx);
  if (n["desired"]) {
    const auto d = as_doubles(n["desired"], ctx + ".desired", c.dim);
    c.desired = Eigen::Map<const VectorX>(d.data(), c.dim);
  }
  if (c.mu < 0.0 || c.weight < 0.0 || c.max_normal_force < 0.0)
    throw ParseError(ctx + ": mu, weight and max_normal_force must be non-negative", line_of(n));
  return c;
}

}  // namespace

ControllerConfig parse_controller_config(std::string_view text) {
  const YAML::Node root = parse_document(text);
  check_keys(root, {"wbc", "tasks", "contacts"}, "controller");
  ControllerConfig cfg;
  if (root["wbc"]) cfg.wbc = parse_wbc(root["wbc"]);
  if (root["tasks"]) {
    require_sequence(root["tasks"], "tasks");
    int i = 0;
    for (const auto& t : root["tasks"]) cfg.tasks.push_back(parse_task(t, "tasks[" + std::to_string(i++) + "]"));
  }
  if (root["contacts"]) {
    require_sequence(root["contacts"], "contacts");
    int i = 0;
    for (const auto& c : root["contacts"])
      cfg.contacts.push_back(parse_contact(c, "contacts[" + std::to_string(i++) + "]"));
  }
  return cfg;
}

ControllerConfig load_controller_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open controller file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_controller_config(ss.str());
}

}  // namespace rcwbc
