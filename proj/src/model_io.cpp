#include <fstream>
#include <sstream>

#include "rcwbc/errors.hpp"
#include "rcwbc/model.hpp"
#include "yaml_util.hpp"

namespace rcwbc {
namespace {

std::string at(const char* list, std::size_t i) { return std::string(list) + "[" + std::to_string(i) + "]"; }

LinkSpec parse_link(const YAML::Node& n, const std::string& ctx) {
  yaml::check_keys(n, {"name", "parent_joint", "mass", "com", "inertia"}, ctx);
  LinkSpec l;
  l.name = yaml::as_string(yaml::require(n, "name", ctx), ctx + ".name");
  l.parent_joint = yaml::as_string(yaml::require(n, "parent_joint", ctx), ctx + ".parent_joint");
  l.mass = yaml::as_double(yaml::require(n, "mass", ctx), ctx + ".mass");
  l.com = n["com"] ? yaml::as_vec3(n["com"], ctx + ".com") : Vector3::Zero();
  l.inertia = yaml::as_mat3(yaml::require(n, "inertia", ctx), ctx + ".inertia");
  return l;
}

JointSpec parse_joint(const YAML::Node& n, const std::string& ctx) {
  yaml::check_keys(n,
                   {"name", "type", "parent", "origin", "axis", "position_limits", "velocity_limit",
                    "torque_limits", "acceleration_limits"},
                   ctx);
  JointSpec j;
  j.name = yaml::as_string(yaml::require(n, "name", ctx), ctx + ".name");
  const std::string type = yaml::as_string(yaml::require(n, "type", ctx), ctx + ".type");
  if (type == "floating_base") {
    j.kind = JointKind::kFloatingBase;
    if (n["parent"]) j.parent_link = yaml::as_string(n["parent"], ctx + ".parent");
    return j;
  }
  if (type != "revolute") throw ParseError(ctx + ".type: unknown joint type '" + type + "'", yaml::line_of(n["type"]));
  j.kind = JointKind::kRevolute;
  j.parent_link = yaml::as_string(yaml::require(n, "parent", ctx), ctx + ".parent");
  j.origin = yaml::as_transform(n["origin"], ctx + ".origin");
  j.axis = yaml::as_vec3(yaml::require(n, "axis", ctx), ctx + ".axis");
  if (n["position_limits"]) j.position_limits = yaml::as_interval(n["position_limits"], ctx + ".position_limits");
  if (n["velocity_limit"]) j.velocity_limit = yaml::as_double(n["velocity_limit"], ctx + ".velocity_limit");
  if (n["torque_limits"]) j.torque_limits = yaml::as_interval(n["torque_limits"], ctx + ".torque_limits");
  if (n["acceleration_limits"])
    j.acceleration_limits = yaml::as_interval(n["acceleration_limits"], ctx + ".acceleration_limits");
  return j;
}

RollingContactPair parse_pair(const YAML::Node& n, const std::string& ctx) {
  yaml::check_keys(n, {"proximal", "distal", "r_proximal", "r_distal", "actuated"}, ctx);
  RollingContactPair p;
  p.proximal_joint = yaml::as_string(yaml::require(n, "proximal", ctx), ctx + ".proximal");
  p.distal_joint = yaml::as_string(yaml::require(n, "distal", ctx), ctx + ".distal");
  p.r_proximal = yaml::as_double(yaml::require(n, "r_proximal", ctx), ctx + ".r_proximal");
  p.r_distal = yaml::as_double(yaml::require(n, "r_distal", ctx), ctx + ".r_distal");
  const std::string side = n["actuated"] ? yaml::as_string(n["actuated"], ctx + ".actuated") : "distal";
  if (side == "distal") {
    p.actuated_side = ActuatedSide::kDistal;
  } else if (side == "proximal") {
    p.actuated_side = ActuatedSide::kProximal;
  } else {
    throw ParseError(ctx + ".actuated: expected 'proximal' or 'distal'", yaml::line_of(n["actuated"]));
  }
  return p;
}

TransmissionSpec parse_transmission(const YAML::Node& n, const std::string& ctx) {
  yaml::check_keys(n, {"joint", "kind", "r_fix", "r_rot", "gear_stages"}, ctx);
  TransmissionSpec t;
  t.joint = yaml::as_string(yaml::require(n, "joint", ctx), ctx + ".joint");
  const std::string kind = yaml::as_string(yaml::require(n, "kind", ctx), ctx + ".kind");
  if (kind == "hip_sheave") {
    t.kind = TransmissionKind::kHipSheave;
    t.r_fix = yaml::as_double(yaml::require(n, "r_fix", ctx), ctx + ".r_fix");
    t.r_rot = yaml::as_double(yaml::require(n, "r_rot", ctx), ctx + ".r_rot");
  } else if (kind == "knee_rolling") {
    t.kind = TransmissionKind::kKneeRolling;
    t.gear_stages = yaml::as_doubles(yaml::require(n, "gear_stages", ctx), ctx + ".gear_stages");
  } else {
    throw ParseError(ctx + ".kind: unknown transmission kind '" + kind + "'", yaml::line_of(n["kind"]));
  }
  return t;
}

}  // namespace

ModelSpec parse_model_spec(std::string_view text) {
  const YAML::Node root = yaml::parse_document(text);
  yaml::check_keys(root, {"name", "height", "links", "joints", "rolling_pairs", "transmissions", "contact_frames"},
                   "model");
  ModelSpec spec;
  if (root["name"]) spec.name = yaml::as_string(root["name"], "name");
  if (root["height"]) spec.height = yaml::as_double(root["height"], "height");
  const YAML::Node links = yaml::require(root, "links", "model");
  yaml::require_sequence(links, "links");
  for (std::size_t i = 0; i < links.size(); ++i) spec.links.push_back(parse_link(links[i], at("links", i)));
  const YAML::Node joints = yaml::require(root, "joints", "model");
  yaml::require_sequence(joints, "joints");
  for (std::size_t i = 0; i < joints.size(); ++i) spec.joints.push_back(parse_joint(joints[i], at("joints", i)));
  if (const YAML::Node pairs = root["rolling_pairs"]; pairs && !pairs.IsNull()) {
    yaml::require_sequence(pairs, "rolling_pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i)
      spec.rolling_pairs.push_back(parse_pair(pairs[i], at("rolling_pairs", i)));
  }
  if (const YAML::Node trans = root["transmissions"]; trans && !trans.IsNull()) {
    yaml::require_sequence(trans, "transmissions");
    for (std::size_t i = 0; i < trans.size(); ++i)
      spec.transmissions.push_back(parse_transmission(trans[i], at("transmissions", i)));
  }
  if (const YAML::Node frames = root["contact_frames"]; frames && !frames.IsNull()) {
    yaml::require_sequence(frames, "contact_frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string ctx = at("contact_frames", i);
      yaml::check_keys(frames[i], {"name", "link", "origin"}, ctx);
      ContactFrameSpec c;
      c.name = yaml::as_string(yaml::require(frames[i], "name", ctx), ctx + ".name");
      c.link = yaml::as_string(yaml::require(frames[i], "link", ctx), ctx + ".link");
      c.offset = yaml::as_transform(frames[i]["origin"], ctx + ".origin");
      spec.contact_frames.push_back(c);
    }
  }
  return spec;
}

RobotModel load_model_from_string(std::string_view text) { return RobotModel(parse_model_spec(text)); }

RobotModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_model_from_string(buffer.str());
}

std::string serialize_model(const ModelSpec& spec) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << spec.name;
  e << YAML::Key << "height" << YAML::Value << spec.height;

  e << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const LinkSpec& l : spec.links) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << l.name;
    e << YAML::Key << "parent_joint" << YAML::Value << l.parent_joint;
    e << YAML::Key << "mass" << YAML::Value << l.mass;
    e << YAML::Key << "com" << YAML::Value;
    yaml::emit_vec3(e, l.com);
    e << YAML::Key << "inertia" << YAML::Value;
    yaml::emit_mat3(e, l.inertia);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
  for (const JointSpec& j : spec.joints) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << j.name;
    if (j.kind == JointKind::kFloatingBase) {
      e << YAML::Key << "type" << YAML::Value << "floating_base";
      if (!j.parent_link.empty()) e << YAML::Key << "parent" << YAML::Value << j.parent_link;
      e << YAML::EndMap;
      continue;
    }
    e << YAML::Key << "type" << YAML::Value << "revolute";
    e << YAML::Key << "parent" << YAML::Value << j.parent_link;
    e << YAML::Key << "origin" << YAML::Value;
    yaml::emit_transform(e, j.origin);
    e << YAML::Key << "axis" << YAML::Value;
    yaml::emit_vec3(e, j.axis);
    e << YAML::Key << "position_limits" << YAML::Value;
    yaml::emit_interval(e, j.position_limits);
    e << YAML::Key << "velocity_limit" << YAML::Value << j.velocity_limit;
    e << YAML::Key << "torque_limits" << YAML::Value;
    yaml::emit_interval(e, j.torque_limits);
    e << YAML::Key << "acceleration_limits" << YAML::Value;
    yaml::emit_interval(e, j.acceleration_limits);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "rolling_pairs" << YAML::Value << YAML::BeginSeq;
  for (const RollingContactPair& p : spec.rolling_pairs) {
    e << YAML::BeginMap;
    e << YAML::Key << "proximal" << YAML::Value << p.proximal_joint;
    e << YAML::Key << "distal" << YAML::Value << p.distal_joint;
    e << YAML::Key << "r_proximal" << YAML::Value << p.r_proximal;
    e << YAML::Key << "r_distal" << YAML::Value << p.r_distal;
    e << YAML::Key << "actuated" << YAML::Value
      << (p.actuated_side == ActuatedSide::kDistal ? "distal" : "proximal");
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "transmissions" << YAML::Value << YAML::BeginSeq;
  for (const TransmissionSpec& t : spec.transmissions) {
    e << YAML::BeginMap;
    e << YAML::Key << "joint" << YAML::Value << t.joint;
    if (t.kind == TransmissionKind::kHipSheave) {
      e << YAML::Key << "kind" << YAML::Value << "hip_sheave";
      e << YAML::Key << "r_fix" << YAML::Value << t.r_fix;
      e << YAML::Key << "r_rot" << YAML::Value << t.r_rot;
    } else {
      e << YAML::Key << "kind" << YAML::Value << "knee_rolling";
      e << YAML::Key << "gear_stages" << YAML::Value;
      yaml::emit_vec(e, t.gear_stages.data(), static_cast<int>(t.gear_stages.size()));
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "contact_frames" << YAML::Value << YAML::BeginSeq;
  for (const ContactFrameSpec& c : spec.contact_frames) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << c.name;
    e << YAML::Key << "link" << YAML::Value << c.link;
    e << YAML::Key << "origin" << YAML::Value;
    yaml::emit_transform(e, c.offset);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void save_model(const ModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file '" + path.string() + "'");
  out << serialize_model(spec);
}

}  // namespace rcwbc
