#include "rcwbc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rcwbc/errors.hpp"

namespace rcwbc {
namespace {

constexpr double kAxisTolerance = 1e-6;

std::string indexed(std::string_view list, std::size_t i, std::string_view field) {
  std::ostringstream os;
  os << list << "[" << i << "]";
  if (!field.empty()) os << "." << field;
  return os.str();
}

// Point-mass contribution -m * skew(p) * skew(p) = m (|p|^2 I - p p^T).
Matrix3 point_inertia(double mass, const Vector3& p) {
  return mass * (p.squaredNorm() * Matrix3::Identity() - p * p.transpose());
}

}  // namespace

std::string to_string(const Diagnostic& d) { return d.field + ": " + d.message; }

std::vector<Diagnostic> validate_model(const ModelSpec& spec) {
  std::vector<Diagnostic> out;
  auto value = [&](std::string field, std::string message) {
    out.push_back({Diagnostic::Kind::kValue, std::move(field), std::move(message)});
  };
  auto topology = [&](std::string field, std::string message) {
    out.push_back({Diagnostic::Kind::kTopology, std::move(field), std::move(message)});
  };

  std::map<std::string, std::size_t> link_index;
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    const LinkSpec& l = spec.links[i];
    if (l.name.empty()) value(indexed("links", i, "name"), "empty link name");
    if (!link_index.emplace(l.name, i).second)
      value(indexed("links", i, "name"), "duplicate link name '" + l.name + "'");
    const std::string who = " (link '" + l.name + "')";
    if (!(l.mass > 0.0) || !std::isfinite(l.mass))
      value(indexed("links", i, "mass"), "mass must be positive" + who);
    if (!l.com.allFinite()) value(indexed("links", i, "com"), "non-finite com" + who);
    const double scale = std::max(1e-12, l.inertia.cwiseAbs().maxCoeff());
    if (!l.inertia.allFinite()) {
      value(indexed("links", i, "inertia"), "non-finite inertia" + who);
    } else if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      value(indexed("links", i, "inertia"), "inertia is not symmetric" + who);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix3> eig(l.inertia);
      const Vector3 ev = eig.eigenvalues();
      if (ev.minCoeff() <= 0.0) {
        value(indexed("links", i, "inertia"),
              "inertia is not positive definite (min eigenvalue " + std::to_string(ev.minCoeff()) +
                  ")" + who);
      } else if (ev(0) + ev(1) < ev(2) * (1.0 - 1e-9)) {
        value(indexed("links", i, "inertia"), "principal moments violate the triangle inequality" + who);
      }
    }
  }

  std::map<std::string, std::size_t> joint_index;
  std::vector<std::size_t> floating;
  for (std::size_t i = 0; i < spec.joints.size(); ++i) {
    const JointSpec& j = spec.joints[i];
    if (j.name.empty()) value(indexed("joints", i, "name"), "empty joint name");
    if (!joint_index.emplace(j.name, i).second)
      value(indexed("joints", i, "name"), "duplicate joint name '" + j.name + "'");
    const std::string who = " (joint '" + j.name + "')";
    if (j.kind == JointKind::kFloatingBase) {
      floating.push_back(i);
      continue;
    }
    if (std::abs(j.axis.norm() - 1.0) > kAxisTolerance)
      value(indexed("joints", i, "axis"), "axis must have unit norm" + who);
    if (!j.origin.rotation.allFinite() || !j.origin.translation.allFinite() ||
        (j.origin.rotation * j.origin.rotation.transpose() - Matrix3::Identity()).norm() > 1e-9)
      value(indexed("joints", i, "origin"), "origin is not a rigid transform" + who);
    auto check = [&](const Interval& iv, const char* field) {
      if (!(iv.lower < iv.upper)) value(indexed("joints", i, field), "lower limit must be below upper" + who);
    };
    check(j.position_limits, "position_limits");
    check(j.torque_limits, "torque_limits");
    check(j.acceleration_limits, "acceleration_limits");
    if (!(j.velocity_limit > 0.0)) value(indexed("joints", i, "velocity_limit"), "must be positive" + who);
  }
  if (floating.size() != 1) {
    value("joints", "expected exactly one floating_base joint, found " + std::to_string(floating.size()));
  } else if (!spec.joints[floating[0]].parent_link.empty()) {
    topology(indexed("joints", floating[0], "parent"), "floating_base joint must be the root");
  }

  // Tree structure: link -> parent joint -> parent link -> ... -> floating base.
  std::map<std::string, std::vector<std::size_t>> children_of_joint;
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    const LinkSpec& l = spec.links[i];
    if (!joint_index.count(l.parent_joint)) {
      topology(indexed("links", i, "parent_joint"),
               "orphan link '" + l.name + "': unknown parent joint '" + l.parent_joint + "'");
    } else {
      children_of_joint[l.parent_joint].push_back(i);
    }
  }
  for (std::size_t i = 0; i < spec.joints.size(); ++i) {
    const JointSpec& j = spec.joints[i];
    const auto& kids = children_of_joint[j.name];
    if (kids.size() != 1)
      topology(indexed("joints", i, ""),
               "joint '" + j.name + "' must move exactly one link, found " + std::to_string(kids.size()));
    if (j.kind == JointKind::kRevolute && !link_index.count(j.parent_link))
      topology(indexed("joints", i, "parent"), "joint '" + j.name + "' has unknown parent link '" +
                                                   j.parent_link + "'");
  }
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    std::set<std::string> seen;
    std::string link = spec.links[i].name;
    while (true) {
      if (!seen.insert(link).second) {
        topology(indexed("links", i, ""), "cycle through link '" + link + "'");
        break;
      }
      const auto li = link_index.find(link);
      if (li == link_index.end()) break;
      const auto ji = joint_index.find(spec.links[li->second].parent_joint);
      if (ji == joint_index.end()) break;
      const JointSpec& j = spec.joints[ji->second];
      if (j.kind == JointKind::kFloatingBase) break;
      link = j.parent_link;
    }
  }

  // Revolute declaration order defines velocity indices.
  std::map<std::string, int> revolute_ordinal;
  for (const JointSpec& j : spec.joints)
    if (j.kind == JointKind::kRevolute) revolute_ordinal.emplace(j.name, static_cast<int>(revolute_ordinal.size()));

  std::set<std::string> paired;
  for (std::size_t i = 0; i < spec.rolling_pairs.size(); ++i) {
    const RollingContactPair& p = spec.rolling_pairs[i];
    if (!(p.r_proximal > 0.0)) value(indexed("rolling_pairs", i, "r_proximal"), "radius must be positive");
    if (!(p.r_distal > 0.0)) value(indexed("rolling_pairs", i, "r_distal"), "radius must be positive");
    const auto pi = joint_index.find(p.proximal_joint);
    const auto di = joint_index.find(p.distal_joint);
    if (pi == joint_index.end() || di == joint_index.end()) {
      value(indexed("rolling_pairs", i, ""), "unknown joint in rolling pair");
      continue;
    }
    const JointSpec& prox = spec.joints[pi->second];
    const JointSpec& dist = spec.joints[di->second];
    if (prox.kind != JointKind::kRevolute || dist.kind != JointKind::kRevolute) {
      value(indexed("rolling_pairs", i, ""), "rolling pair joints must be revolute");
      continue;
    }
    for (const std::string& n : {p.proximal_joint, p.distal_joint})
      if (!paired.insert(n).second)
        value(indexed("rolling_pairs", i, ""), "joint '" + n + "' appears in more than one rolling pair");
    const auto kids = children_of_joint.find(prox.name);
    const bool chained = kids != children_of_joint.end() && kids->second.size() == 1 &&
                         spec.links[kids->second[0]].name == dist.parent_link;
    if (!chained || revolute_ordinal[dist.name] != revolute_ordinal[prox.name] + 1) {
      value(indexed("rolling_pairs", i, ""),
            "joints '" + prox.name + "' and '" + dist.name + "' are not adjacent on the same chain");
      continue;
    }
    const Vector3 distal_axis = dist.origin.rotation * dist.axis;
    if (prox.axis.cross(distal_axis).norm() > kAxisTolerance)
      value(indexed("rolling_pairs", i, ""), "rolling pair joint axes are not parallel");
  }

  for (std::size_t i = 0; i < spec.transmissions.size(); ++i) {
    const TransmissionSpec& t = spec.transmissions[i];
    const auto ji = joint_index.find(t.joint);
    if (ji == joint_index.end() || spec.joints[ji->second].kind != JointKind::kRevolute)
      value(indexed("transmissions", i, "joint"), "unknown revolute joint '" + t.joint + "'");
    if (t.kind == TransmissionKind::kHipSheave) {
      if (!(t.r_fix > 0.0)) value(indexed("transmissions", i, "r_fix"), "must be positive");
      if (!(t.r_rot > 0.0)) value(indexed("transmissions", i, "r_rot"), "must be positive");
    } else {
      if (t.gear_stages.empty()) value(indexed("transmissions", i, "gear_stages"), "at least one stage required");
      for (double s : t.gear_stages)
        if (!(s > 0.0)) {
          value(indexed("transmissions", i, "gear_stages"), "stage ratios must be positive");
          break;
        }
    }
  }

  std::set<std::string> frame_names;
  for (std::size_t i = 0; i < spec.contact_frames.size(); ++i) {
    const ContactFrameSpec& c = spec.contact_frames[i];
    if (!link_index.count(c.link)) value(indexed("contact_frames", i, "link"), "unknown link '" + c.link + "'");
    if (link_index.count(c.name) || !frame_names.insert(c.name).second)
      value(indexed("contact_frames", i, "name"), "duplicate frame name '" + c.name + "'");
  }
  return out;
}

RobotModel::RobotModel(ModelSpec spec) : spec_(std::move(spec)) {
  const auto diagnostics = validate_model(spec_);
  for (const Diagnostic& d : diagnostics)
    if (d.kind == Diagnostic::Kind::kTopology) throw TopologyError(to_string(d));
  if (!diagnostics.empty()) throw ValidationError(to_string(diagnostics.front()));

  std::map<std::string, int> link_index;
  for (std::size_t i = 0; i < spec_.links.size(); ++i) link_index[spec_.links[i].name] = static_cast<int>(i);
  std::map<std::string, int> joint_index;
  for (std::size_t i = 0; i < spec_.joints.size(); ++i) joint_index[spec_.joints[i].name] = static_cast<int>(i);

  int next_v = 6;
  for (std::size_t i = 0; i < spec_.joints.size(); ++i) {
    if (spec_.joints[i].kind != JointKind::kRevolute) continue;
    joint_v_[spec_.joints[i].name] = next_v;
    v_to_joint_[next_v] = static_cast<int>(i);
    ++next_v;
  }
  nv_ = next_v;

  // Children of each link, in joint declaration order.
  std::vector<std::vector<int>> child_links(spec_.links.size());
  int root_link = -1;
  std::vector<int> link_joint(spec_.links.size());
  for (std::size_t i = 0; i < spec_.links.size(); ++i) {
    const int j = joint_index.at(spec_.links[i].parent_joint);
    link_joint[i] = j;
    if (spec_.joints[j].kind == JointKind::kFloatingBase) root_link = static_cast<int>(i);
  }
  for (std::size_t j = 0; j < spec_.joints.size(); ++j) {
    const JointSpec& js = spec_.joints[j];
    if (js.kind != JointKind::kRevolute) continue;
    for (std::size_t i = 0; i < spec_.links.size(); ++i)
      if (link_joint[i] == static_cast<int>(j)) child_links[link_index.at(js.parent_link)].push_back(static_cast<int>(i));
  }

  link_to_body_.assign(spec_.links.size(), -1);
  std::vector<std::pair<int, int>> stack{{root_link, -1}};
  while (!stack.empty()) {
    const auto [link, parent] = stack.back();
    stack.pop_back();
    const LinkSpec& ls = spec_.links[link];
    const JointSpec& js = spec_.joints[link_joint[link]];
    Body b;
    b.link = link;
    b.joint = link_joint[link];
    b.parent = parent;
    b.kind = js.kind;
    if (js.kind == JointKind::kFloatingBase) {
      b.q_index = 0;
      b.v_index = 0;
      b.dof = 6;
    } else {
      b.axis = js.axis.normalized();
      b.origin = js.origin;
      b.v_index = joint_v_.at(js.name);
      b.q_index = b.v_index + 1;
      b.dof = 1;
    }
    b.mass = ls.mass;
    b.com = ls.com;
    b.inertia_com = ls.inertia;
    b.spatial_inertia = spatial_inertia(ls.mass, ls.com, ls.inertia);
    const int id = static_cast<int>(bodies_.size());
    bodies_.push_back(b);
    link_to_body_[link] = id;
    total_mass_ += ls.mass;
    const auto& kids = child_links[link];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, id);
  }

  for (std::size_t i = 0; i < spec_.links.size(); ++i) frames_[spec_.links[i].name] = {link_to_body_[i], Transform{}};
  for (const ContactFrameSpec& c : spec_.contact_frames)
    frames_[c.name] = {link_to_body_[link_index.at(c.link)], c.offset};

  std::set<int> passive;
  for (const RollingContactPair& p : spec_.rolling_pairs) {
    const int prox = joint_v_.at(p.proximal_joint);
    const int dist = joint_v_.at(p.distal_joint);
    pair_indices_.emplace_back(prox, dist);
    passive.insert(p.actuated_side == ActuatedSide::kDistal ? prox : dist);
  }
  for (int v = 6; v < nv_; ++v)
    if (!passive.count(v)) actuated_.push_back(v);
}

int RobotModel::body_of_link(std::string_view link) const {
  for (std::size_t i = 0; i < spec_.links.size(); ++i)
    if (spec_.links[i].name == link) return link_to_body_[i];
  throw UnknownFrame("unknown link '" + std::string(link) + "'");
}

int RobotModel::joint_v_index(std::string_view joint) const {
  const auto it = joint_v_.find(joint);
  if (it == joint_v_.end()) throw UnknownFrame("unknown revolute joint '" + std::string(joint) + "'");
  return it->second;
}

const JointSpec& RobotModel::joint_at_v_index(int v_index) const {
  const auto it = v_to_joint_.find(v_index);
  if (it == v_to_joint_.end()) throw DimensionMismatch("no joint at velocity index " + std::to_string(v_index));
  return spec_.joints[it->second];
}

std::optional<FrameRef> RobotModel::find_frame(std::string_view name) const {
  const auto it = frames_.find(name);
  if (it == frames_.end()) return std::nullopt;
  return it->second;
}

FrameRef RobotModel::frame(std::string_view name) const {
  auto f = find_frame(name);
  if (!f) throw UnknownFrame("unknown frame '" + std::string(name) + "'");
  return *f;
}

std::vector<std::string> RobotModel::frame_names() const {
  std::vector<std::string> out;
  for (const auto& [name, ref] : frames_) out.push_back(name);
  return out;
}

const std::string& RobotModel::root_link() const { return spec_.links[bodies_.front().link].name; }

MatrixX RobotModel::actuation_selection() const {
  MatrixX s = MatrixX::Zero(num_actuated(), nv_);
  for (int i = 0; i < num_actuated(); ++i) s(i, actuated_[i]) = 1.0;
  return s;
}

RobotState neutral_state(const RobotModel& model) {
  RobotState s;
  s.q = VectorX::Zero(model.nq());
  s.q(3) = 1.0;
  s.v = VectorX::Zero(model.nv());
  return s;
}

Matrix3 base_rotation(const VectorX& q) {
  const Eigen::Quaterniond quat(q(3), q(4), q(5), q(6));
  return quat.normalized().toRotationMatrix();
}

void set_base_rotation(VectorX& q, const Matrix3& r) {
  Eigen::Quaterniond quat(r);
  quat.normalize();
  if (quat.w() < 0.0) quat.coeffs() *= -1.0;
  q(3) = quat.w();
  q(4) = quat.x();
  q(5) = quat.y();
  q(6) = quat.z();
}

VectorX integrate_configuration(const RobotModel& model, const VectorX& q, const VectorX& v, double dt) {
  if (q.size() != model.nq() || v.size() != model.nv())
    throw DimensionMismatch("integrate_configuration: bad state dimensions");
  VectorX out = q;
  const Matrix3 r = base_rotation(q);
  out.head<3>() += r * v.segment<3>(3) * dt;
  const Eigen::Quaterniond quat(q(3), q(4), q(5), q(6));
  const Vector3 w = v.head<3>() * dt;
  const double angle = w.norm();
  Eigen::Quaterniond delta = Eigen::Quaterniond::Identity();
  if (angle > 0.0) delta = Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle));
  const Eigen::Quaterniond next = (quat * delta).normalized();
  out(3) = next.w();
  out(4) = next.x();
  out(5) = next.y();
  out(6) = next.z();
  out.tail(model.nv() - 6) += v.tail(model.nv() - 6) * dt;
  return out;
}

ModelSpec transfer_point_mass(ModelSpec spec, std::string_view from_link, const Vector3& from_point,
                              std::string_view to_link, const Vector3& to_point, double mass) {
  auto find = [&](std::string_view name) -> LinkSpec& {
    for (LinkSpec& l : spec.links)
      if (l.name == name) return l;
    throw UnknownFrame("unknown link '" + std::string(name) + "'");
  };
  auto shift = [](LinkSpec& l, const Vector3& p, double dm) {
    const Matrix3 about_origin = l.inertia + point_inertia(l.mass, l.com);
    const double m = l.mass + dm;
    if (!(m > 0.0)) throw ValidationError("transfer_point_mass: link '" + l.name + "' would lose all mass");
    const Vector3 com = (l.mass * l.com + dm * p) / m;
    const Matrix3 shifted = about_origin + point_inertia(dm, p);
    l.inertia = shifted - point_inertia(m, com);
    l.inertia = 0.5 * (l.inertia + l.inertia.transpose());
    l.mass = m;
    l.com = com;
  };
  shift(find(from_link), from_point, -mass);
  shift(find(to_link), to_point, mass);
  return spec;
}

}  // namespace rcwbc
