#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcwbc/spatial.hpp"

namespace rcwbc {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct LinkSpec {
  std::string name;
  double mass = 0.0;                        // kg
  Vector3 com = Vector3::Zero();            // m, link frame
  Matrix3 inertia = Matrix3::Identity();    // kg m^2 about com
  std::string parent_joint;
};

enum class JointKind { kFloatingBase, kRevolute };

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::kRevolute;
  std::string parent_link;                  // empty for the floating base
  Vector3 axis = Vector3::UnitZ();          // revolute only, joint frame
  Transform origin;                         // joint frame in parent link frame
  Interval position_limits{-3.14159, 3.14159};
  double velocity_limit = 10.0;
  Interval torque_limits{-100.0, 100.0};
  Interval acceleration_limits{-1000.0, 1000.0};
};

enum class ActuatedSide { kProximal, kDistal };

/// Two consecutive revolute joints whose links roll on each other.
/// Position-level coupling: q_proximal = (r_distal / r_proximal) * q_distal.
struct RollingContactPair {
  std::string proximal_joint;
  std::string distal_joint;
  double r_proximal = 0.0;
  double r_distal = 0.0;
  ActuatedSide actuated_side = ActuatedSide::kDistal;

  double ratio() const { return r_distal / r_proximal; }
};

enum class TransmissionKind { kHipSheave, kKneeRolling };

struct TransmissionSpec {
  TransmissionKind kind = TransmissionKind::kHipSheave;
  std::string joint;
  double r_fix = 0.0;               // hip_sheave
  double r_rot = 0.0;               // hip_sheave
  std::vector<double> gear_stages;  // knee_rolling
};

struct ContactFrameSpec {
  std::string name;
  std::string link;
  Transform offset;
};

/// Editable description of a robot, as read from a model file.
struct ModelSpec {
  std::string name;
  double height = 0.0;  // m, nominal standing height
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<RollingContactPair> rolling_pairs;
  std::vector<TransmissionSpec> transmissions;
  std::vector<ContactFrameSpec> contact_frames;
};

struct Diagnostic {
  enum class Kind { kValue, kTopology };
  Kind kind = Kind::kValue;
  std::string field;
  std::string message;
};

std::string to_string(const Diagnostic& d);

/// One diagnostic per violated invariant; empty iff the description is valid.
std::vector<Diagnostic> validate_model(const ModelSpec& spec);

/// A rigid body of the kinematic tree, in topological order.
struct Body {
  int link = -1;        // index into ModelSpec::links
  int joint = -1;       // index into ModelSpec::joints
  int parent = -1;      // parent body, -1 for the root
  JointKind kind = JointKind::kRevolute;
  Vector3 axis = Vector3::Zero();
  Transform origin;
  int q_index = 0;
  int v_index = 0;
  int dof = 1;
  double mass = 0.0;
  Vector3 com = Vector3::Zero();
  Matrix3 inertia_com = Matrix3::Zero();
  Matrix6 spatial_inertia = Matrix6::Zero();
};

/// Resolved frame: a body plus a fixed offset in the body frame.
struct FrameRef {
  int body = -1;
  Transform offset;
};

/// Immutable validated robot model with derived indices.
///
/// Velocity layout: six floating-base coordinates (body-frame angular, then
/// body-frame linear velocity), then revolute joints in declaration order.
/// Configuration layout: base position, base quaternion (w, x, y, z), joint
/// angles; so nq = nv + 1.
class RobotModel {
 public:
  /// Throws TopologyError or ValidationError.
  explicit RobotModel(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  int nq() const { return nv_ + 1; }
  int nv() const { return nv_; }
  int num_joints() const { return nv_ - 6; }
  double total_mass() const { return total_mass_; }

  const std::vector<Body>& bodies() const { return bodies_; }
  /// Body index moved by the named link.
  int body_of_link(std::string_view link) const;
  /// Index into v of a revolute joint (throws UnknownFrame).
  int joint_v_index(std::string_view joint) const;
  int joint_q_index(std::string_view joint) const { return joint_v_index(joint) + 1; }
  /// Revolute joint spec by velocity index.
  const JointSpec& joint_at_v_index(int v_index) const;

  /// Link or contact frame by name.
  std::optional<FrameRef> find_frame(std::string_view name) const;
  FrameRef frame(std::string_view name) const;
  std::vector<std::string> frame_names() const;
  const std::string& root_link() const;

  /// Velocity indices of actuated joints (revolute joints minus the passive
  /// side of every rolling pair), ascending.
  const std::vector<int>& actuated_v_indices() const { return actuated_; }
  int num_actuated() const { return static_cast<int>(actuated_.size()); }
  /// S_a: num_actuated x nv selection matrix.
  MatrixX actuation_selection() const;

  /// Per rolling pair: (proximal v index, distal v index).
  const std::vector<std::pair<int, int>>& rolling_pair_indices() const { return pair_indices_; }

 private:
  ModelSpec spec_;
  int nv_ = 6;
  double total_mass_ = 0.0;
  std::vector<Body> bodies_;
  std::vector<int> link_to_body_;
  std::map<std::string, int, std::less<>> joint_v_;
  std::map<int, int> v_to_joint_;
  std::map<std::string, FrameRef, std::less<>> frames_;
  std::vector<int> actuated_;
  std::vector<std::pair<int, int>> pair_indices_;
};

struct RobotState {
  VectorX q;
  VectorX v;
};

/// Zero joint angles, identity base orientation at the origin, zero velocity.
RobotState neutral_state(const RobotModel& model);

Matrix3 base_rotation(const VectorX& q);
void set_base_rotation(VectorX& q, const Matrix3& r);

/// q (+) v*dt: base pose by right-multiplied exponential, joints additively.
VectorX integrate_configuration(const RobotModel& model, const VectorX& q, const VectorX& v, double dt);

// Model files (YAML). See docs/model_format.md.
ModelSpec parse_model_spec(std::string_view text);
RobotModel load_model(const std::filesystem::path& path);
RobotModel load_model_from_string(std::string_view text);
std::string serialize_model(const ModelSpec& spec);
void save_model(const ModelSpec& spec, const std::filesystem::path& path);

/// Moves a point mass between two links (removed at `from_point` in the
/// `from_link` frame, added at `to_point` in the `to_link` frame), keeping
/// com and inertia of both links exact.
ModelSpec transfer_point_mass(ModelSpec spec, std::string_view from_link, const Vector3& from_point,
                              std::string_view to_link, const Vector3& to_point, double mass);

}  // namespace rcwbc
