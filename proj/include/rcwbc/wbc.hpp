#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/model.hpp"
#include "rcwbc/qp_solver.hpp"
#include "rcwbc/rolling_contact.hpp"

namespace rcwbc {

enum class TaskKind {
  kFrame,  // 6 rows: angular then linear, world-aligned
  kCom,    // 3 rows: centre of mass position
  kIcp,    // 3 rows on the CoM, desired acceleration from the capture-point law
  kJoint,  // one row per listed joint
};

/// Reference trajectory for a task. Frame tasks use `pose` and 6-vector
/// velocity/acceleration; CoM and ICP tasks use 3-vectors; joint tasks use
/// one entry per joint. Empty velocity/acceleration mean zero.
struct TaskReference {
  Transform pose;
  VectorX position;
  VectorX velocity;
  VectorX acceleration;
};

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::kFrame;
  std::string frame;
  std::vector<std::string> joints;
  std::vector<int> rows;  // subset of task rows; empty means all
  double weight = 1.0;    // W = weight * I
  double kp = 0.0;
  double kd = 0.0;
  TaskReference reference;
};

/// J, Jdot v and desired acceleration of a task at the current state.
struct TaskTerms {
  std::string name;
  MatrixX J;
  VectorX Jdv;
  VectorX desired_acceleration;
  VectorX error;  // reference minus measured, task rows
  double weight = 1.0;
};

TaskTerms evaluate_task(const RobotModel& model, const RobotState& state, const Kinematics& kin, const TaskSpec& task,
                        const Vector3& gravity);

/// Contact wrench F = [moment; force] at the contact frame origin, in world
/// coordinates (3-dimensional contacts carry the force only).
struct ContactSpec {
  std::string frame;
  int dim = 6;
  bool unilateral = true;  // false: no friction cone and no normal-force cap
  double mu = 0.6;
  double half_length_x = 0.1;
  double half_length_y = 0.05;
  double max_normal_force = 1000.0;
  VectorX desired;  // F^d, dim entries; empty means zero
  double weight = 0.0;
  bool hold_motion = false;  // adds J_c qdd + Jdot_c v = 0 as equality rows
};

/// Linearized cone in the contact frame (rows x dim): f_z >= 0, |f_x|, |f_y| <= mu f_z,
/// centre of pressure inside the foot rectangle and |n_z| <= mu * min(l_x, l_y) f_z.
MatrixX build_friction_cone(const ContactSpec& contact);

/// Vertical forces carrying the robot weight, split between contacts by
/// least-norm weights that place their centroid under the CoM; zero moments.
std::vector<VectorX> gravity_consistent_wrenches(const RobotModel& model, const RobotState& state,
                                                 const std::vector<ContactSpec>& contacts,
                                                 const Vector3& gravity = kDefaultGravity);

struct WbcConfig {
  double lambda_q = 1e-6;
  double lambda_f = 1e-8;
  QpSettings qp;
  double dt = 1e-3;
  double velocity_decay = 10.0;  // 1/s, leak of v_des toward measured velocity
  double position_decay = 2.0;   // 1/s, leak of q_des toward measured position
  double velocity_clamp = 0.0;   // rad/s; 0 uses the joint velocity limits only
  Vector3 gravity = kDefaultGravity;
};

struct ConstraintBlockRange {
  std::string name;
  int start = 0;
  int count = 0;
};

struct WbcProblem {
  QpProblem qp;
  int nv = 0;
  int nf = 0;
  std::vector<ConstraintBlockRange> equality_blocks;
  std::vector<ConstraintBlockRange> inequality_blocks;
  DynamicsCache dynamics;
  InternalConstraintSet internal;
  ProjectedDynamics projected;
  MatrixX contact_jacobian;     // stacked, nf x nv
  VectorX contact_jdv;          // stacked
  MatrixX torque_map;           // Sbar^T, num_actuated x n_joints
  std::vector<TaskTerms> tasks;

  /// Name of the block holding a constraint, e.g. "torque_limits".
  std::string block_name(const ConstraintRef& ref) const;
};

WbcProblem assemble_wbc_qp(const RobotModel& model, const RobotState& state, const std::vector<TaskSpec>& tasks,
                           const std::vector<ContactSpec>& contacts, const WbcConfig& config);

/// tau* = Sbar^T (A qdd + N^T (b + g) - N^T J_c^T F)_joints.
VectorX recover_torques(const MatrixX& torque_map, const MatrixX& A, const ProjectedDynamics& projected,
                        const VectorX& qdd, const VectorX& forces);
VectorX recover_torques(const WbcProblem& problem, const VectorX& qdd, const VectorX& forces);

struct JointCommandLimits {
  VectorX q_min, q_max, v_max;
  double velocity_decay = 0.0;
  double position_decay = 0.0;
};

JointCommandLimits command_limits(const RobotModel& model, const WbcConfig& config);

struct JointCommand {
  VectorX q_des;
  VectorX v_des;
};

/// Semi-implicit: v_des += qdd dt, q_des += v_des dt, each leaking toward the
/// measured joint state and clamped. Joint-sized vectors.
JointCommand integrate_joint_command(const VectorX& q_des, const VectorX& v_des, const VectorX& qdd_joints, double dt,
                                     const JointCommandLimits& limits, const VectorX& q_measured,
                                     const VectorX& v_measured);

struct WbcOutput {
  VectorX qdd;
  VectorX forces;  // stacked contact wrenches
  VectorX tau;     // actuated joints
  VectorX internal_forces;
  VectorX q_des;
  VectorX v_des;
  QpStatus status = QpStatus::kOptimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<double> task_residuals;  // |J qdd + Jdot v - xdd_des| per task
};

/// Single cold solve; joint commands integrate from the measured state.
/// Throws SolverInfeasible naming the violated block.
WbcOutput solve_wbc(const RobotModel& model, const RobotState& state, const std::vector<TaskSpec>& tasks,
                    const std::vector<ContactSpec>& contacts, const WbcConfig& config);

/// Controller with QP warm start and persistent joint commands.
class WholeBodyController {
 public:
  WholeBodyController(const RobotModel& model, WbcConfig config);
  WbcOutput update(const RobotState& state, const std::vector<TaskSpec>& tasks,
                   const std::vector<ContactSpec>& contacts);
  void reset();
  const WbcConfig& config() const { return config_; }

 private:
  const RobotModel& model_;
  WbcConfig config_;
  QpSolver solver_;
  JointCommandLimits limits_;
  VectorX q_des_, v_des_;
};

/// Tasks, contacts and settings read from a controller file.
struct ControllerConfig {
  WbcConfig wbc;
  std::vector<TaskSpec> tasks;
  std::vector<ContactSpec> contacts;
};

ControllerConfig load_controller_config(const std::filesystem::path& path);
ControllerConfig parse_controller_config(std::string_view text);

}  // namespace rcwbc
