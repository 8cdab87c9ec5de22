#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rcwbc/model.hpp"
#include "rcwbc/spatial.hpp"

namespace rcwbc {

inline const Vector3 kDefaultGravity{0.0, 0.0, -9.81};

/// Throws DimensionMismatch on wrong sizes or non-finite entries, and
/// NonUnitQuaternion if the base quaternion norm deviates from 1 by > 1e-6.
void check_state(const RobotModel& model, const RobotState& state);

/// Per-body kinematic quantities, indexed like RobotModel::bodies().
/// Velocities and bias accelerations are spatial vectors in body coordinates;
/// bias accelerations are evaluated at zero generalized acceleration, no gravity.
struct Kinematics {
  std::vector<Transform> pose;          // body frame in world
  std::vector<Matrix6> x_up;            // parent -> body motion transform
  std::vector<Vector6> velocity;
  std::vector<Vector6> bias_acceleration;
};

Kinematics compute_kinematics(const RobotModel& model, const RobotState& state);

/// World pose of every link and contact frame.
std::map<std::string, Transform> forward_kinematics(const RobotModel& model, const RobotState& state);

Transform frame_pose(const RobotModel& model, const Kinematics& kin, std::string_view frame);
Transform frame_pose(const RobotModel& model, const RobotState& state, std::string_view frame);

/// 6 x nv, world-aligned: rows 0-2 map v to the frame's angular velocity, rows
/// 3-5 to the linear velocity of the frame origin, both in world coordinates.
MatrixX frame_jacobian(const RobotModel& model, const Kinematics& kin, std::string_view frame);
MatrixX frame_jacobian(const RobotModel& model, const RobotState& state, std::string_view frame);

/// Jdot * v for frame_jacobian: the frame's world acceleration at zero q̈.
Vector6 jacobian_dot_times_v(const RobotModel& model, const Kinematics& kin, std::string_view frame);
Vector6 jacobian_dot_times_v(const RobotModel& model, const RobotState& state, std::string_view frame);

/// Composite-rigid-body mass matrix.
MatrixX mass_matrix(const RobotModel& model, const RobotState& state);
MatrixX mass_matrix(const RobotModel& model, const Kinematics& kin);

/// Recursive Newton-Euler generalized forces for the given acceleration.
VectorX inverse_dynamics(const RobotModel& model, const RobotState& state, const VectorX& qdd,
                         const Vector3& gravity = kDefaultGravity);
/// b + g: inverse dynamics at q̈ = 0.
VectorX nonlinear_effects(const RobotModel& model, const RobotState& state, const Vector3& gravity = kDefaultGravity);

struct DynamicsCache {
  Kinematics kin;
  MatrixX A;
  VectorX b;   // Coriolis and centrifugal
  VectorX g;   // gravity
  VectorX bg;  // b + g
};

DynamicsCache compute_dynamics(const RobotModel& model, const RobotState& state,
                               const Vector3& gravity = kDefaultGravity);

struct CentroidalInertia {
  Matrix3 I_G = Matrix3::Zero();  // world-aligned, about the CoM
  Vector3 com = Vector3::Zero();
  double total_mass = 0.0;
};

CentroidalInertia centroidal_inertia(const RobotModel& model, const RobotState& state);
CentroidalInertia centroidal_inertia(const RobotModel& model, const Kinematics& kin);

struct ComState {
  Vector3 position = Vector3::Zero();
  Vector3 velocity = Vector3::Zero();
};

ComState com_state(const RobotModel& model, const RobotState& state);
ComState com_state(const RobotModel& model, const Kinematics& kin);
/// 3 x nv.
MatrixX com_jacobian(const RobotModel& model, const Kinematics& kin);
Vector3 com_jacobian_dot_times_v(const RobotModel& model, const Kinematics& kin);

double kinetic_energy(const RobotModel& model, const RobotState& state);
/// Gravitational potential relative to the world origin.
double potential_energy(const RobotModel& model, const RobotState& state, const Vector3& gravity = kDefaultGravity);

}  // namespace rcwbc
