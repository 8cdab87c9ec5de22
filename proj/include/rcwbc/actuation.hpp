#pragma once

#include <string>
#include <vector>

#include "rcwbc/model.hpp"

namespace rcwbc {

// Hip sheave: the joint turns r_rot / r_fix times per motor turn.
double hip_joint_to_motor(double tau_joint, const TransmissionSpec& spec);
double hip_motor_to_joint(double tau_motor, const TransmissionSpec& spec);
double hip_joint_to_motor_speed(double w_joint, const TransmissionSpec& spec);

// Knee: distal joint torque -> torque about the instantaneous centre of
// rotation of the rolling contact -> motor through the gear stages.
double knee_distal_to_icr(double tau_distal, const RollingContactPair& pair);
double knee_icr_speed(double w_distal, const RollingContactPair& pair);
double knee_joint_to_motor(double tau_distal, const RollingContactPair& pair, const TransmissionSpec& spec);
double knee_motor_to_joint(double tau_motor, const RollingContactPair& pair, const TransmissionSpec& spec);
double knee_distal_to_motor_speed(double w_distal, const RollingContactPair& pair, const TransmissionSpec& spec);

/// Inverse of hip_joint_to_motor or knee_joint_to_motor, by spec kind.
/// `pair` is required for knee_rolling transmissions.
double motor_to_joint(double tau_motor, const TransmissionSpec& spec, const RollingContactPair* pair = nullptr);

double gear_product(const TransmissionSpec& spec);

struct MotorTorque {
  std::string joint;
  double torque = 0.0;
};

/// Motor torque for every transmission in the model, given actuated joint
/// torques ordered like RobotModel::actuated_v_indices().
std::vector<MotorTorque> motor_torques(const RobotModel& model, const VectorX& tau_actuated);

}  // namespace rcwbc
