#pragma once

#include <string>
#include <vector>

#include "rcwbc/model.hpp"

namespace rcwbc {

struct IkTarget {
  std::string frame;
  Transform pose;
};

struct IkSettings {
  double tolerance = 1e-6;
  int max_iterations = 200;
  double damping = 1e-3;
};

/// Damped least squares over the reduced coordinates in which every rolling
/// pair stays consistent. Joints are clamped to their position limits after
/// each step. Throws IkDidNotConverge carrying the best residual.
RobotState solve_ik(const RobotModel& model, const std::vector<IkTarget>& targets, const RobotState& seed,
                    const IkSettings& settings = {}, int* iterations = nullptr);

/// Stacked [rotation error; position error] of all targets, world frame.
VectorX ik_error(const RobotModel& model, const std::vector<IkTarget>& targets, const RobotState& state);

/// nv x (nv - pairs) basis: velocities with every proximal joint slaved to its distal joint.
MatrixX consistent_velocity_basis(const RobotModel& model);

}  // namespace rcwbc
