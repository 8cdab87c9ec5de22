#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/model.hpp"
#include "rcwbc/wbc.hpp"

namespace rcwbc {

struct StepSettings {
  double dt = 5e-4;
  double baumgarte = 20.0;  // 1/s
  Vector3 gravity = kDefaultGravity;
  // Without pinned frames, correct the base linear velocity after the step so
  // that total linear momentum changes by exactly dt times the external force.
  bool momentum_projection = true;
};

struct StepResult {
  RobotState state;
  VectorX qdd;
  VectorX contact_forces;   // 6 per pinned frame, world-aligned [moment; force]
  VectorX internal_forces;  // one per rolling pair
};

/// Solves [A -J'; J 0][qdd; lambda] = [S_a' tau + f_ext - b - g; -Jdot v - beta J v]
/// with J stacking the pinned frames (6 rows each) and J_int, then takes one
/// semi-implicit Euler step. `external` is a generalized force (empty means none).
/// Throws SingularKkt if the constraint stack is rank deficient.
StepResult step_constrained_dynamics(const RobotModel& model, const RobotState& state, const VectorX& tau,
                                     const std::vector<std::string>& pinned_frames, const StepSettings& settings,
                                     const VectorX& external = {});

struct Push {
  double time = 0.0;
  double duration = 0.0;
  std::string frame;
  Vector3 force = Vector3::Zero();  // world frame, N
};

/// J_linear(frame)^T f inside [time, time + duration), zero outside.
VectorX apply_push(const RobotModel& model, const RobotState& state, const Push& push, double t);

enum class PhaseKind { kInitialize, kBalance, kSwingCom, kSquat };

std::string to_string(PhaseKind kind);

struct Phase {
  PhaseKind kind = PhaseKind::kBalance;
  double duration = 1.0;
  double amplitude = 0.0;  // m, lateral CoM shift or pelvis height
  double period = 4.0;     // s
};

struct InitialPose {
  double knee_bend = 0.0;                      // total bend of every rolling-contact knee
  std::map<std::string, double> joint_angles;  // rad
};

struct Scenario {
  std::string name;
  std::filesystem::path model_path;
  std::filesystem::path controller_path;
  InitialPose initial;
  std::vector<Phase> phases;
  std::vector<Push> pushes;
  double sim_dt = 5e-4;
  double control_dt = 1e-3;
  double total_time = 0.0;  // 0 means the sum of phase durations
  double baumgarte = 20.0;
  std::string base_frame = "pelvis";
  std::string lateral_frame = "l_sole";  // SwingCOM moves along this frame's y axis

  void validate() const;  // throws ValidationError
  double duration() const;
};

/// Paths inside the file resolve relative to the file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Standing pose: knee bend split over each rolling pair, listed joint angles,
/// soles of the given frames on the plane z = 0.
RobotState initial_state(const RobotModel& model, const InitialPose& pose, const std::vector<std::string>& ground);

struct LogRow {
  double time = 0.0;
  int phase = 0;
  VectorX q, v, qdd, forces, tau;
  Vector3 com = Vector3::Zero();
  Vector3 com_ref = Vector3::Zero();
  Vector3 rpy = Vector3::Zero();
  Vector3 rpy_ref = Vector3::Zero();
  double base_height = 0.0;
  double base_height_ref = 0.0;
  double internal_velocity = 0.0;   // |J_int v|
  double internal_position = 0.0;   // max |constraint residual|
  double cone_margin = 0.0;         // min of U F over contacts
  QpStatus status = QpStatus::kOptimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  double push = 0.0;                // |applied push force|, N
};

struct TrajectoryLog {
  std::string scenario;
  std::vector<std::string> phase_names;
  std::vector<std::string> q_names, v_names;  // column stems for q and v
  std::vector<std::string> actuated_names;
  std::vector<std::string> contact_frames;
  std::vector<LogRow> rows;
  bool failed = false;
  std::string failure;        // message of the error that stopped the run
  std::string failure_block;  // violated QP block when infeasible
};

/// Runs the phases in closed loop with the controller. A SolverInfeasible or
/// SingularKkt stops the run and is recorded in the log instead of thrown.
TrajectoryLog run_scenario(const RobotModel& model, const ControllerConfig& controller, const Scenario& scenario);
TrajectoryLog run_scenario(const Scenario& scenario);

struct PhaseSummary {
  std::string name;
  double start = 0.0;
  double end = 0.0;
  double com_rms = 0.0;          // horizontal CoM tracking, m
  double height_rms = 0.0;       // pelvis height tracking, m
  double rpy_max_deg = 0.0;      // max base orientation error
};

struct RunSummary {
  std::vector<PhaseSummary> phases;
  double max_internal_velocity = 0.0;
  double max_internal_position = 0.0;
  double min_cone_margin = 0.0;
  int ticks = 0;
  int non_optimal_ticks = 0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
};

RunSummary summarize(const TrajectoryLog& log);

/// log.csv (every `log_every`-th tick) and summary.yaml.
void write_log_csv(const TrajectoryLog& log, const std::filesystem::path& path, int log_every = 1);
void write_summary(const TrajectoryLog& log, const RunSummary& summary, const std::filesystem::path& path);

}  // namespace rcwbc
