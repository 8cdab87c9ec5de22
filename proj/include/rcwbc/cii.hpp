#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rcwbc/ik.hpp"
#include "rcwbc/model.hpp"

namespace rcwbc {

/// det(I_G(q)^-1 I_G(q0) - 1). Throws SingularInertia when cond(I_G(q)) > 1e12.
double cii_value(const RobotModel& model, const RobotState& state, const RobotState& nominal);

struct CiiSweepConfig {
  // Nominal pose: upright base, stance sole on the ground plane.
  double knee_bend = 1.5707963267948966;       // total bend of every rolling-contact knee, rad
  std::map<std::string, double> joint_angles;  // further nominal joint angles, rad
  std::string base_frame = "pelvis";
  std::string stance_frame = "l_sole";
  std::string swing_frame = "r_sole";
  // Step-target grid, metres, scaled by model height / reference_height when normalizing.
  Interval forward{0.1, 0.2};
  Interval lateral{-0.1, 0.1};
  int forward_points = 10;
  int lateral_points = 10;
  double swing_height = 0.05;
  int samples = 30;
  bool normalize_by_height = true;
  double reference_height = 1.35;
  IkSettings ik;

  void validate() const;  // throws ValidationError
};

CiiSweepConfig parse_cii_sweep_config(std::string_view text);
CiiSweepConfig load_cii_sweep_config(const std::filesystem::path& path);

RobotState cii_nominal_state(const RobotModel& model, const CiiSweepConfig& config);

struct SweepSample {
  int grid_point = 0;
  int sample = 0;
  double forward = 0.0;  // step target offsets, m
  double lateral = 0.0;
  RobotState state;
};

struct SweepResult {
  RobotState nominal;
  std::vector<SweepSample> samples;
  int ik_failures = 0;
  int attempted = 0;
};

/// One swing trajectory per grid point, straight line with a triangular
/// height apex, base midway between stance and swing sole; each sample solved
/// by IK seeded from the previous one. IK failures are counted and skipped.
SweepResult sample_step_configurations(const RobotModel& model, const CiiSweepConfig& config);

struct CiiEntry {
  int grid_point = 0;
  int sample = 0;
  double forward = 0.0;
  double lateral = 0.0;
  double value = 0.0;
};

struct CiiModelReport {
  std::string model;
  std::vector<CiiEntry> entries;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double max_abs = 0.0;
  int ik_failures = 0;
  int attempted = 0;
};

CiiModelReport cii_sweep(const RobotModel& model, const CiiSweepConfig& config);

struct CiiReport {
  CiiModelReport a;
  CiiModelReport b;
  double range_change = 0.0;  // (range_b - range_a) / range_b
};

CiiReport cii_report(const RobotModel& model_a, const RobotModel& model_b, const CiiSweepConfig& config);

/// cii_table.csv plus cii_report.yaml; `b` may be null for a single model.
void write_cii_outputs(const std::filesystem::path& dir, const CiiModelReport& a, const CiiModelReport* b,
                       const CiiSweepConfig& config);

}  // namespace rcwbc
