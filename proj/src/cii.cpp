#include "rcwbc/cii.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/errors.hpp"
#include "rcwbc/logging.hpp"
#include "yaml_util.hpp"

namespace rcwbc {

double cii_value(const RobotModel& model, const RobotState& state, const RobotState& nominal) {
  const Matrix3 ig = centroidal_inertia(model, state).I_G;
  const Matrix3 ig0 = centroidal_inertia(model, nominal).I_G;
  const Eigen::SelfAdjointEigenSolver<Matrix3> eig(ig);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) throw SingularInertia("centroidal inertia is numerically singular");
  return (ig.ldlt().solve(ig0) - Matrix3::Identity()).determinant();
}

void CiiSweepConfig::validate() const {
  if (forward.lower > forward.upper) throw ValidationError("cii sweep: forward range is not ordered");
  if (lateral.lower > lateral.upper) throw ValidationError("cii sweep: lateral range is not ordered");
  if (forward_points < 1 || lateral_points < 1) throw ValidationError("cii sweep: grid needs at least one point");
  if (samples < 2) throw ValidationError("cii sweep: at least two samples per trajectory");
  if (swing_height < 0.0) throw ValidationError("cii sweep: swing height must be non-negative");
  if (!(reference_height > 0.0)) throw ValidationError("cii sweep: reference height must be positive");
  if (!(ik.tolerance > 0.0) || ik.max_iterations < 0) throw ValidationError("cii sweep: bad IK settings");
}

CiiSweepConfig parse_cii_sweep_config(std::string_view text) {
  using namespace rcwbc::yaml;
  const YAML::Node n = parse_document(text);
  const std::string ctx = "cii sweep";
  check_keys(n,
             {"knee_bend", "joint_angles", "base_frame", "stance_frame", "swing_frame", "forward", "lateral",
              "forward_points", "lateral_points", "swing_height", "samples", "normalize_by_height",
              "reference_height", "ik"},
             ctx);
  CiiSweepConfig c;
  if (n["knee_bend"]) c.knee_bend = as_double(n["knee_bend"], ctx + ".knee_bend");
  if (n["joint_angles"]) {
    require_map(n["joint_angles"], ctx + ".joint_angles");
    for (const auto& kv : n["joint_angles"])
      c.joint_angles[kv.first.as<std::string>()] = as_double(kv.second, ctx + ".joint_angles");
  }
  if (n["base_frame"]) c.base_frame = as_string(n["base_frame"], ctx + ".base_frame");
  if (n["stance_frame"]) c.stance_frame = as_string(n["stance_frame"], ctx + ".stance_frame");
  if (n["swing_frame"]) c.swing_frame = as_string(n["swing_frame"], ctx + ".swing_frame");
  if (n["forward"]) c.forward = as_interval(n["forward"], ctx + ".forward");
  if (n["lateral"]) c.lateral = as_interval(n["lateral"], ctx + ".lateral");
  if (n["forward_points"]) c.forward_points = as<int>(n["forward_points"], ctx + ".forward_points");
  if (n["lateral_points"]) c.lateral_points = as<int>(n["lateral_points"], ctx + ".lateral_points");
  if (n["swing_height"]) c.swing_height = as_double(n["swing_height"], ctx + ".swing_height");
  if (n["samples"]) c.samples = as<int>(n["samples"], ctx + ".samples");
  if (n["normalize_by_height"]) c.normalize_by_height = as<bool>(n["normalize_by_height"], ctx);
  if (n["reference_height"]) c.reference_height = as_double(n["reference_height"], ctx + ".reference_height");
  if (n["ik"]) {
    const YAML::Node ik = n["ik"];
    check_keys(ik, {"tolerance", "max_iterations", "damping"}, ctx + ".ik");
    if (ik["tolerance"]) c.ik.tolerance = as_double(ik["tolerance"], ctx + ".ik.tolerance");
    if (ik["max_iterations"]) c.ik.max_iterations = as<int>(ik["max_iterations"], ctx + ".ik.max_iterations");
    if (ik["damping"]) c.ik.damping = as_double(ik["damping"], ctx + ".ik.damping");
  }
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line_of(n));
  }
  return c;
}

CiiSweepConfig load_cii_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sweep file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_cii_sweep_config(ss.str());
}

RobotState cii_nominal_state(const RobotModel& model, const CiiSweepConfig& config) {
  RobotState s = neutral_state(model);
  const auto& pairs = model.rolling_pair_indices();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double ratio = model.spec().rolling_pairs[p].ratio();
    const double distal = config.knee_bend / (1.0 + ratio);
    s.q(pairs[p].second + 1) = distal;
    s.q(pairs[p].first + 1) = ratio * distal;
  }
  for (const auto& [joint, angle] : config.joint_angles) s.q(model.joint_q_index(joint)) = angle;
  s.q(2) -= frame_pose(model, s, config.stance_frame).translation.z();
  return s;
}

SweepResult sample_step_configurations(const RobotModel& model, const CiiSweepConfig& config) {
  config.validate();
  SweepResult out;
  out.nominal = cii_nominal_state(model, config);
  const Kinematics kin = compute_kinematics(model, out.nominal);
  const Transform stance = frame_pose(model, kin, config.stance_frame);
  const Transform swing0 = frame_pose(model, kin, config.swing_frame);
  const Transform base0 = frame_pose(model, kin, config.base_frame);
  const double scale = config.normalize_by_height && model.spec().height > 0.0
                           ? model.spec().height / config.reference_height
                           : 1.0;
  const auto grid = [](const Interval& r, int count, int i) {
    return count == 1 ? r.lower : r.lower + (r.upper - r.lower) * i / (count - 1);
  };
  int grid_point = 0;
  for (int i = 0; i < config.forward_points; ++i) {
    for (int j = 0; j < config.lateral_points; ++j, ++grid_point) {
      const double dx = scale * grid(config.forward, config.forward_points, i);
      const double dy = scale * grid(config.lateral, config.lateral_points, j);
      RobotState seed = out.nominal;
      for (int k = 0; k < config.samples; ++k) {
        const double s = static_cast<double>(k) / (config.samples - 1);
        Transform swing = swing0;
        swing.translation += s * Vector3(dx, dy, 0.0);
        swing.translation.z() += config.swing_height * (1.0 - std::abs(2.0 * s - 1.0));
        Transform base = base0;
        base.translation.head<2>() = 0.5 * (stance.translation.head<2>() + swing.translation.head<2>());
        const std::vector<IkTarget> targets{
            {config.base_frame, base}, {config.stance_frame, stance}, {config.swing_frame, swing}};
        ++out.attempted;
        try {
          seed = solve_ik(model, targets, seed, config.ik);
          out.samples.push_back({grid_point, k, dx, dy, seed});
        } catch (const IkDidNotConverge& e) {
          ++out.ik_failures;
          log::logger().debug("IK failed at grid point {} sample {}: residual {}", grid_point, k, e.best_residual());
        }
      }
    }
  }
  if (out.ik_failures > 0) log::logger().warn("{} of {} sweep configurations failed IK", out.ik_failures, out.attempted);
  return out;
}

CiiModelReport cii_sweep(const RobotModel& model, const CiiSweepConfig& config) {
  const SweepResult sweep = sample_step_configurations(model, config);
  CiiModelReport r;
  r.model = model.name();
  r.ik_failures = sweep.ik_failures;
  r.attempted = sweep.attempted;
  for (const auto& s : sweep.samples)
    r.entries.push_back({s.grid_point, s.sample, s.forward, s.lateral, cii_value(model, s.state, sweep.nominal)});
  if (!r.entries.empty()) {
    r.min = r.max = r.entries.front().value;
    for (const auto& e : r.entries) {
      r.min = std::min(r.min, e.value);
      r.max = std::max(r.max, e.value);
      r.max_abs = std::max(r.max_abs, std::abs(e.value));
    }
  }
  r.range = r.max - r.min;
  return r;
}

CiiReport cii_report(const RobotModel& model_a, const RobotModel& model_b, const CiiSweepConfig& config) {
  if (model_a.nv() != model_b.nv() || model_a.bodies().size() != model_b.bodies().size())
    throw ValidationError("cii comparison needs two models with the same topology");
  CiiReport r;
  r.a = cii_sweep(model_a, config);
  r.b = cii_sweep(model_b, config);
  r.range_change = r.b.range > 0.0 ? (r.b.range - r.a.range) / r.b.range : 0.0;
  return r;
}

namespace {

void emit_model(YAML::Emitter& e, const CiiModelReport& r) {
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << r.model;
  e << YAML::Key << "configurations" << YAML::Value << r.entries.size();
  e << YAML::Key << "ik_failures" << YAML::Value << r.ik_failures;
  e << YAML::Key << "min" << YAML::Value << r.min;
  e << YAML::Key << "max" << YAML::Value << r.max;
  e << YAML::Key << "range" << YAML::Value << r.range;
  e << YAML::Key << "max_abs" << YAML::Value << r.max_abs;
  e << YAML::EndMap;
}

}  // namespace

void write_cii_outputs(const std::filesystem::path& dir, const CiiModelReport& a, const CiiModelReport* b,
                       const CiiSweepConfig& config) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "cii_table.csv");
    csv.precision(17);
    csv << "model,grid_point,sample,forward,lateral,cii\n";
    for (const CiiModelReport* r : {&a, b}) {
      if (!r) continue;
      for (const auto& e : r->entries)
        csv << r->model << ',' << e.grid_point << ',' << e.sample << ',' << e.forward << ',' << e.lateral << ','
            << e.value << '\n';
    }
  }
  YAML::Emitter e;
  e.SetDoublePrecision(10);
  e << YAML::BeginMap;
  e << YAML::Key << "grid_points" << YAML::Value << config.forward_points * config.lateral_points;
  e << YAML::Key << "samples_per_trajectory" << YAML::Value << config.samples;
  e << YAML::Key << "models" << YAML::Value << YAML::BeginSeq;
  emit_model(e, a);
  if (b) emit_model(e, *b);
  e << YAML::EndSeq;
  if (b) {
    const double change = b->range > 0.0 ? (b->range - a.range) / b->range : 0.0;
    e << YAML::Key << "comparison" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "range_reduction_percent" << YAML::Value << 100.0 * change;
    e << YAML::Key << "reference_hardware_reduction_percent" << YAML::Value << 36.0;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  std::ofstream out(dir / "cii_report.yaml");
  out << e.c_str() << '\n';
}

}  // namespace rcwbc
