#include "rcwbc/sim.hpp"

#include <cmath>
#include <limits>

#include "rcwbc/errors.hpp"
#include "rcwbc/logging.hpp"
#include "rcwbc/rolling_contact.hpp"

namespace rcwbc {

StepResult step_constrained_dynamics(const RobotModel& model, const RobotState& state, const VectorX& tau,
                                     const std::vector<std::string>& pinned_frames, const StepSettings& settings,
                                     const VectorX& external) {
  if (!(settings.dt > 0.0) || settings.dt > 1e-3) throw ValidationError("simulation step must lie in (0, 1e-3] s");
  if (tau.size() != model.num_actuated()) throw DimensionMismatch("torque vector must have one entry per actuator");
  if (external.size() != 0 && external.size() != model.nv())
    throw DimensionMismatch("external generalized force must have nv entries");
  const int nv = model.nv();
  const DynamicsCache d = compute_dynamics(model, state, settings.gravity);
  const InternalConstraintSet ics = build_internal_jacobian(model);
  const int nc = 6 * static_cast<int>(pinned_frames.size());
  const int m = nc + ics.rows();

  MatrixX J(m, nv);
  VectorX jdv = VectorX::Zero(m);
  for (std::size_t i = 0; i < pinned_frames.size(); ++i) {
    if (!model.find_frame(pinned_frames[i]))
      throw MissingContactFrame("pinned frame '" + pinned_frames[i] + "' not in model");
    J.middleRows(6 * i, 6) = frame_jacobian(model, d.kin, pinned_frames[i]);
    jdv.segment<6>(6 * i) = jacobian_dot_times_v(model, d.kin, pinned_frames[i]);
  }
  if (ics.rows() > 0) J.bottomRows(ics.rows()) = ics.J_int;

  VectorX rhs = model.actuation_selection().transpose() * tau - d.bg;
  if (external.size()) rhs += external;

  const Eigen::LLT<MatrixX> a_llt(d.A);
  if (a_llt.info() != Eigen::Success) throw NonPositiveDefinite("mass matrix is not positive definite");
  const VectorX qdd_free = a_llt.solve(rhs);
  StepResult out;
  out.qdd = qdd_free;
  VectorX lambda;
  if (m > 0) {
    const MatrixX ainv_jt = a_llt.solve(J.transpose());
    const MatrixX lambda_mat = J * ainv_jt;
    const Eigen::SelfAdjointEigenSolver<MatrixX> eig(lambda_mat);
    const double hi = eig.eigenvalues().maxCoeff(), lo = eig.eigenvalues().minCoeff();
    if (!(lo > 1e-12 * hi))
      throw SingularKkt("constraint stack is rank deficient (Delassus eigenvalues " + std::to_string(lo) + " / " +
                        std::to_string(hi) + ")");
    const VectorX target = -jdv - settings.baumgarte * (J * state.v) - J * qdd_free;
    lambda = lambda_mat.ldlt().solve(target);
    out.qdd += ainv_jt * lambda;
  }
  out.contact_forces = m > 0 ? VectorX(lambda.head(nc)) : VectorX();
  out.internal_forces = m > 0 ? VectorX(lambda.tail(ics.rows())) : VectorX();
  out.state.v = state.v + settings.dt * out.qdd;
  out.state.q = integrate_configuration(model, state.q, out.state.v, settings.dt);
  out.state.q.segment<4>(3).normalize();
  if (pinned_frames.empty() && settings.momentum_projection) {
    const double mass = model.total_mass();
    Vector3 force = mass * settings.gravity;
    if (external.size()) force += base_rotation(state.q) * external.segment<3>(3);
    const Vector3 target = mass * com_state(model, d.kin).velocity + settings.dt * force;
    const Vector3 now = mass * com_state(model, out.state).velocity;
    out.state.v.segment<3>(3) += base_rotation(out.state.q).transpose() * (target - now) / mass;
  }
  return out;
}

VectorX apply_push(const RobotModel& model, const RobotState& state, const Push& push, double t) {
  if (!model.find_frame(push.frame)) throw UnknownFrame("push frame '" + push.frame + "' not in model");
  if (t < push.time || t >= push.time + push.duration) return VectorX::Zero(model.nv());
  return frame_jacobian(model, state, push.frame).bottomRows(3).transpose() * push.force;
}

std::string to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::kInitialize:
      return "initialize";
    case PhaseKind::kBalance:
      return "balance";
    case PhaseKind::kSwingCom:
      return "swing_com";
    case PhaseKind::kSquat:
      return "squat";
  }
  return "unknown";
}

void Scenario::validate() const {
  if (!(sim_dt > 0.0) || sim_dt > 1e-3) throw ValidationError("scenario: sim_dt must lie in (0, 1e-3] s");
  if (control_dt < sim_dt) throw ValidationError("scenario: control_dt must not be smaller than sim_dt");
  const double ratio = control_dt / sim_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ValidationError("scenario: control_dt must be an integer multiple of sim_dt");
  if (phases.empty()) throw ValidationError("scenario: no phases");
  for (const auto& p : phases) {
    if (!(p.duration > 0.0)) throw ValidationError("scenario: phase durations must be positive");
    if (!(p.period > 0.0)) throw ValidationError("scenario: phase periods must be positive");
  }
  for (const auto& p : pushes)
    if (p.duration < 0.0 || p.time < 0.0) throw ValidationError("scenario: push times must be non-negative");
  if (total_time < 0.0) throw ValidationError("scenario: total_time must be non-negative");
  if (baumgarte < 0.0) throw ValidationError("scenario: baumgarte gain must be non-negative");
}

double Scenario::duration() const {
  if (total_time > 0.0) return total_time;
  double t = 0.0;
  for (const auto& p : phases) t += p.duration;
  return t;
}

RobotState initial_state(const RobotModel& model, const InitialPose& pose, const std::vector<std::string>& ground) {
  RobotState s = neutral_state(model);
  const auto& pairs = model.rolling_pair_indices();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double ratio = model.spec().rolling_pairs[p].ratio();
    const double distal = pose.knee_bend / (1.0 + ratio);
    s.q(pairs[p].second + 1) = distal;
    s.q(pairs[p].first + 1) = ratio * distal;
  }
  for (const auto& [joint, angle] : pose.joint_angles) s.q(model.joint_q_index(joint)) = angle;
  if (!ground.empty()) {
    double lowest = 0.0;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      const double z = frame_pose(model, s, ground[i]).translation.z();
      lowest = i == 0 ? z : std::min(lowest, z);
    }
    s.q(2) -= lowest;
  }
  return s;
}

namespace {

struct Offsets {
  double lateral = 0, lateral_v = 0, lateral_a = 0;
  double height = 0, height_v = 0, height_a = 0;
};

Offsets phase_offsets(const Phase& p, double tau) {
  Offsets o;
  const double w = 2.0 * M_PI / p.period;
  const double s = p.amplitude * std::sin(w * tau), c = p.amplitude * w * std::cos(w * tau);
  if (p.kind == PhaseKind::kSwingCom) {
    o.lateral = s;
    o.lateral_v = c;
    o.lateral_a = -w * w * s;
  } else if (p.kind == PhaseKind::kSquat) {
    o.height = s;
    o.height_v = c;
    o.height_a = -w * w * s;
  }
  return o;
}

double cone_margin(const RobotModel& model, const Kinematics& kin, const std::vector<ContactSpec>& contacts,
                   const VectorX& forces) {
  double margin = std::numeric_limits<double>::infinity();
  int row = 0;
  for (const auto& c : contacts) {
    if (c.unilateral) {
      const Matrix3 r = frame_pose(model, kin, c.frame).rotation;
      VectorX local(c.dim);
      for (int b = 0; b < c.dim / 3; ++b) local.segment<3>(3 * b) = r.transpose() * forces.segment<3>(row + 3 * b);
      margin = std::min(margin, (build_friction_cone(c) * local).minCoeff());
    }
    row += c.dim;
  }
  return std::isfinite(margin) ? margin : 0.0;
}

}  // namespace

TrajectoryLog run_scenario(const RobotModel& model, const ControllerConfig& controller, const Scenario& scenario) {
  scenario.validate();
  TrajectoryLog log;
  log.scenario = scenario.name;
  for (const auto& p : scenario.phases) log.phase_names.push_back(to_string(p.kind));
  log.q_names = {"base_x", "base_y", "base_z", "base_qw", "base_qx", "base_qy", "base_qz"};
  log.v_names = {"base_wx", "base_wy", "base_wz", "base_vx", "base_vy", "base_vz"};
  for (int i = 6; i < model.nv(); ++i) {
    log.q_names.push_back(model.joint_at_v_index(i).name);
    log.v_names.push_back(model.joint_at_v_index(i).name);
  }
  for (int i : model.actuated_v_indices()) log.actuated_names.push_back(model.joint_at_v_index(i).name);

  std::vector<std::string> pinned;
  for (const auto& c : controller.contacts) {
    pinned.push_back(c.frame);
    log.contact_frames.push_back(c.frame);
  }
  for (const auto& p : scenario.pushes)
    if (!model.find_frame(p.frame)) throw UnknownFrame("push frame '" + p.frame + "' not in model");
  if (!model.find_frame(scenario.base_frame)) throw UnknownFrame("base frame '" + scenario.base_frame + "' not in model");
  if (!model.find_frame(scenario.lateral_frame))
    throw UnknownFrame("lateral frame '" + scenario.lateral_frame + "' not in model");

  WbcConfig wbc = controller.wbc;
  wbc.dt = scenario.control_dt;
  WholeBodyController ctl(model, wbc);
  StepSettings step;
  step.dt = scenario.sim_dt;
  step.baumgarte = scenario.baumgarte;
  step.gravity = wbc.gravity;

  RobotState state = initial_state(model, scenario.initial, pinned);
  const VectorX q_init = state.q;
  // Reference anchors from the initial state.
  const Kinematics kin0 = compute_kinematics(model, state);
  std::vector<Transform> pose0;
  for (const auto& t : controller.tasks) pose0.push_back(t.kind == TaskKind::kFrame ? frame_pose(model, kin0, t.frame) : Transform{});
  const Vector3 com0 = com_state(model, kin0).position;
  const Transform base0 = frame_pose(model, kin0, scenario.base_frame);
  const Vector3 rpy0 = rpy_from_rotation(base0.rotation);
  Vector3 lateral_dir = frame_pose(model, kin0, scenario.lateral_frame).rotation.col(1);
  lateral_dir.z() = 0.0;
  lateral_dir.normalize();

  const int substeps = static_cast<int>(std::lround(scenario.control_dt / scenario.sim_dt));
  const long ticks = std::lround(scenario.duration() / scenario.control_dt);
  std::vector<double> phase_start;
  double acc = 0.0;
  for (const auto& p : scenario.phases) {
    phase_start.push_back(acc);
    acc += p.duration;
  }
  const InternalConstraintSet ics = build_internal_jacobian(model);

  log.rows.reserve(ticks);
  for (long tick = 0; tick < ticks; ++tick) {
    const double t = tick * scenario.control_dt;
    int phase = 0;
    while (phase + 1 < static_cast<int>(scenario.phases.size()) && t >= phase_start[phase + 1] - 1e-12) ++phase;
    const Offsets off = phase_offsets(scenario.phases[phase], t - phase_start[phase]);
    const Vector3 com_ref = com0 + off.lateral * lateral_dir;

    std::vector<TaskSpec> tasks = controller.tasks;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      TaskSpec& task = tasks[i];
      TaskReference& ref = task.reference;
      switch (task.kind) {
        case TaskKind::kFrame: {
          ref.pose = pose0[i];
          ref.velocity = VectorX::Zero(6);
          ref.acceleration = VectorX::Zero(6);
          if (task.frame == scenario.base_frame) {
            ref.pose.translation += off.lateral * lateral_dir + Vector3(0, 0, off.height);
            ref.velocity.tail<3>() = off.lateral_v * lateral_dir + Vector3(0, 0, off.height_v);
            ref.acceleration.tail<3>() = off.lateral_a * lateral_dir + Vector3(0, 0, off.height_a);
          }
          break;
        }
        case TaskKind::kCom:
        case TaskKind::kIcp:
          ref.position = com_ref + Vector3(0, 0, off.height);
          ref.velocity = off.lateral_v * lateral_dir + Vector3(0, 0, off.height_v);
          ref.acceleration = off.lateral_a * lateral_dir + Vector3(0, 0, off.height_a);
          break;
        case TaskKind::kJoint: {
          ref.position.resize(static_cast<Eigen::Index>(task.joints.size()));
          for (std::size_t j = 0; j < task.joints.size(); ++j)
            ref.position(j) = q_init(model.joint_q_index(task.joints[j]));
          ref.velocity.resize(0);
          ref.acceleration.resize(0);
          break;
        }
      }
    }
    std::vector<ContactSpec> contacts = controller.contacts;
    const auto desired = gravity_consistent_wrenches(model, state, contacts, wbc.gravity);
    for (std::size_t i = 0; i < contacts.size(); ++i) contacts[i].desired = desired[i];

    WbcOutput out;
    try {
      out = ctl.update(state, tasks, contacts);
    } catch (const SolverInfeasible& e) {
      log.failed = true;
      log.failure = e.what();
      log.failure_block = e.block();
      log::logger().error("t = {:.3f} s: {}", t, e.what());
      break;
    }

    const Kinematics kin = compute_kinematics(model, state);
    LogRow row;
    row.time = t;
    row.phase = phase;
    row.q = state.q;
    row.v = state.v;
    row.qdd = out.qdd;
    row.forces = out.forces;
    row.tau = out.tau;
    row.com = com_state(model, kin).position;
    row.com_ref = com_ref;
    const Transform base = frame_pose(model, kin, scenario.base_frame);
    row.rpy = rpy_from_rotation(base.rotation);
    row.rpy_ref = rpy0;
    row.base_height = base.translation.z();
    row.base_height_ref = base0.translation.z() + off.height;
    row.internal_velocity = ics.rows() ? (ics.J_int * state.v).norm() : 0.0;
    row.internal_position = ics.rows() ? constraint_residual(model, state).cwiseAbs().maxCoeff() : 0.0;
    row.cone_margin = cone_margin(model, kin, contacts, out.forces);
    row.status = out.status;
    row.iterations = out.iterations;
    row.kkt_residual = out.kkt_residual;

    try {
      for (int k = 0; k < substeps; ++k) {
        const double ts = t + k * scenario.sim_dt;
        VectorX ext = VectorX::Zero(model.nv());
        for (const auto& p : scenario.pushes) {
          if (ts >= p.time && ts < p.time + p.duration) {
            ext += apply_push(model, state, p, ts);
            if (k == 0) row.push += p.force.norm();
          }
        }
        state = step_constrained_dynamics(model, state, out.tau, pinned, step, ext).state;
      }
    } catch (const SingularKkt& e) {
      log.rows.push_back(std::move(row));
      log.failed = true;
      log.failure = e.what();
      log::logger().error("t = {:.3f} s: {}", t, e.what());
      break;
    }
    log.rows.push_back(std::move(row));
  }
  return log;
}

TrajectoryLog run_scenario(const Scenario& scenario) {
  const RobotModel model = load_model(scenario.model_path);
  const ControllerConfig controller = load_controller_config(scenario.controller_path);
  return run_scenario(model, controller, scenario);
}

RunSummary summarize(const TrajectoryLog& log) {
  RunSummary s;
  s.ticks = static_cast<int>(log.rows.size());
  std::vector<int> counts(log.phase_names.size(), 0);
  for (std::size_t i = 0; i < log.phase_names.size(); ++i) s.phases.push_back({log.phase_names[i]});
  std::vector<bool> seen(log.phase_names.size(), false);
  double iters = 0.0;
  bool first = true;
  for (const auto& r : log.rows) {
    PhaseSummary& p = s.phases[r.phase];
    if (!seen[r.phase]) {
      p.start = r.time;
      seen[r.phase] = true;
    }
    p.end = r.time;
    ++counts[r.phase];
    p.com_rms += (r.com - r.com_ref).head<2>().squaredNorm();
    p.height_rms += std::pow(r.base_height - r.base_height_ref, 2);
    Vector3 drpy = r.rpy - r.rpy_ref;
    for (int k = 0; k < 3; ++k) drpy(k) = std::remainder(drpy(k), 2.0 * M_PI);
    p.rpy_max_deg = std::max(p.rpy_max_deg, drpy.cwiseAbs().maxCoeff() * 180.0 / M_PI);
    s.max_internal_velocity = std::max(s.max_internal_velocity, r.internal_velocity);
    s.max_internal_position = std::max(s.max_internal_position, r.internal_position);
    if (r.status == QpStatus::kOptimal) {
      s.min_cone_margin = first ? r.cone_margin : std::min(s.min_cone_margin, r.cone_margin);
      first = false;
    } else {
      ++s.non_optimal_ticks;
    }
    iters += r.iterations;
    s.max_iterations = std::max(s.max_iterations, r.iterations);
  }
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    if (counts[i] == 0) continue;
    s.phases[i].com_rms = std::sqrt(s.phases[i].com_rms / counts[i]);
    s.phases[i].height_rms = std::sqrt(s.phases[i].height_rms / counts[i]);
  }
  s.mean_iterations = s.ticks ? iters / s.ticks : 0.0;
  return s;
}

}  // namespace rcwbc
