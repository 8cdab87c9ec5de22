#include "rcwbc/wbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcwbc/errors.hpp"

namespace rcwbc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorX or_zero(const VectorX& v, Eigen::Index n, const std::string& what) {
  if (v.size() == 0) return VectorX::Zero(n);
  if (v.size() != n)
    throw DimensionMismatch(what + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  return v;
}

TaskTerms select_rows(TaskTerms t, const std::vector<int>& rows) {
  if (rows.empty()) return t;
  const auto m = static_cast<Eigen::Index>(rows.size());
  TaskTerms out;
  out.name = t.name;
  out.weight = t.weight;
  out.J.resize(m, t.J.cols());
  out.Jdv.resize(m);
  out.desired_acceleration.resize(m);
  out.error.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int r = rows[i];
    if (r < 0 || r >= t.J.rows())
      throw ValidationError("task '" + t.name + "': row " + std::to_string(r) + " out of range");
    out.J.row(i) = t.J.row(r);
    out.Jdv(i) = t.Jdv(r);
    out.desired_acceleration(i) = t.desired_acceleration(r);
    out.error(i) = t.error(r);
  }
  return out;
}

MatrixX contact_rotation_block(const Matrix3& r, int dim) {
  MatrixX out = MatrixX::Zero(dim, dim);
  for (int b = 0; b < dim / 3; ++b) out.block<3, 3>(3 * b, 3 * b) = r.transpose();
  return out;
}

}  // namespace

TaskTerms evaluate_task(const RobotModel& model, const RobotState& state, const Kinematics& kin, const TaskSpec& task,
                        const Vector3& gravity) {
  if (task.weight < 0.0 || !std::isfinite(task.weight))
    throw ValidationError("task '" + task.name + "': weight must be non-negative");
  TaskTerms t;
  t.name = task.name;
  t.weight = task.weight;
  const TaskReference& ref = task.reference;
  switch (task.kind) {
    case TaskKind::kFrame: {
      if (!model.find_frame(task.frame)) throw UnknownFrame("task '" + task.name + "': unknown frame '" + task.frame + "'");
      const Transform pose = frame_pose(model, kin, task.frame);
      t.J = frame_jacobian(model, kin, task.frame);
      t.Jdv = jacobian_dot_times_v(model, kin, task.frame);
      const Vector6 vel = t.J * state.v;
      Vector6 err;
      err.head<3>() = log_so3(ref.pose.rotation * pose.rotation.transpose());
      err.tail<3>() = ref.pose.translation - pose.translation;
      const VectorX vref = or_zero(ref.velocity, 6, "task '" + task.name + "' velocity");
      const VectorX aref = or_zero(ref.acceleration, 6, "task '" + task.name + "' acceleration");
      t.error = err;
      t.desired_acceleration = aref + task.kp * err + task.kd * (vref - vel);
      break;
    }
    case TaskKind::kCom: {
      const ComState com = com_state(model, kin);
      t.J = com_jacobian(model, kin);
      t.Jdv = com_jacobian_dot_times_v(model, kin);
      const VectorX pref = or_zero(ref.position, 3, "task '" + task.name + "' position");
      const VectorX vref = or_zero(ref.velocity, 3, "task '" + task.name + "' velocity");
      const VectorX aref = or_zero(ref.acceleration, 3, "task '" + task.name + "' acceleration");
      t.error = pref - com.position;
      t.desired_acceleration = aref + task.kp * t.error + task.kd * (vref - com.velocity);
      break;
    }
    case TaskKind::kIcp: {
      // Horizontal CoM rows only; the ground is the plane z = 0.
      const ComState com = com_state(model, kin);
      const VectorX pref = or_zero(ref.position, 3, "task '" + task.name + "' position");
      const VectorX vref = or_zero(ref.velocity, 3, "task '" + task.name + "' velocity");
      const VectorX aref = or_zero(ref.acceleration, 3, "task '" + task.name + "' acceleration");
      const double height = pref(2) > 0.0 ? pref(2) : com.position(2);
      if (height <= 0.0) throw ValidationError("task '" + task.name + "': CoM height must be positive");
      const double omega = std::sqrt(std::abs(gravity(2)) / height);
      const MatrixX jc = com_jacobian(model, kin);
      t.J = jc.topRows(2);
      t.Jdv = com_jacobian_dot_times_v(model, kin).head<2>();
      const Eigen::Vector2d x = com.position.head<2>(), xd = com.velocity.head<2>();
      const Eigen::Vector2d icp = x + xd / omega;
      const Eigen::Vector2d icp_ref = pref.head<2>() + vref.head<2>() / omega;
      const Eigen::Vector2d icp_ref_dot = vref.head<2>() + aref.head<2>() / omega;
      t.error = icp_ref - icp;
      t.desired_acceleration = omega * (icp_ref_dot + task.kp * (icp_ref - icp) - xd);
      break;
    }
    case TaskKind::kJoint: {
      const auto m = static_cast<Eigen::Index>(task.joints.size());
      t.J = MatrixX::Zero(m, model.nv());
      t.Jdv = VectorX::Zero(m);
      VectorX q(m), qd(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const int vi = model.joint_v_index(task.joints[i]);
        t.J(i, vi) = 1.0;
        q(i) = state.q(vi + 1);
        qd(i) = state.v(vi);
      }
      const VectorX pref = or_zero(ref.position, m, "task '" + task.name + "' position");
      const VectorX vref = or_zero(ref.velocity, m, "task '" + task.name + "' velocity");
      const VectorX aref = or_zero(ref.acceleration, m, "task '" + task.name + "' acceleration");
      t.error = pref - q;
      t.desired_acceleration = aref + task.kp * t.error + task.kd * (vref - qd);
      break;
    }
  }
  return select_rows(std::move(t), task.rows);
}

MatrixX build_friction_cone(const ContactSpec& c) {
  if (c.dim != 3 && c.dim != 6) throw ValidationError("contact '" + c.frame + "': dimension must be 3 or 6");
  if (c.mu < 0.0) throw ValidationError("contact '" + c.frame + "': friction coefficient must be non-negative");
  const int f = c.dim - 3;  // index of f_x
  const int fz = f + 2;
  MatrixX u = MatrixX::Zero(c.dim == 6 ? 11 : 5, c.dim);
  u(0, fz) = 1.0;
  u(1, fz) = c.mu; u(1, f) = -1.0;
  u(2, fz) = c.mu; u(2, f) = 1.0;
  u(3, fz) = c.mu; u(3, f + 1) = -1.0;
  u(4, fz) = c.mu; u(4, f + 1) = 1.0;
  if (c.dim == 6) {
    if (c.half_length_x <= 0.0 || c.half_length_y <= 0.0)
      throw ValidationError("contact '" + c.frame + "': foot half-lengths must be positive");
    // Centre of pressure: p_x = -n_y / f_z, p_y = n_x / f_z.
    u(5, fz) = c.half_length_x; u(5, 1) = -1.0;
    u(6, fz) = c.half_length_x; u(6, 1) = 1.0;
    u(7, fz) = c.half_length_y; u(7, 0) = -1.0;
    u(8, fz) = c.half_length_y; u(8, 0) = 1.0;
    const double mu_yaw = c.mu * std::min(c.half_length_x, c.half_length_y);
    u(9, fz) = mu_yaw; u(9, 2) = -1.0;
    u(10, fz) = mu_yaw; u(10, 2) = 1.0;
  }
  return u;
}

std::vector<VectorX> gravity_consistent_wrenches(const RobotModel& model, const RobotState& state,
                                                 const std::vector<ContactSpec>& contacts, const Vector3& gravity) {
  std::vector<VectorX> out;
  if (contacts.empty()) return out;
  const Kinematics kin = compute_kinematics(model, state);
  const Vector3 com = com_state(model, kin).position;
  const auto n = static_cast<Eigen::Index>(contacts.size());
  // Least-norm weights w with sum(w) = 1 and sum(w_i p_i) = com in the plane.
  MatrixX c(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!model.find_frame(contacts[i].frame))
      throw MissingContactFrame("contact frame '" + contacts[i].frame + "' not in model");
    const Vector3 p = frame_pose(model, kin, contacts[i].frame).translation;
    c(0, i) = 1.0;
    c(1, i) = p(0);
    c(2, i) = p(1);
  }
  VectorX w = pseudo_inverse(c, 1e-9) * Vector3(1.0, com(0), com(1));
  w = w.cwiseMax(0.0);
  if (w.sum() <= 0.0) w.setConstant(1.0);
  w /= w.sum();
  const Vector3 support = -model.total_mass() * gravity;
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorX f = VectorX::Zero(contacts[i].dim);
    f.tail<3>() = w(i) * support;
    out.push_back(f);
  }
  return out;
}

std::string WbcProblem::block_name(const ConstraintRef& ref) const {
  const auto find = [&](const std::vector<ConstraintBlockRange>& blocks) -> std::string {
    for (const auto& b : blocks)
      if (ref.index >= b.start && ref.index < b.start + b.count) return b.name;
    return "unknown";
  };
  switch (ref.block) {
    case ConstraintBlock::kEquality:
      return find(equality_blocks);
    case ConstraintBlock::kInequality:
      return find(inequality_blocks);
    case ConstraintBlock::kBox:
      return ref.index < nv ? "acceleration_limits" : "contact_force_bounds";
  }
  return "unknown";
}

WbcProblem assemble_wbc_qp(const RobotModel& model, const RobotState& state, const std::vector<TaskSpec>& tasks,
                           const std::vector<ContactSpec>& contacts, const WbcConfig& config) {
  if (!(config.lambda_q > 0.0) || !(config.lambda_f > 0.0))
    throw ValidationError("regularization weights must be positive");
  check_state(model, state);

  WbcProblem p;
  const int nv = model.nv();
  const int nj = model.num_joints();
  p.nv = nv;
  p.dynamics = compute_dynamics(model, state, config.gravity);
  const Kinematics& kin = p.dynamics.kin;
  const MatrixX& A = p.dynamics.A;

  // Contacts.
  std::vector<Matrix3> rotations;
  std::vector<VectorX> desired;
  int nf = 0;
  for (const auto& c : contacts) {
    if (!model.find_frame(c.frame)) throw MissingContactFrame("contact frame '" + c.frame + "' not in model");
    if (c.dim != 3 && c.dim != 6) throw ValidationError("contact '" + c.frame + "': dimension must be 3 or 6");
    if (c.weight < 0.0) throw ValidationError("contact '" + c.frame + "': weight must be non-negative");
    nf += c.dim;
  }
  p.nf = nf;
  p.contact_jacobian = MatrixX::Zero(nf, nv);
  p.contact_jdv = VectorX::Zero(nf);
  {
    int row = 0;
    for (const auto& c : contacts) {
      const MatrixX j = frame_jacobian(model, kin, c.frame);
      const Vector6 jdv = jacobian_dot_times_v(model, kin, c.frame);
      p.contact_jacobian.middleRows(row, c.dim) = j.bottomRows(c.dim);
      p.contact_jdv.segment(row, c.dim) = jdv.tail(c.dim);
      rotations.push_back(frame_pose(model, kin, c.frame).rotation);
      desired.push_back(or_zero(c.desired, c.dim, "contact '" + c.frame + "' desired wrench"));
      row += c.dim;
    }
  }

  p.internal = build_internal_jacobian(model);
  p.projected = project_dynamics(model, p.internal, A, p.dynamics.bg, p.contact_jacobian);
  const MatrixX S_a = model.actuation_selection();
  p.torque_map = truncated_actuation_inverse(p.projected, S_a).transpose();

  const int n = nv + nf;
  QpProblem& qp = p.qp;
  qp.H = MatrixX::Zero(n, n);
  qp.g = VectorX::Zero(n);

  // Task costs.
  for (const auto& spec : tasks) {
    TaskTerms t = evaluate_task(model, state, kin, spec, config.gravity);
    const VectorX r0 = t.Jdv - t.desired_acceleration;
    qp.H.topLeftCorner(nv, nv).noalias() += t.weight * t.J.transpose() * t.J;
    qp.g.head(nv).noalias() += t.weight * t.J.transpose() * r0;
    p.tasks.push_back(std::move(t));
  }
  qp.H.topLeftCorner(nv, nv).diagonal().array() += config.lambda_q;
  {
    int row = nv;
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      const int d = contacts[i].dim;
      qp.H.block(row, row, d, d).diagonal().array() += contacts[i].weight + config.lambda_f;
      qp.g.segment(row, d) = -contacts[i].weight * desired[i];
      row += d;
    }
  }

  // Equalities: floating-base rows, internal constraints, held contacts.
  const int k = p.internal.rows();
  int n_hold = 0;
  for (const auto& c : contacts)
    if (c.hold_motion) n_hold += c.dim;
  qp.A_eq = MatrixX::Zero(6 + k + n_hold, n);
  qp.b_eq = VectorX::Zero(6 + k + n_hold);
  qp.A_eq.topLeftCorner(6, nv) = A.topRows(6);
  qp.A_eq.block(0, nv, 6, nf) = -p.contact_jacobian.transpose().topRows(6);
  qp.b_eq.head(6) = -p.dynamics.bg.head(6);
  p.equality_blocks.push_back({"floating_base_dynamics", 0, 6});
  if (k > 0) {
    qp.A_eq.block(6, 0, k, nv) = p.internal.J_int;
    p.equality_blocks.push_back({"internal_constraints", 6, k});
  }
  {
    int row = 6 + k, frow = 0;
    for (const auto& c : contacts) {
      if (c.hold_motion) {
        qp.A_eq.block(row, 0, c.dim, nv) = p.contact_jacobian.middleRows(frow, c.dim);
        qp.b_eq.segment(row, c.dim) = -p.contact_jdv.segment(frow, c.dim);
        p.equality_blocks.push_back({"contact_motion:" + c.frame, row, c.dim});
        row += c.dim;
      }
      frow += c.dim;
    }
  }

  // Inequalities: cones, normal-force caps, torque limits.
  int n_in = 0;
  for (const auto& c : contacts)
    if (c.unilateral) n_in += static_cast<int>(build_friction_cone(c).rows()) + 1;
  const int na = model.num_actuated();
  n_in += na;
  qp.A_in = MatrixX::Zero(n_in, n);
  qp.lb_in = VectorX::Constant(n_in, -kInf);
  qp.ub_in = VectorX::Constant(n_in, kInf);
  {
    int row = 0, frow = nv;
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      const ContactSpec& c = contacts[i];
      if (c.unilateral) {
        const MatrixX u_local = build_friction_cone(c);
        const VectorX slack = u_local * contact_rotation_block(rotations[i], c.dim) * desired[i];
        if (slack.minCoeff() < -1e-9)
          throw ValidationError("contact '" + c.frame + "': desired wrench lies outside the friction cone");
        const auto m = static_cast<int>(u_local.rows());
        qp.A_in.block(row, frow, m, c.dim) = u_local * contact_rotation_block(rotations[i], c.dim);
        qp.lb_in.segment(row, m).setZero();
        p.inequality_blocks.push_back({"friction_cone:" + c.frame, row, m});
        row += m;
        // Normal force along the contact z axis.
        qp.A_in.block(row, frow + c.dim - 3, 1, 3) = rotations[i].col(2).transpose();
        qp.ub_in(row) = c.max_normal_force;
        p.inequality_blocks.push_back({"normal_force_cap:" + c.frame, row, 1});
        row += 1;
      }
      frow += c.dim;
    }
    if (na > 0) {
      const MatrixX& T = p.torque_map;
      qp.A_in.block(row, 0, na, nv) = T * A.bottomRows(nj);
      qp.A_in.block(row, nv, na, nf) = -T * p.projected.contact_map.bottomRows(nj);
      const VectorX tau0 = T * p.projected.projected_bias.tail(nj);
      const auto& act = model.actuated_v_indices();
      for (int a = 0; a < na; ++a) {
        const Interval lim = model.joint_at_v_index(act[a]).torque_limits;
        qp.lb_in(row + a) = lim.lower - tau0(a);
        qp.ub_in(row + a) = lim.upper - tau0(a);
      }
      p.inequality_blocks.push_back({"torque_limits", row, na});
    }
  }

  // Acceleration box on the joints.
  qp.lb = VectorX::Constant(n, -kInf);
  qp.ub = VectorX::Constant(n, kInf);
  for (int i = 6; i < nv; ++i) {
    const Interval lim = model.joint_at_v_index(i).acceleration_limits;
    qp.lb(i) = lim.lower;
    qp.ub(i) = lim.upper;
  }
  return p;
}

VectorX recover_torques(const MatrixX& torque_map, const MatrixX& A, const ProjectedDynamics& projected,
                        const VectorX& qdd, const VectorX& forces) {
  const Eigen::Index nj = A.rows() - 6;
  VectorX rhs = A * qdd + projected.projected_bias;
  if (forces.size() > 0) rhs -= projected.contact_map * forces;
  return torque_map * rhs.tail(nj);
}

VectorX recover_torques(const WbcProblem& p, const VectorX& qdd, const VectorX& forces) {
  return recover_torques(p.torque_map, p.dynamics.A, p.projected, qdd, forces);
}

JointCommandLimits command_limits(const RobotModel& model, const WbcConfig& config) {
  const int nj = model.num_joints();
  JointCommandLimits l;
  l.q_min.resize(nj);
  l.q_max.resize(nj);
  l.v_max.resize(nj);
  for (int i = 0; i < nj; ++i) {
    const JointSpec& j = model.joint_at_v_index(i + 6);
    l.q_min(i) = j.position_limits.lower;
    l.q_max(i) = j.position_limits.upper;
    l.v_max(i) = config.velocity_clamp > 0.0 ? std::min(config.velocity_clamp, j.velocity_limit) : j.velocity_limit;
  }
  l.velocity_decay = config.velocity_decay;
  l.position_decay = config.position_decay;
  return l;
}

JointCommand integrate_joint_command(const VectorX& q_des, const VectorX& v_des, const VectorX& qdd_joints, double dt,
                                     const JointCommandLimits& l, const VectorX& q_measured,
                                     const VectorX& v_measured) {
  const Eigen::Index n = q_des.size();
  if (v_des.size() != n || qdd_joints.size() != n || l.q_min.size() != n || q_measured.size() != n ||
      v_measured.size() != n)
    throw DimensionMismatch("joint command vectors must share one size");
  JointCommand out;
  out.v_des = v_des + dt * qdd_joints - dt * l.velocity_decay * (v_des - v_measured);
  out.v_des = out.v_des.cwiseMax(-l.v_max).cwiseMin(l.v_max);
  out.q_des = q_des + dt * out.v_des - dt * l.position_decay * (q_des - q_measured);
  out.q_des = out.q_des.cwiseMax(l.q_min).cwiseMin(l.q_max);
  return out;
}

namespace {

WbcOutput finish(const RobotModel& model, const WbcProblem& p, const QpSolution& sol) {
  if (sol.status == QpStatus::kInfeasible) {
    const std::string block = sol.violated_constraint ? p.block_name(*sol.violated_constraint) : "unknown";
    throw SolverInfeasible("whole-body QP infeasible: constraint block '" + block + "' cannot be satisfied", block);
  }
  WbcOutput out;
  out.qdd = sol.x.head(p.nv);
  out.forces = sol.x.tail(p.nf);
  out.tau = recover_torques(p, out.qdd, out.forces);
  out.internal_forces = solve_internal_forces(p.internal, p.dynamics.A, p.dynamics.bg, model.actuation_selection(),
                                              out.tau, out.forces, out.qdd, p.contact_jacobian);
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.kkt_residual = sol.kkt_residual;
  for (const auto& t : p.tasks)
    out.task_residuals.push_back((t.J * out.qdd + t.Jdv - t.desired_acceleration).norm());
  return out;
}

}  // namespace

WbcOutput solve_wbc(const RobotModel& model, const RobotState& state, const std::vector<TaskSpec>& tasks,
                    const std::vector<ContactSpec>& contacts, const WbcConfig& config) {
  const WbcProblem p = assemble_wbc_qp(model, state, tasks, contacts, config);
  WbcOutput out = finish(model, p, solve_qp(p.qp, config.qp));
  const int nj = model.num_joints();
  const VectorX q = state.q.tail(nj), v = state.v.tail(nj);
  const JointCommand cmd =
      integrate_joint_command(q, v, out.qdd.tail(nj), config.dt, command_limits(model, config), q, v);
  out.q_des = cmd.q_des;
  out.v_des = cmd.v_des;
  return out;
}

WholeBodyController::WholeBodyController(const RobotModel& model, WbcConfig config)
    : model_(model), config_(std::move(config)), solver_(config_.qp), limits_(command_limits(model, config_)) {}

void WholeBodyController::reset() {
  solver_.reset();
  q_des_.resize(0);
  v_des_.resize(0);
}

WbcOutput WholeBodyController::update(const RobotState& state, const std::vector<TaskSpec>& tasks,
                                      const std::vector<ContactSpec>& contacts) {
  const WbcProblem p = assemble_wbc_qp(model_, state, tasks, contacts, config_);
  WbcOutput out = finish(model_, p, solver_.solve(p.qp));
  const int nj = model_.num_joints();
  const VectorX q = state.q.tail(nj), v = state.v.tail(nj);
  if (q_des_.size() != nj) {
    q_des_ = q;
    v_des_ = v;
  }
  const JointCommand cmd = integrate_joint_command(q_des_, v_des_, out.qdd.tail(nj), config_.dt, limits_, q, v);
  q_des_ = cmd.q_des;
  v_des_ = cmd.v_des;
  out.q_des = q_des_;
  out.v_des = v_des_;
  return out;
}

}  // namespace rcwbc
