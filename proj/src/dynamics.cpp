#include "rcwbc/dynamics.hpp"

#include <cmath>

#include "rcwbc/errors.hpp"

namespace rcwbc {
namespace {

Transform joint_transform(const Body& b, double q) {
  Transform t = b.origin;
  t.rotation = b.origin.rotation * Eigen::AngleAxisd(q, b.axis).toRotationMatrix();
  return t;
}

Vector6 motion_subspace(const Body& b) {
  Vector6 s;
  s << b.axis, Vector3::Zero();
  return s;
}

// Classical acceleration of a point at body offset r, body coordinates.
Vector3 point_acceleration(const Vector6& vel, const Vector6& acc, const Vector3& r) {
  const Vector3 w = vel.head<3>();
  const Vector3 v = vel.tail<3>();
  return acc.tail<3>() + acc.head<3>().cross(r) + w.cross(v + w.cross(r));
}

// Columns of the world-aligned Jacobian of the point p_world rigidly attached to `body`.
void point_jacobian(const RobotModel& model, const Kinematics& kin, int body, const Vector3& p_world,
                    MatrixX& jac) {
  jac.setZero(6, model.nv());
  const auto& bodies = model.bodies();
  for (int k = body; k >= 0; k = bodies[k].parent) {
    const Body& b = bodies[k];
    const Transform& t = kin.pose[k];
    if (b.kind == JointKind::kFloatingBase) {
      jac.block<3, 3>(0, 0) = t.rotation;
      jac.block<3, 3>(3, 0) = -skew(p_world - t.translation) * t.rotation;
      jac.block<3, 3>(3, 3) = t.rotation;
    } else {
      const Vector3 a = t.rotation * b.axis;
      jac.block<3, 1>(0, b.v_index) = a;
      jac.block<3, 1>(3, b.v_index) = a.cross(p_world - t.translation);
    }
  }
}

VectorX rnea(const RobotModel& model, const Kinematics& kin, const VectorX& qdd, const Vector3& gravity,
             bool with_velocity) {
  const auto& bodies = model.bodies();
  const int n = static_cast<int>(bodies.size());
  // Acceleration is linear in q̈ and gravity on top of the velocity-product bias.
  std::vector<Vector6> acc(n), force(n);
  const Matrix3 r_base = kin.pose[0].rotation;
  for (int i = 0; i < n; ++i) {
    const Body& b = bodies[i];
    if (b.kind == JointKind::kFloatingBase) {
      acc[i] = qdd.head<6>();
      acc[i].tail<3>() -= r_base.transpose() * gravity;
    } else {
      acc[i] = kin.x_up[i] * acc[b.parent] + motion_subspace(b) * qdd(b.v_index);
    }
  }
  for (int i = 0; i < n; ++i) {
    const Body& b = bodies[i];
    const Vector6 vel = with_velocity ? kin.velocity[i] : Vector6::Zero();
    const Vector6 a = with_velocity ? Vector6(acc[i] + kin.bias_acceleration[i]) : acc[i];
    force[i] = b.spatial_inertia * a + cross_force(vel, b.spatial_inertia * vel);
  }
  VectorX tau = VectorX::Zero(model.nv());
  for (int i = n - 1; i >= 0; --i) {
    const Body& b = bodies[i];
    if (b.kind == JointKind::kFloatingBase) {
      tau.head<6>() = force[i];
    } else {
      tau(b.v_index) = b.axis.dot(force[i].head<3>());
      force[b.parent] += kin.x_up[i].transpose() * force[i];
    }
  }
  return tau;
}

}  // namespace

void check_state(const RobotModel& model, const RobotState& state) {
  if (state.q.size() != model.nq() || state.v.size() != model.nv())
    throw DimensionMismatch("state dimensions do not match the model (nq " + std::to_string(model.nq()) + ", nv " +
                            std::to_string(model.nv()) + ")");
  if (!state.q.allFinite() || !state.v.allFinite()) throw DimensionMismatch("state has non-finite entries");
  const double norm = state.q.segment<4>(3).norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw NonUnitQuaternion("base quaternion norm " + std::to_string(norm) + " deviates from 1");
}

Kinematics compute_kinematics(const RobotModel& model, const RobotState& state) {
  check_state(model, state);
  const auto& bodies = model.bodies();
  const std::size_t n = bodies.size();
  Kinematics kin;
  kin.pose.resize(n);
  kin.x_up.resize(n);
  kin.velocity.resize(n);
  kin.bias_acceleration.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Body& b = bodies[i];
    if (b.kind == JointKind::kFloatingBase) {
      kin.pose[i] = {base_rotation(state.q), state.q.head<3>()};
      kin.x_up[i] = Matrix6::Identity();
      kin.velocity[i] = state.v.head<6>();
      kin.bias_acceleration[i].setZero();
      continue;
    }
    const Transform local = joint_transform(b, state.q(b.q_index));
    kin.pose[i] = kin.pose[b.parent] * local;
    kin.x_up[i] = motion_transform_to_child(local);
    const Vector6 vj = motion_subspace(b) * state.v(b.v_index);
    kin.velocity[i] = kin.x_up[i] * kin.velocity[b.parent] + vj;
    kin.bias_acceleration[i] = kin.x_up[i] * kin.bias_acceleration[b.parent] + cross_motion(kin.velocity[i], vj);
  }
  return kin;
}

std::map<std::string, Transform> forward_kinematics(const RobotModel& model, const RobotState& state) {
  const Kinematics kin = compute_kinematics(model, state);
  std::map<std::string, Transform> out;
  for (const std::string& name : model.frame_names()) out[name] = frame_pose(model, kin, name);
  return out;
}

Transform frame_pose(const RobotModel& model, const Kinematics& kin, std::string_view frame) {
  const FrameRef f = model.frame(frame);
  return kin.pose[f.body] * f.offset;
}

Transform frame_pose(const RobotModel& model, const RobotState& state, std::string_view frame) {
  return frame_pose(model, compute_kinematics(model, state), frame);
}

MatrixX frame_jacobian(const RobotModel& model, const Kinematics& kin, std::string_view frame) {
  const FrameRef f = model.frame(frame);
  MatrixX jac;
  point_jacobian(model, kin, f.body, kin.pose[f.body].apply(f.offset.translation), jac);
  return jac;
}

MatrixX frame_jacobian(const RobotModel& model, const RobotState& state, std::string_view frame) {
  return frame_jacobian(model, compute_kinematics(model, state), frame);
}

Vector6 jacobian_dot_times_v(const RobotModel& model, const Kinematics& kin, std::string_view frame) {
  const FrameRef f = model.frame(frame);
  const Matrix3& r = kin.pose[f.body].rotation;
  const Vector6& acc = kin.bias_acceleration[f.body];
  Vector6 out;
  out << r * acc.head<3>(), r * point_acceleration(kin.velocity[f.body], acc, f.offset.translation);
  return out;
}

Vector6 jacobian_dot_times_v(const RobotModel& model, const RobotState& state, std::string_view frame) {
  return jacobian_dot_times_v(model, compute_kinematics(model, state), frame);
}

MatrixX mass_matrix(const RobotModel& model, const Kinematics& kin) {
  const auto& bodies = model.bodies();
  const int n = static_cast<int>(bodies.size());
  std::vector<Matrix6> composite(n);
  for (int i = 0; i < n; ++i) composite[i] = bodies[i].spatial_inertia;
  for (int i = n - 1; i > 0; --i)
    composite[bodies[i].parent] += kin.x_up[i].transpose() * composite[i] * kin.x_up[i];

  MatrixX a = MatrixX::Zero(model.nv(), model.nv());
  for (int i = n - 1; i >= 0; --i) {
    const Body& b = bodies[i];
    if (b.kind == JointKind::kFloatingBase) {
      a.topLeftCorner<6, 6>() = composite[i];
      continue;
    }
    Vector6 f = composite[i] * motion_subspace(b);
    a(b.v_index, b.v_index) = b.axis.dot(f.head<3>());
    for (int j = i; bodies[j].parent >= 0;) {
      f = kin.x_up[j].transpose() * f;
      j = bodies[j].parent;
      const Body& pj = bodies[j];
      if (pj.kind == JointKind::kFloatingBase) {
        a.block<6, 1>(0, b.v_index) = f;
        a.block<1, 6>(b.v_index, 0) = f.transpose();
      } else {
        const double val = pj.axis.dot(f.head<3>());
        a(pj.v_index, b.v_index) = val;
        a(b.v_index, pj.v_index) = val;
      }
    }
  }
  return a;
}

MatrixX mass_matrix(const RobotModel& model, const RobotState& state) {
  return mass_matrix(model, compute_kinematics(model, state));
}

VectorX inverse_dynamics(const RobotModel& model, const RobotState& state, const VectorX& qdd, const Vector3& gravity) {
  if (qdd.size() != model.nv()) throw DimensionMismatch("inverse_dynamics: acceleration has wrong size");
  return rnea(model, compute_kinematics(model, state), qdd, gravity, true);
}

VectorX nonlinear_effects(const RobotModel& model, const RobotState& state, const Vector3& gravity) {
  return rnea(model, compute_kinematics(model, state), VectorX::Zero(model.nv()), gravity, true);
}

DynamicsCache compute_dynamics(const RobotModel& model, const RobotState& state, const Vector3& gravity) {
  DynamicsCache c;
  c.kin = compute_kinematics(model, state);
  c.A = mass_matrix(model, c.kin);
  const VectorX zero = VectorX::Zero(model.nv());
  c.b = rnea(model, c.kin, zero, Vector3::Zero(), true);
  c.g = rnea(model, c.kin, zero, gravity, false);
  c.bg = c.b + c.g;
  return c;
}

CentroidalInertia centroidal_inertia(const RobotModel& model, const Kinematics& kin) {
  CentroidalInertia out;
  const auto& bodies = model.bodies();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    out.total_mass += bodies[i].mass;
    out.com += bodies[i].mass * kin.pose[i].apply(bodies[i].com);
  }
  out.com /= out.total_mass;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Matrix3& r = kin.pose[i].rotation;
    const Vector3 d = kin.pose[i].apply(bodies[i].com) - out.com;
    out.I_G += r * bodies[i].inertia_com * r.transpose() +
               bodies[i].mass * (d.squaredNorm() * Matrix3::Identity() - d * d.transpose());
  }
  out.I_G = 0.5 * (out.I_G + out.I_G.transpose());
  return out;
}

CentroidalInertia centroidal_inertia(const RobotModel& model, const RobotState& state) {
  return centroidal_inertia(model, compute_kinematics(model, state));
}

ComState com_state(const RobotModel& model, const Kinematics& kin) {
  ComState out;
  double mass = 0.0;
  const auto& bodies = model.bodies();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Vector3& c = bodies[i].com;
    const Vector6& vel = kin.velocity[i];
    mass += bodies[i].mass;
    out.position += bodies[i].mass * kin.pose[i].apply(c);
    out.velocity += bodies[i].mass * kin.pose[i].rotation * (vel.tail<3>() + vel.head<3>().cross(c));
  }
  out.position /= mass;
  out.velocity /= mass;
  return out;
}

ComState com_state(const RobotModel& model, const RobotState& state) {
  return com_state(model, compute_kinematics(model, state));
}

MatrixX com_jacobian(const RobotModel& model, const Kinematics& kin) {
  MatrixX out = MatrixX::Zero(3, model.nv());
  MatrixX jac;
  const auto& bodies = model.bodies();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    point_jacobian(model, kin, static_cast<int>(i), kin.pose[i].apply(bodies[i].com), jac);
    out += bodies[i].mass * jac.bottomRows<3>();
  }
  return out / model.total_mass();
}

Vector3 com_jacobian_dot_times_v(const RobotModel& model, const Kinematics& kin) {
  Vector3 out = Vector3::Zero();
  const auto& bodies = model.bodies();
  for (std::size_t i = 0; i < bodies.size(); ++i)
    out += bodies[i].mass * kin.pose[i].rotation *
           point_acceleration(kin.velocity[i], kin.bias_acceleration[i], bodies[i].com);
  return out / model.total_mass();
}

double kinetic_energy(const RobotModel& model, const RobotState& state) {
  const Kinematics kin = compute_kinematics(model, state);
  double e = 0.0;
  for (std::size_t i = 0; i < model.bodies().size(); ++i)
    e += 0.5 * kin.velocity[i].dot(model.bodies()[i].spatial_inertia * kin.velocity[i]);
  return e;
}

double potential_energy(const RobotModel& model, const RobotState& state, const Vector3& gravity) {
  const ComState c = com_state(model, state);
  return -model.total_mass() * gravity.dot(c.position);
}

}  // namespace rcwbc
