#include "rcwbc/ik.hpp"

#include <algorithm>
#include <limits>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/errors.hpp"

namespace rcwbc {

MatrixX consistent_velocity_basis(const RobotModel& model) {
  const int nv = model.nv();
  const auto& pairs = model.rolling_pair_indices();
  std::vector<bool> slaved(nv, false);
  for (const auto& [prox, dist] : pairs) slaved[prox] = true;
  MatrixX z = MatrixX::Zero(nv, nv - static_cast<int>(pairs.size()));
  std::vector<int> column(nv, -1);
  int c = 0;
  for (int i = 0; i < nv; ++i)
    if (!slaved[i]) {
      z(i, c) = 1.0;
      column[i] = c++;
    }
  for (std::size_t p = 0; p < pairs.size(); ++p)
    z(pairs[p].first, column[pairs[p].second]) = model.spec().rolling_pairs[p].ratio();
  return z;
}

VectorX ik_error(const RobotModel& model, const std::vector<IkTarget>& targets, const RobotState& state) {
  const Kinematics kin = compute_kinematics(model, state);
  VectorX e(6 * targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Transform pose = frame_pose(model, kin, targets[i].frame);
    e.segment<3>(6 * i) = log_so3(targets[i].pose.rotation * pose.rotation.transpose());
    e.segment<3>(6 * i + 3) = targets[i].pose.translation - pose.translation;
  }
  return e;
}

namespace {

void clamp_joints(const RobotModel& model, VectorX& q) {
  for (int i = 6; i < model.nv(); ++i) {
    const Interval lim = model.joint_at_v_index(i).position_limits;
    q(i + 1) = std::clamp(q(i + 1), lim.lower, lim.upper);
  }
  const auto& pairs = model.rolling_pair_indices();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    q(pairs[p].first + 1) = model.spec().rolling_pairs[p].ratio() * q(pairs[p].second + 1);
}

}  // namespace

RobotState solve_ik(const RobotModel& model, const std::vector<IkTarget>& targets, const RobotState& seed,
                    const IkSettings& settings, int* iterations) {
  for (const auto& t : targets)
    if (!model.find_frame(t.frame)) throw UnknownFrame("IK target frame '" + t.frame + "' not in model");
  check_state(model, seed);
  const MatrixX z = consistent_velocity_basis(model);
  RobotState s = seed;
  s.v.setZero();
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const VectorX e = ik_error(model, targets, s);
    const double err = e.size() ? e.cwiseAbs().maxCoeff() : 0.0;
    best = std::min(best, err);
    if (err < settings.tolerance) {
      if (iterations) *iterations = it;
      return s;
    }
    if (it >= settings.max_iterations)
      throw IkDidNotConverge("inverse kinematics did not converge, best residual " + std::to_string(best), best);
    const Kinematics kin = compute_kinematics(model, s);
    MatrixX j(6 * targets.size(), model.nv());
    for (std::size_t i = 0; i < targets.size(); ++i) j.middleRows(6 * i, 6) = frame_jacobian(model, kin, targets[i].frame);
    const MatrixX jz = j * z;
    const auto m = jz.rows();
    const MatrixX gram = jz * jz.transpose() + settings.damping * settings.damping * MatrixX::Identity(m, m);
    const VectorX dz = jz.transpose() * gram.ldlt().solve(e);
    s.q = integrate_configuration(model, s.q, z * dz, 1.0);
    clamp_joints(model, s.q);
  }
}

}  // namespace rcwbc
