#include "rcwbc/rolling_contact.hpp"

#include <cmath>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/errors.hpp"

namespace rcwbc {

InternalConstraintSet build_internal_jacobian(const RobotModel& model) {
  InternalConstraintSet ics;
  ics.pairs = model.rolling_pair_indices();
  const int k = static_cast<int>(ics.pairs.size());
  ics.J_int = MatrixX::Zero(k, model.nv());
  for (int p = 0; p < k; ++p) {
    ics.J_int(p, ics.pairs[p].first) = 1.0;
    ics.J_int(p, ics.pairs[p].second) = -model.spec().rolling_pairs[p].ratio();
  }
  return ics;
}

VectorX constraint_residual(const RobotModel& model, const RobotState& state) {
  const auto& pairs = model.rolling_pair_indices();
  VectorX r(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    r(p) = state.q(pairs[p].first + 1) - model.spec().rolling_pairs[p].ratio() * state.q(pairs[p].second + 1);
  return r;
}

MatrixX pseudo_inverse(const MatrixX& m, double rel_cutoff) {
  if (m.size() == 0) return MatrixX::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<MatrixX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX& s = svd.singularValues();
  const double cutoff = rel_cutoff * s(0);
  VectorX inv = VectorX::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

MatrixX inverse_spd(const MatrixX& A) {
  Eigen::LLT<MatrixX> llt(A);
  if (llt.info() != Eigen::Success) throw NonPositiveDefinite("mass matrix has no Cholesky factor");
  return llt.solve(MatrixX::Identity(A.rows(), A.cols()));
}

MatrixX jbar_from_inverse(const MatrixX& J, const MatrixX& A_inv) {
  const MatrixX ainv_jt = A_inv * J.transpose();
  return ainv_jt * pseudo_inverse(J * ainv_jt);
}

}  // namespace

MatrixX dyn_consistent_pseudoinverse(const MatrixX& J, const MatrixX& A) {
  if (A.rows() != A.cols() || J.cols() != A.rows())
    throw DimensionMismatch("dyn_consistent_pseudoinverse: J and A do not conform");
  return jbar_from_inverse(J, inverse_spd(A));
}

ProjectedDynamics nullspace_projector(const InternalConstraintSet& ics, const MatrixX& A) {
  if (ics.J_int.cols() != A.rows()) throw DimensionMismatch("nullspace_projector: J_int and A do not conform");
  ProjectedDynamics pd;
  pd.A_inv = inverse_spd(A);
  pd.Jbar_int = jbar_from_inverse(ics.J_int, pd.A_inv);
  pd.N_int = MatrixX::Identity(A.rows(), A.cols()) - pd.Jbar_int * ics.J_int;
  return pd;
}

ProjectedDynamics project_dynamics(const RobotModel& model, const InternalConstraintSet& ics, const MatrixX& A,
                                   const VectorX& bg, const MatrixX& contact_jacobian) {
  ProjectedDynamics pd = nullspace_projector(ics, A);
  pd.projected_bias = pd.N_int.transpose() * bg;
  pd.actuation_map = (model.actuation_selection() * pd.N_int).transpose();
  pd.contact_map = (contact_jacobian * pd.N_int).transpose();
  return pd;
}

VectorX solve_internal_forces(const InternalConstraintSet& ics, const MatrixX& A, const VectorX& bg,
                              const MatrixX& S_a, const VectorX& tau, const VectorX& contact_forces,
                              const VectorX& qdd, const MatrixX& contact_jacobian) {
  const Eigen::Index nv = A.rows();
  if (bg.size() != nv || qdd.size() != nv || S_a.cols() != nv || tau.size() != S_a.rows() ||
      contact_jacobian.cols() != nv || contact_forces.size() != contact_jacobian.rows())
    throw DimensionMismatch("solve_internal_forces: inconsistent dimensions");
  if (ics.rows() == 0) return VectorX();
  const MatrixX A_inv = inverse_spd(A);
  const VectorX residual = A * qdd + bg - S_a.transpose() * tau - contact_jacobian.transpose() * contact_forces;
  const MatrixX ainv_jt = A_inv * ics.J_int.transpose();
  return pseudo_inverse(ics.J_int * ainv_jt) * (ainv_jt.transpose() * residual);
}

VectorX solve_internal_forces(const RobotModel& model, const RobotState& state, const VectorX& tau,
                              const VectorX& contact_forces, const VectorX& qdd, const MatrixX& contact_jacobian,
                              const Vector3& gravity) {
  const DynamicsCache c = compute_dynamics(model, state, gravity);
  return solve_internal_forces(build_internal_jacobian(model), c.A, c.bg, model.actuation_selection(), tau,
                               contact_forces, qdd, contact_jacobian);
}

MatrixX truncated_actuation_inverse(const ProjectedDynamics& pd, const MatrixX& S_a) {
  const Eigen::Index nj = pd.N_int.cols() - 6;
  const MatrixX m = (S_a * pd.N_int).rightCols(nj);
  const MatrixX w = pd.A_inv.bottomRightCorner(nj, nj);
  return w * m.transpose() * pseudo_inverse(m * w * m.transpose());
}

ActuationValidity check_actuation_validity(const MatrixX& J_int, const MatrixX& A, const MatrixX& S_a) {
  InternalConstraintSet ics;
  ics.J_int = J_int;
  const ProjectedDynamics pd = nullspace_projector(ics, A);
  const Eigen::Index nj = A.cols() - 6;
  const MatrixX m = (S_a * pd.N_int).rightCols(nj);
  const MatrixX lhs = truncated_actuation_inverse(pd, S_a) * m;
  ActuationValidity out;
  out.defect = (lhs - pd.N_int.bottomRightCorner(nj, nj)).norm();
  out.valid = out.defect < 1e-6;
  return out;
}

ActuationValidity check_actuation_validity(const RobotModel& model, const RobotState& state) {
  return check_actuation_validity(build_internal_jacobian(model).J_int, mass_matrix(model, state),
                                  model.actuation_selection());
}

RobotState random_consistent_state(const RobotModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  RobotState s = neutral_state(model);
  Eigen::Vector4d quat(normal(rng), normal(rng), normal(rng), normal(rng));
  quat.normalize();
  s.q.segment<4>(3) = quat;
  for (int i = 6; i < model.nv(); ++i) {
    const Interval lim = model.joint_at_v_index(i).position_limits;
    s.q(i + 1) = lim.lower + (lim.upper - lim.lower) * unit(rng);
  }
  const auto& pairs = model.rolling_pair_indices();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    s.q(pairs[p].first + 1) = model.spec().rolling_pairs[p].ratio() * s.q(pairs[p].second + 1);
  return s;
}

}  // namespace rcwbc
