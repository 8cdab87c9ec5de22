#pragma once

#include <random>
#include <utility>
#include <vector>

#include "rcwbc/model.hpp"
#include "rcwbc/spatial.hpp"

namespace rcwbc {

/// Constant internal-constraint Jacobian, one row per rolling pair in
/// declaration order: +1 at the proximal joint, -r_distal/r_proximal at the
/// distal joint, zero elsewhere.
struct InternalConstraintSet {
  MatrixX J_int;
  std::vector<std::pair<int, int>> pairs;  // (proximal, distal) velocity indices

  int rows() const { return static_cast<int>(J_int.rows()); }
};

InternalConstraintSet build_internal_jacobian(const RobotModel& model);

/// q_proximal - (r_distal / r_proximal) q_distal per pair.
VectorX constraint_residual(const RobotModel& model, const RobotState& state);

/// SVD pseudo-inverse dropping singular values below rel_cutoff * sigma_max.
MatrixX pseudo_inverse(const MatrixX& m, double rel_cutoff = 1e-8);

/// A^-1 J^T (J A^-1 J^T)^+. Throws NonPositiveDefinite if A has no Cholesky factor.
MatrixX dyn_consistent_pseudoinverse(const MatrixX& J, const MatrixX& A);

struct ProjectedDynamics {
  MatrixX A_inv;
  MatrixX N_int;           // I - Jbar_int J_int
  MatrixX Jbar_int;        // nv x k
  VectorX projected_bias;  // N_int^T (b + g); empty unless set by project_dynamics
  MatrixX actuation_map;   // (S_a N_int)^T, nv x num_actuated
  MatrixX contact_map;     // (J_c N_int)^T, nv x contact rows
};

/// N_int and Jbar_int. The J_int-dot term of the projected dynamics is zero
/// because J_int is constant, so nothing is computed for it.
ProjectedDynamics nullspace_projector(const InternalConstraintSet& ics, const MatrixX& A);

/// nullspace_projector plus the projected bias, actuation and contact maps.
ProjectedDynamics project_dynamics(const RobotModel& model, const InternalConstraintSet& ics, const MatrixX& A,
                                   const VectorX& bg, const MatrixX& contact_jacobian);

/// Internal forces F_int such that A qdd + b + g = S_a^T tau + J_c^T F_r + J_int^T F_int.
/// `contact_jacobian` stacks the contact Jacobians matching F_r (may have zero rows).
VectorX solve_internal_forces(const RobotModel& model, const RobotState& state, const VectorX& tau,
                              const VectorX& contact_forces, const VectorX& qdd, const MatrixX& contact_jacobian,
                              const Vector3& gravity = Vector3(0.0, 0.0, -9.81));
VectorX solve_internal_forces(const InternalConstraintSet& ics, const MatrixX& A, const VectorX& bg,
                              const MatrixX& S_a, const VectorX& tau, const VectorX& contact_forces,
                              const VectorX& qdd, const MatrixX& contact_jacobian);

/// Dynamically consistent inverse of the truncated actuation map M = (S_a N_int)
/// with floating-base columns removed, weighted by the joint block of A^-1.
/// Result is n_joints x num_actuated.
MatrixX truncated_actuation_inverse(const ProjectedDynamics& pd, const MatrixX& S_a);

struct ActuationValidity {
  bool valid = false;
  double defect = 0.0;  // Frobenius norm of Sbar M - N_int (joint block)
};

ActuationValidity check_actuation_validity(const RobotModel& model, const RobotState& state);
/// Same test with a caller-supplied constraint Jacobian.
ActuationValidity check_actuation_validity(const MatrixX& J_int, const MatrixX& A, const MatrixX& S_a);

/// Random configuration inside the joint limits with every rolling pair
/// consistent; unit base quaternion, zero velocity.
RobotState random_consistent_state(const RobotModel& model, std::mt19937_64& rng);

}  // namespace rcwbc
